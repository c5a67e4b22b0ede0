#include "advsvm/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "advsvm/rng.hpp"

namespace advsvm {

namespace {

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a nested array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError("ragged matrix rows in JSON");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row.at(k).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

struct ClassStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // denominator N-1
  Eigen::Index count = 0;
};

ClassStats class_stats(const LabeledDataset& data, int label) {
  ClassStats st;
  const Eigen::Index n = data.dim();
  st.mean = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    if (data.labels[r] != label) continue;
    st.mean += data.features.row(r).transpose();
    ++st.count;
  }
  if (st.count < 2) return st;
  st.mean /= static_cast<double>(st.count);
  st.cov = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    if (data.labels[r] != label) continue;
    const Eigen::VectorXd d = data.features.row(r).transpose() - st.mean;
    st.cov += d * d.transpose();
  }
  st.cov /= static_cast<double>(st.count - 1);
  return st;
}

Eigen::MatrixXd pooled_covariance(const LabeledDataset& data) {
  const Eigen::Index n = data.dim();
  const Eigen::Index rows = data.size();
  if (rows < 2) throw InsufficientDataError("need at least two rows");
  const Eigen::VectorXd mean =
      data.features.colwise().mean().transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd d = data.features.row(r).transpose() - mean;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(rows - 1);
}

}  // namespace

void GaussianClassModel::validate() const {
  const Eigen::Index n = dim();
  if (n < 1) throw ConstructionError("model dimension must be positive");
  if (mu_neg.size() != n || sigma_pos.order() != n || sigma_neg.order() != n) {
    throw ConstructionError("model fields have inconsistent dimensions");
  }
  if (!(min_eigenvalue(sigma_pos) > 0.0)) {
    throw NotPdError("sigma_pos is not positive definite");
  }
  if (!(min_eigenvalue(sigma_neg) > 0.0)) {
    throw NotPdError("sigma_neg is not positive definite");
  }
  if (!(positive_prior > 0.0 && positive_prior < 1.0)) {
    throw ConstructionError("positive_prior must lie in (0, 1)");
  }
}

GaussianClassModel fit(const LabeledDataset& data, double ridge) {
  if (ridge < 0.0) throw ConstructionError("ridge must be nonnegative");
  const Eigen::Index n = data.dim();
  const ClassStats pos = class_stats(data, +1);
  const ClassStats neg = class_stats(data, -1);
  if (pos.count < 2 || neg.count < 2) {
    throw InsufficientDataError("each class needs at least two rows");
  }
  GaussianClassModel m;
  m.mu_pos = pos.mean;
  m.mu_neg = neg.mean;
  m.sigma_pos =
      SymMatrix(pos.cov + ridge * Eigen::MatrixXd::Identity(n, n));
  m.sigma_neg =
      SymMatrix(neg.cov + ridge * Eigen::MatrixXd::Identity(n, n));
  m.positive_prior =
      static_cast<double>(pos.count) / static_cast<double>(data.size());
  cholesky_lower(m.sigma_pos);
  cholesky_lower(m.sigma_neg);
  return m;
}

double default_ridge(const LabeledDataset& data) {
  return 1e-8 * pooled_covariance(data).trace() /
         static_cast<double>(data.dim());
}

std::pair<LabeledDataset, WhitenTransform> whiten(const LabeledDataset& data) {
  const Eigen::MatrixXd l = cholesky_lower(SymMatrix(pooled_covariance(data)));
  WhitenTransform t;
  t.factor_inv = l.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(data.dim(), data.dim()));
  LabeledDataset out;
  out.features = data.features * t.factor_inv.transpose();
  out.labels = data.labels;
  return {std::move(out), std::move(t)};
}

Eigen::MatrixXd sample(const GaussianClassModel& model, int label,
                       Eigen::Index count, std::uint64_t seed) {
  const Eigen::Index n = model.dim();
  const bool positive = label > 0;
  const Eigen::VectorXd& mu = positive ? model.mu_pos : model.mu_neg;
  const Eigen::MatrixXd l =
      cholesky_lower(positive ? model.sigma_pos : model.sigma_neg);
  const std::uint64_t stream =
      positive ? rng::stream::positive_class : rng::stream::negative_class;
  Eigen::MatrixXd out(count, n);
  for (Eigen::Index i = 0; i < count; ++i) {
    const std::uint64_t base =
        static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n);
    out.row(i) = (mu + l * rng::normal_vector(seed, stream, base, n))
                     .transpose();
  }
  return out;
}

GaussianClassModel synthetic_example() {
  GaussianClassModel m;
  m.mu_pos = Eigen::Vector2d(3.0, 3.0);
  m.mu_neg = Eigen::Vector2d(0.0, 0.0);
  m.sigma_pos = SymMatrix(Eigen::Vector2d(1.0, 0.2).asDiagonal().toDenseMatrix());
  m.sigma_neg = SymMatrix(Eigen::Vector2d(0.2, 1.0).asDiagonal().toDenseMatrix());
  m.positive_prior = 0.5;
  return m;
}

LabeledDataset read_csv(const std::string& path, bool labels01) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "label") label_col = static_cast<int>(i);
  }
  if (label_col < 0) throw ParseError(path + ": no column named \"label\"");
  const Eigen::Index n = static_cast<Eigen::Index>(header.size()) - 1;
  if (n < 1) throw ParseError(path + ": no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError(path + ": row " + std::to_string(row) + ", column \"" +
                         (col < header.size() ? header[col] : "?") +
                         "\": not a number: \"" + cell + "\"");
      }
      if (static_cast<int>(col) == label_col) {
        int lab;
        if (labels01) {
          if (v == 0.0) lab = -1;
          else if (v == 1.0) lab = +1;
          else
            throw ParseError(path + ": row " + std::to_string(row) +
                             ": label must be 0 or 1");
        } else {
          if (v == -1.0) lab = -1;
          else if (v == 1.0) lab = +1;
          else
            throw ParseError(path + ": row " + std::to_string(row) +
                             ": label must be -1 or +1 (use --labels01 for "
                             "0/1 data)");
        }
        labels.push_back(lab);
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != header.size()) {
      throw ParseError(path + ": row " + std::to_string(row) +
                       ": expected " + std::to_string(header.size()) +
                       " cells, got " + std::to_string(col));
    }
  }

  LabeledDataset data;
  data.features.resize(static_cast<Eigen::Index>(labels.size()), n);
  data.labels.resize(static_cast<Eigen::Index>(labels.size()));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    for (Eigen::Index c = 0; c < n; ++c) data.features(r, c) = values[k++];
    data.labels[r] = labels[static_cast<std::size_t>(r)];
  }
  return data;
}

void write_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out.precision(17);
  for (Eigen::Index c = 0; c < data.dim(); ++c) out << "x" << (c + 1) << ",";
  out << "label\n";
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
      out << data.features(r, c) << ",";
    }
    out << data.labels[r] << "\n";
  }
  if (!out) throw ParseError("failed writing " + path);
}

void to_json(nlohmann::json& j, const GaussianClassModel& m) {
  j = nlohmann::json{{"dim", m.dim()},
                     {"mu_pos", vector_to_json(m.mu_pos)},
                     {"sigma_pos", matrix_rows(m.sigma_pos.mat())},
                     {"mu_neg", vector_to_json(m.mu_neg)},
                     {"sigma_neg", matrix_rows(m.sigma_neg.mat())},
                     {"positive_prior", m.positive_prior}};
}

void from_json(const nlohmann::json& j, GaussianClassModel& m) {
  m.mu_pos = vector_from_json(j.at("mu_pos"));
  m.sigma_pos = SymMatrix(matrix_from_rows(j.at("sigma_pos")));
  m.mu_neg = vector_from_json(j.at("mu_neg"));
  m.sigma_neg = SymMatrix(matrix_from_rows(j.at("sigma_neg")));
  m.positive_prior = j.value("positive_prior", 0.5);
  if (j.contains("dim") &&
      j.at("dim").get<Eigen::Index>() != m.dim()) {
    throw ParseError("model JSON dim field disagrees with data");
  }
}

void to_json(nlohmann::json& j, const WhitenTransform& t) {
  j = nlohmann::json{{"dim", t.factor_inv.rows()},
                     {"factor_inv", matrix_rows(t.factor_inv)}};
}

void from_json(const nlohmann::json& j, WhitenTransform& t) {
  t.factor_inv = matrix_from_rows(j.at("factor_inv"));
}

}  // namespace advsvm
