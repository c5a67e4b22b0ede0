#include "advsvm/policy.hpp"

#include <cmath>

#include "advsvm/errors.hpp"
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
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

}  // namespace

AdversaryPolicy identity_adversary(Eigen::Index n) {
  AdversaryPolicy p;
  p.a_matrix = Eigen::MatrixXd::Identity(n, n);
  p.w_mean = Eigen::VectorXd::Zero(n);
  p.w_cov = SymMatrix::zero(n);
  return p;
}

Eigen::VectorXd apply_adversary(const AdversaryPolicy& p,
                                const Eigen::VectorXd& x, int label,
                                std::uint64_t seed) {
  if (label <= 0) return x;
  const Eigen::Index n = p.dim();
  const Eigen::VectorXd w =
      p.w_mean + psd_sqrt(p.w_cov) *
                     rng::normal_vector(seed, rng::stream::adversary_noise,
                                        0, n);
  return p.a_matrix * x + w;
}

int classify(const ClassifierPolicy& p, const Eigen::VectorXd& y) {
  return p.weights.dot(y) + p.bias >= 0.0 ? +1 : -1;
}

ClassifierPolicy normalize_classifier(const Eigen::VectorXd& alpha_raw,
                                      double beta_raw) {
  const double scale =
      std::max(alpha_raw.size() > 0 ? alpha_raw.cwiseAbs().maxCoeff() : 0.0,
               std::abs(beta_raw));
  if (!(scale > 0.0)) {
    throw DegeneratePolicyError("all-zero classifier cannot be normalized");
  }
  return {alpha_raw / scale, beta_raw / scale};
}

void to_json(nlohmann::json& j, const AdversaryPolicy& p) {
  nlohmann::json mean = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.w_mean.size(); ++i) mean.push_back(p.w_mean[i]);
  j = nlohmann::json{{"dim", p.dim()},
                     {"a_matrix", matrix_rows(p.a_matrix)},
                     {"w_mean", std::move(mean)},
                     {"w_cov", matrix_rows(p.w_cov.mat())}};
}

void from_json(const nlohmann::json& j, AdversaryPolicy& p) {
  p.a_matrix = matrix_from_rows(j.at("a_matrix"));
  const auto& mean = j.at("w_mean");
  p.w_mean.resize(static_cast<Eigen::Index>(mean.size()));
  for (Eigen::Index i = 0; i < p.w_mean.size(); ++i) {
    p.w_mean[i] = mean.at(i).get<double>();
  }
  p.w_cov = SymMatrix(matrix_from_rows(j.at("w_cov")));
}

void to_json(nlohmann::json& j, const ClassifierPolicy& p) {
  nlohmann::json w = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.weights.size(); ++i) w.push_back(p.weights[i]);
  j = nlohmann::json{{"dim", p.dim()}, {"weights", std::move(w)}, {"bias", p.bias}};
}

void from_json(const nlohmann::json& j, ClassifierPolicy& p) {
  const auto& w = j.at("weights");
  p.weights.resize(static_cast<Eigen::Index>(w.size()));
  for (Eigen::Index i = 0; i < p.weights.size(); ++i) {
    p.weights[i] = w.at(i).get<double>();
  }
  p.bias = j.at("bias").get<double>();
}

}  // namespace advsvm
