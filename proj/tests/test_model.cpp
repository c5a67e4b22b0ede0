#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "advsvm/errors.hpp"
#include "advsvm/model.hpp"
#include "test_support.hpp"

using namespace advsvm;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

LabeledDataset four_row_dataset() {
  LabeledDataset d;
  d.features.resize(4, 2);
  d.features << 0.0, 0.0,
                2.0, 0.0,
                5.0, 1.0,
                5.0, 3.0;
  d.labels.resize(4);
  d.labels << 1, 1, -1, -1;
  return d;
}

}  // namespace

TEST_CASE("fit computes per class mean and N-1 covariance plus ridge") {
  GaussianClassModel m = fit(four_row_dataset(), 1e-3);
  CHECK(m.mu_pos == Eigen::Vector2d(1.0, 0.0));
  CHECK(m.mu_neg == Eigen::Vector2d(5.0, 2.0));
  CHECK(m.sigma_pos(0, 0) == doctest::Approx(2.001).epsilon(1e-14));
  CHECK(m.sigma_pos(0, 1) == 0.0);
  CHECK(m.sigma_pos(1, 1) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(m.sigma_neg(0, 0) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(m.sigma_neg(1, 1) == doctest::Approx(2.001).epsilon(1e-14));
  CHECK(m.positive_prior == doctest::Approx(0.5));
}

TEST_CASE("fit rejects degenerate input") {
  LabeledDataset d = four_row_dataset();
  CHECK_THROWS_AS(fit(d, 0.0), NotPdError);
  CHECK_THROWS_AS(fit(d, -1.0), ConstructionError);

  d.labels << 1, 1, 1, -1;
  CHECK_THROWS_AS(fit(d, 1e-3), InsufficientDataError);
}

TEST_CASE("default_ridge scales with the pooled covariance trace") {
  CHECK(default_ridge(four_row_dataset()) ==
        doctest::Approx(4e-8).epsilon(1e-12));
}

TEST_CASE("whiten makes the pooled covariance the identity") {
  LabeledDataset d;
  d.features = testing::random_matrix(200, 3);
  d.features.col(1) *= 4.0;
  d.features.col(2) += 0.7 * d.features.col(0);
  d.labels = Eigen::VectorXi::Ones(200);
  d.labels.tail(100).array() = -1;

  auto [white, transform] = whiten(d);
  CHECK(white.labels == d.labels);

  const Eigen::VectorXd mean = white.features.colwise().mean().transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
  for (Eigen::Index r = 0; r < white.size(); ++r) {
    const Eigen::VectorXd dv = white.features.row(r).transpose() - mean;
    cov += dv * dv.transpose();
  }
  cov /= static_cast<double>(white.size() - 1);
  CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);

  const Eigen::VectorXd x0 = d.features.row(0).transpose();
  CHECK((transform.apply(x0) - white.features.row(0).transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("synthetic_example is the reference two dimensional game") {
  GaussianClassModel m = synthetic_example();
  m.validate();
  CHECK(m.mu_pos == Eigen::Vector2d(3.0, 3.0));
  CHECK(m.mu_neg == Eigen::Vector2d(0.0, 0.0));
  CHECK(m.sigma_pos(0, 0) == 1.0);
  CHECK(m.sigma_pos(1, 1) == 0.2);
  CHECK(m.sigma_pos(0, 1) == 0.0);
  CHECK(m.sigma_neg(0, 0) == 0.2);
  CHECK(m.sigma_neg(1, 1) == 1.0);
  CHECK(m.positive_prior == 0.5);
}

TEST_CASE("sample is deterministic and row addressable") {
  const GaussianClassModel m = synthetic_example();
  const Eigen::MatrixXd a = sample(m, +1, 10, 42);
  const Eigen::MatrixXd b = sample(m, +1, 10, 42);
  CHECK(a == b);
  const Eigen::MatrixXd head = sample(m, +1, 4, 42);
  CHECK(a.topRows(4) == head);
  CHECK(sample(m, -1, 10, 42) != sample(m, +1, 10, 42));
  CHECK(sample(m, +1, 10, 43) != a);
}

TEST_CASE("sample matches the model moments") {
  const GaussianClassModel m = synthetic_example();
  const Eigen::Index n = 50000;
  const Eigen::MatrixXd x = sample(m, +1, n, 7);
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  CHECK((mean - m.mu_pos).cwiseAbs().maxCoeff() < 0.05);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXd d = x.row(r).transpose() - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n - 1);
  CHECK((cov - m.sigma_pos.mat()).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("csv round trip preserves values and labels") {
  LabeledDataset d;
  d.features = testing::random_matrix(37, 3);
  d.labels = Eigen::VectorXi::Ones(37);
  d.labels.head(20).array() = -1;

  const std::string path = temp_path("advsvm_test_roundtrip.csv");
  write_csv(path, d);
  LabeledDataset back = read_csv(path, false);
  CHECK(back.labels == d.labels);
  CHECK(back.features == d.features);
  std::remove(path.c_str());
}

TEST_CASE("read_csv maps 0/1 labels when asked and hints when not") {
  const std::string path = temp_path("advsvm_test_labels01.csv");
  {
    std::ofstream out(path);
    out << "x1,x2,label\n1.0,2.0,1\n3.0,4.0,0\n";
  }
  LabeledDataset d = read_csv(path, true);
  CHECK(d.labels[0] == 1);
  CHECK(d.labels[1] == -1);

  CHECK_THROWS_WITH_AS(read_csv(path, false),
                       doctest::Contains("labels01"), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("read_csv rejects malformed input") {
  const std::string path = temp_path("advsvm_test_bad.csv");
  {
    std::ofstream out(path);
    out << "x1,x2\n1.0,2.0\n";
  }
  CHECK_THROWS_AS(read_csv(path, false), ParseError);
  {
    std::ofstream out(path);
    out << "x1,label\noops,1\n";
  }
  CHECK_THROWS_AS(read_csv(path, false), ParseError);
  {
    std::ofstream out(path);
    out << "x1,label\n1.0\n";
  }
  CHECK_THROWS_AS(read_csv(path, false), ParseError);
  CHECK_THROWS_AS(read_csv(temp_path("advsvm_no_such_file.csv"), false),
                  ParseError);
  std::remove(path.c_str());
}

TEST_CASE("model json round trips") {
  GaussianClassModel m = testing::random_model(3);
  nlohmann::json j = m;
  GaussianClassModel back = j.get<GaussianClassModel>();
  CHECK(back.mu_pos == m.mu_pos);
  CHECK(back.mu_neg == m.mu_neg);
  CHECK(back.sigma_pos.mat() == m.sigma_pos.mat());
  CHECK(back.sigma_neg.mat() == m.sigma_neg.mat());
  CHECK(back.positive_prior == m.positive_prior);

  j["dim"] = 7;
  CHECK_THROWS_AS(j.get<GaussianClassModel>(), ParseError);
}

TEST_CASE("whiten transform json round trips") {
  WhitenTransform t{testing::random_matrix(3, 3)};
  nlohmann::json j = t;
  WhitenTransform back = j.get<WhitenTransform>();
  CHECK(back.factor_inv == t.factor_inv);
}

TEST_CASE("validate rejects inconsistent models") {
  GaussianClassModel m = synthetic_example();
  m.mu_neg = Eigen::Vector3d::Zero();
  CHECK_THROWS_AS(m.validate(), ConstructionError);

  m = synthetic_example();
  m.sigma_pos = SymMatrix(Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS_AS(m.validate(), NotPdError);

  m = synthetic_example();
  m.positive_prior = 1.0;
  CHECK_THROWS_AS(m.validate(), ConstructionError);
}
