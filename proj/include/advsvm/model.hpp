#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

#include <json.hpp>

#include "advsvm/numerics.hpp"

namespace advsvm {

// Class-conditional Gaussian data model: x | theta=+1 ~ N(mu_pos, sigma_pos),
// x | theta=-1 ~ N(mu_neg, sigma_neg). positive_prior is carried for
// completeness; every probability below is class-conditional and ignores it.
struct GaussianClassModel {
  Eigen::VectorXd mu_pos;
  SymMatrix sigma_pos;
  Eigen::VectorXd mu_neg;
  SymMatrix sigma_neg;
  double positive_prior = 0.5;

  Eigen::Index dim() const { return mu_pos.size(); }

  // Checks dimension consistency, sigma_pos/sigma_neg > 0 and
  // positive_prior in (0,1). Throws on violation.
  void validate() const;
};

struct LabeledDataset {
  Eigen::MatrixXd features;  // one row per observation
  Eigen::VectorXi labels;    // entries are -1 or +1

  Eigen::Index dim() const { return features.cols(); }
  Eigen::Index size() const { return features.rows(); }
};

// x -> factor_inv * x where factor_inv is the inverse lower Cholesky factor
// of the pooled feature covariance.
struct WhitenTransform {
  Eigen::MatrixXd factor_inv;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return factor_inv * x;
  }
};

// Per-class sample mean and covariance (denominator N-1) plus ridge times
// identity on each covariance. Throws InsufficientDataError when a class has
// fewer than two rows and NotPdError when a ridged covariance is still not
// positive definite.
GaussianClassModel fit(const LabeledDataset& data, double ridge);

// Ridge used when none is given: 1e-8 * trace(pooled covariance) / dim.
double default_ridge(const LabeledDataset& data);

// Scales every feature vector by the inverse Cholesky factor of the pooled
// (label-blind) covariance; the output has pooled covariance identity.
std::pair<LabeledDataset, WhitenTransform> whiten(const LabeledDataset& data);

// count i.i.d. draws from the class-conditional Gaussian, one per row,
// deterministic in (seed, label, row index).
Eigen::MatrixXd sample(const GaussianClassModel& model, int label,
                       Eigen::Index count, std::uint64_t seed);

// The two-dimensional reference game: mu_pos=(3,3), mu_neg=(0,0),
// sigma_pos=diag(1,1/5), sigma_neg=diag(1/5,1), prior 1/2.
GaussianClassModel synthetic_example();

// CSV with a header row; one column named "label" (values -1/+1, or 0/1 when
// labels01 is set), remaining numeric columns are features in header order.
LabeledDataset read_csv(const std::string& path, bool labels01);
void write_csv(const std::string& path, const LabeledDataset& data);

void to_json(nlohmann::json& j, const GaussianClassModel& m);
void from_json(const nlohmann::json& j, GaussianClassModel& m);
void to_json(nlohmann::json& j, const WhitenTransform& t);
void from_json(const nlohmann::json& j, WhitenTransform& t);

}  // namespace advsvm
