#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include <json.hpp>

#include "advsvm/numerics.hpp"

namespace advsvm {

// The adversary's strategy: positive-class points x are replaced by
// y = A x + w with w ~ N(w_mean, w_cov). Negative-class points pass through.
struct AdversaryPolicy {
  Eigen::MatrixXd a_matrix;
  Eigen::VectorXd w_mean;
  SymMatrix w_cov;

  Eigen::Index dim() const { return a_matrix.rows(); }
};

// Linear classifier sign(weights . y + bias), normalized so that
// max(||weights||_inf, |bias|) <= 1.
struct ClassifierPolicy {
  Eigen::VectorXd weights;
  double bias = 0.0;

  Eigen::Index dim() const { return weights.size(); }
};

AdversaryPolicy identity_adversary(Eigen::Index n);

// label=+1: A x + w with w drawn deterministically from the seed;
// label=-1: x unchanged.
Eigen::VectorXd apply_adversary(const AdversaryPolicy& p,
                                const Eigen::VectorXd& x, int label,
                                std::uint64_t seed);

// +1 when weights . y + bias >= 0, else -1. The tie at exactly zero goes to
// +1; it has probability zero under any nondegenerate model.
int classify(const ClassifierPolicy& p, const Eigen::VectorXd& y);

// Divides by max(||alpha_raw||_inf, |beta_raw|). Throws
// DegeneratePolicyError when both are zero.
ClassifierPolicy normalize_classifier(const Eigen::VectorXd& alpha_raw,
                                      double beta_raw);

void to_json(nlohmann::json& j, const AdversaryPolicy& p);
void from_json(const nlohmann::json& j, AdversaryPolicy& p);
void to_json(nlohmann::json& j, const ClassifierPolicy& p);
void from_json(const nlohmann::json& j, ClassifierPolicy& p);

}  // namespace advsvm
