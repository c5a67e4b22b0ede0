#include "advsvm/game_eval.hpp"

#include <cmath>

#include "advsvm/errors.hpp"

namespace advsvm {

void GameConfig::validate() const {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ConstructionError("delta must lie in (0, 1/2)");
  }
  if (!(epsilon >= 0.0)) {
    throw ConstructionError("epsilon must be nonnegative");
  }
  if (!(varpi > 0.0 && varpi < 1.0)) {
    throw ConstructionError("varpi must lie in (0, 1)");
  }
  if (max_iters < 1) {
    throw ConstructionError("max_iters must be positive");
  }
  if (!(conv_tol > 0.0) || !(solver_tol > 0.0)) {
    throw ConstructionError("tolerances must be positive");
  }
}

namespace {

// Shared degenerate-variance convention: the probability that a Gaussian with
// the given mean and vanishing variance lands strictly positive.
double positive_mass(double mean, double variance) {
  if (variance <= 1e-300) {
    if (mean > 0.0) return 1.0;
    if (mean < 0.0) return 0.0;
    return 0.5;
  }
  return 0.5 - 0.5 * std::erf(-mean / std::sqrt(2.0 * variance));
}

}  // namespace

double true_positive_prob(const GaussianClassModel& model,
                          const AdversaryPolicy& adv,
                          const ClassifierPolicy& clf) {
  const Eigen::VectorXd mean_y = adv.a_matrix * model.mu_pos + adv.w_mean;
  const Eigen::MatrixXd cov_y =
      adv.a_matrix * model.sigma_pos.mat() * adv.a_matrix.transpose() +
      adv.w_cov.mat();
  const double mean = clf.weights.dot(mean_y) + clf.bias;
  const double variance = clf.weights.dot(cov_y * clf.weights);
  return positive_mass(mean, variance);
}

double false_negative_prob(const GaussianClassModel& model,
                           const AdversaryPolicy& adv,
                           const ClassifierPolicy& clf) {
  return 1.0 - true_positive_prob(model, adv, clf);
}

double true_negative_prob(const GaussianClassModel& model,
                          const ClassifierPolicy& clf) {
  const double mean = clf.weights.dot(model.mu_neg) + clf.bias;
  const double variance =
      clf.weights.dot(model.sigma_neg.mat() * clf.weights);
  return 1.0 - positive_mass(mean, variance);
}

double manipulation_cost(const GaussianClassModel& model,
                         const AdversaryPolicy& adv) {
  const Eigen::Index n = model.dim();
  const Eigen::MatrixXd second_moment =
      model.sigma_pos.mat() + model.mu_pos * model.mu_pos.transpose();
  const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n) - adv.a_matrix;
  return (e * second_moment * e.transpose()).trace() +
         adv.w_mean.squaredNorm() + adv.w_cov.trace();
}

GameMetrics evaluate_game(const GaussianClassModel& model,
                          const AdversaryPolicy& adv,
                          const ClassifierPolicy& clf) {
  const double tp = true_positive_prob(model, adv, clf);
  return {tp, 1.0 - tp, true_negative_prob(model, clf),
          manipulation_cost(model, adv)};
}

bool feasible_classifier(const GaussianClassModel& model,
                         const ClassifierPolicy& clf, double delta) {
  const double norm_bound = 1.0 + 1e-12;
  if (clf.weights.size() > 0 &&
      clf.weights.cwiseAbs().maxCoeff() > norm_bound) {
    return false;
  }
  if (std::abs(clf.bias) > norm_bound) return false;
  return true_negative_prob(model, clf) >= 1.0 - delta - 1e-9;
}

bool feasible_adversary(const GaussianClassModel& model,
                        const AdversaryPolicy& adv, double epsilon) {
  if (min_eigenvalue(adv.w_cov) < -1e-9) return false;
  return manipulation_cost(model, adv) <= epsilon * (1.0 + 1e-9);
}

nlohmann::json metrics_to_json(const GameMetrics& m, double delta,
                               double epsilon) {
  return nlohmann::json{{"true_positive", m.true_positive},
                        {"false_negative", m.false_negative},
                        {"true_negative", m.true_negative},
                        {"manipulation_cost", m.manipulation_cost},
                        {"delta", delta},
                        {"epsilon", epsilon}};
}

}  // namespace advsvm
