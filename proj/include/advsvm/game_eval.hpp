#pragma once

#include <json.hpp>

#include "advsvm/model.hpp"
#include "advsvm/policy.hpp"

namespace advsvm {

// Game constants and the knobs of the learning dynamics.
struct GameConfig {
  double delta = 0.01;     // classifier's true-negative slack, in (0, 1/2)
  double epsilon = 2.0;    // adversary's expected squared-distortion budget
  double varpi = 0.99;     // dynamics mixing constant, in (0, 1)
  int max_iters = 200;
  double conv_tol = 1e-5;
  double solver_tol = 1e-8;

  void validate() const;
};

struct GameMetrics {
  double true_positive;      // classifier's utility
  double false_negative;     // adversary's utility, 1 - true_positive
  double true_negative;      // classifier's constraint quantity
  double manipulation_cost;  // adversary's constraint quantity
};

// P{classified +1 | theta=+1}. Closed form
//   1/2 - 1/2 erf((-a'(A mu+ + mw) - b) / sqrt(2 a'(A S+ A' + Sw) a)).
// When the variance term degenerates (<= 1e-300) the limit convention applies:
// mean > 0 -> 1, mean < 0 -> 0, mean = 0 -> 1/2.
double true_positive_prob(const GaussianClassModel& model,
                          const AdversaryPolicy& adv,
                          const ClassifierPolicy& clf);

double false_negative_prob(const GaussianClassModel& model,
                           const AdversaryPolicy& adv,
                           const ClassifierPolicy& clf);

// P{classified -1 | theta=-1}; the adversary never touches negative points,
// so its policy does not appear.
double true_negative_prob(const GaussianClassModel& model,
                          const ClassifierPolicy& clf);

// E{||(I-A)x||^2 + ||w||^2 | theta=+1}
//   = trace((I-A)(S+ + mu+ mu+')(I-A)') + mw'mw + trace(Sw).
double manipulation_cost(const GaussianClassModel& model,
                         const AdversaryPolicy& adv);

GameMetrics evaluate_game(const GaussianClassModel& model,
                          const AdversaryPolicy& adv,
                          const ClassifierPolicy& clf);

// True negative rate within delta of 1 (relative slack 1e-9) and the policy
// norm bounds hold.
bool feasible_classifier(const GaussianClassModel& model,
                         const ClassifierPolicy& clf, double delta);

// Manipulation cost within the budget (relative slack 1e-9) and w_cov PSD.
bool feasible_adversary(const GaussianClassModel& model,
                        const AdversaryPolicy& adv, double epsilon);

nlohmann::json metrics_to_json(const GameMetrics& m, double delta,
                               double epsilon);

}  // namespace advsvm
