#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "advsvm/conic.hpp"
#include "advsvm/model.hpp"
#include "advsvm/numerics.hpp"
#include "advsvm/policy.hpp"

namespace advsvm {

// Raw solver output for the classifier's side, before normalization.
struct ClassifierBRRaw {
  Eigen::VectorXd alpha_bar;
  double beta_bar = 0.0;
  double t = 0.0;
  double delta_prime = 0.0;
  conic::Status status = conic::Status::failed;
  double objective = 0.0;
};

struct ClassifierResponse {
  ClassifierPolicy policy;
  double achieved_tp = 0.0;
  ClassifierBRRaw raw;
};

// Raw perspective-program output for the adversary's side. The homogenizing
// variable t scales everything; policies are recovered by dividing it out.
struct AdversaryBRRaw {
  Eigen::MatrixXd a_bar;
  Eigen::VectorXd mu_w_bar;
  Eigen::MatrixXd r_w;
  SymMatrix z_prime;
  double t = 0.0;
  conic::Status status = conic::Status::failed;
  double objective = 0.0;
};

struct AdversaryResponse {
  AdversaryPolicy policy;
  double achieved_fn = 0.0;
  std::string winner;  // which candidate won: sdp/t, sdp/t2, oracle, identity
  AdversaryBRRaw raw;
};

// Whether the relaxation's objective carries the classifier bias through the
// homogenizing variable or drops it as a constant.
enum class AdversaryObjective { perspective_bias, plain_bias };

// Classifier side: maximize the true-positive rate against a fixed adversary
// subject to the true-negative bound, as a second-order cone program. Throws
// SolverError when the solve does not reach optimal status.
ClassifierResponse classifier_best_response(const GaussianClassModel& model,
                                            const AdversaryPolicy& adversary,
                                            double delta,
                                            double solver_tol = 1e-8);

// Adversary side: maximize the false-negative rate against a fixed classifier
// within the distortion budget. Solves the perspective relaxation, recovers
// candidate policies from it, pools them with the reduced-family search and
// the identity policy, and keeps the feasible candidate with the highest
// false-negative rate. Relaxation failures are recorded in the raw output but
// never abort the search.
AdversaryResponse adversary_best_response(
    const GaussianClassModel& model, const ClassifierPolicy& classifier,
    double epsilon, double solver_tol = 1e-8,
    AdversaryObjective objective = AdversaryObjective::perspective_bias);

// Grid-plus-refinement search over the one-parameter family A = a I with the
// noise mean pushed against the classifier. Returns the policy and its
// false-negative rate.
std::pair<AdversaryPolicy, double> reduced_adversary_oracle(
    const GaussianClassModel& model, const ClassifierPolicy& classifier,
    double epsilon, int resolution = 200);

}  // namespace advsvm
