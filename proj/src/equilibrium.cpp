#include <algorithm>
#include <cmath>
#include <ostream>

#include "advsvm/equilibrium.hpp"

namespace advsvm {

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

void check_iterate(const GaussianClassModel& model, const AdversaryPolicy& adv,
                   const ClassifierPolicy& clf, const GameConfig& config,
                   int k) {
  if (manipulation_cost(model, adv) > config.epsilon * (1.0 + 1e-6) + 1e-15) {
    throw FeasibilityError("averaged adversary left the budget at iteration " +
                           std::to_string(k));
  }
  if (true_negative_prob(model, clf) < 1.0 - config.delta - 1e-6) {
    throw FeasibilityError(
        "averaged classifier broke the negative bound at iteration " +
        std::to_string(k));
  }
}

}  // namespace

const char* stop_reason_name(StopReason r) {
  return r == StopReason::tolerance ? "tolerance" : "max_iters";
}

EquilibriumResult run_best_response_dynamics(
    const GaussianClassModel& model, const GameConfig& config, Sweep sweep,
    const std::optional<std::pair<AdversaryPolicy, ClassifierPolicy>>& init) {
  config.validate();
  model.validate();
  const Eigen::Index dim = model.dim();

  EquilibriumTrace trace;

  AdversaryPolicy adv;
  ClassifierPolicy clf;
  try {
    if (init.has_value()) {
      adv = init->first;
      clf = init->second;
    } else {
      adv = identity_adversary(dim);
      clf = classifier_best_response(model, adv, config.delta,
                                     config.solver_tol)
                .policy;
    }
  } catch (const SolverError& e) {
    throw DynamicsError(std::string("initialization failed: ") + e.what(),
                        trace);
  }
  if (adv.dim() != dim || clf.dim() != dim) {
    throw ConstructionError("initial policies do not match the model");
  }

  for (int k = 1; k <= config.max_iters; ++k) {
    const double w = config.varpi / k;

    AdversaryResponse adv_br;
    ClassifierResponse clf_br;
    AdversaryPolicy averaged_adv;
    try {
      adv_br = adversary_best_response(model, clf, config.epsilon,
                                       config.solver_tol);
      if (sweep == Sweep::jacobi) {
        clf_br = classifier_best_response(model, adv, config.delta,
                                          config.solver_tol);
      }
      averaged_adv.a_matrix =
          (1.0 - w) * adv.a_matrix + w * adv_br.policy.a_matrix;
      averaged_adv.w_mean = (1.0 - w) * adv.w_mean + w * adv_br.policy.w_mean;
      averaged_adv.w_cov = SymMatrix((1.0 - w) * adv.w_cov.mat() +
                                     w * adv_br.policy.w_cov.mat());
      if (sweep == Sweep::gauss_seidel) {
        clf_br = classifier_best_response(model, averaged_adv, config.delta,
                                          config.solver_tol);
      }
    } catch (const SolverError& e) {
      throw DynamicsError("best response failed at iteration " +
                              std::to_string(k) + ": " + e.what(),
                          trace);
    } catch (const DegeneratePolicyError& e) {
      throw DynamicsError("best response degenerated at iteration " +
                              std::to_string(k) + ": " + e.what(),
                          trace);
    }

    ClassifierPolicy averaged_clf;
    averaged_clf.weights = (1.0 - w) * clf.weights + w * clf_br.policy.weights;
    averaged_clf.bias = (1.0 - w) * clf.bias + w * clf_br.policy.bias;

    const double change = std::max(
        {max_abs_diff(averaged_adv.a_matrix, adv.a_matrix),
         max_abs_diff(averaged_adv.w_mean, adv.w_mean),
         max_abs_diff(averaged_adv.w_cov.mat(), adv.w_cov.mat()),
         max_abs_diff(averaged_clf.weights, clf.weights),
         std::abs(averaged_clf.bias - clf.bias)});

    IterationRecord rec;
    rec.k = k;
    rec.adv_br_gain = adv_br.achieved_fn - false_negative_prob(model, adv, clf);
    const AdversaryPolicy& clf_br_reference =
        sweep == Sweep::jacobi ? adv : averaged_adv;
    rec.clf_br_gain = clf_br.achieved_tp -
                      true_positive_prob(model, clf_br_reference, clf);

    adv = averaged_adv;
    clf = averaged_clf;
    check_iterate(model, adv, clf, config, k);

    const GameMetrics m = evaluate_game(model, adv, clf);
    rec.adv_policy = adv;
    rec.clf_policy = clf;
    rec.tp = m.true_positive;
    rec.fn = m.false_negative;
    rec.tn = m.true_negative;
    rec.cost = m.manipulation_cost;
    trace.iterations.push_back(rec);

    if (change < config.conv_tol) {
      trace.converged = true;
      trace.stop_reason = StopReason::tolerance;
      break;
    }
  }

  EquilibriumResult out;
  out.adversary = adv;
  out.classifier = normalize_classifier(clf.weights, clf.bias);
  out.trace = std::move(trace);
  return out;
}

EquilibriumReport verify_equilibrium(const GaussianClassModel& model,
                                     const AdversaryPolicy& adv,
                                     const ClassifierPolicy& clf,
                                     const GameConfig& config, double tol) {
  config.validate();
  if (!feasible_adversary(model, adv, config.epsilon)) {
    throw FeasibilityError("adversary policy violates the budget");
  }
  if (!feasible_classifier(model, clf, config.delta)) {
    throw FeasibilityError("classifier policy violates the negative bound");
  }

  const AdversaryResponse adv_br =
      adversary_best_response(model, clf, config.epsilon, config.solver_tol);
  const ClassifierResponse clf_br =
      classifier_best_response(model, adv, config.delta, config.solver_tol);

  EquilibriumReport report;
  report.adv_gain =
      adv_br.achieved_fn - false_negative_prob(model, adv, clf);
  report.clf_gain =
      clf_br.achieved_tp - true_positive_prob(model, adv, clf);
  report.is_equilibrium = report.adv_gain <= tol && report.clf_gain <= tol;
  return report;
}

void to_json(nlohmann::json& j, const IterationRecord& r) {
  j = nlohmann::json{{"k", r.k},
                     {"adv_policy", r.adv_policy},
                     {"clf_policy", r.clf_policy},
                     {"tp", r.tp},
                     {"fn", r.fn},
                     {"tn", r.tn},
                     {"cost", r.cost},
                     {"adv_br_gain", r.adv_br_gain},
                     {"clf_br_gain", r.clf_br_gain}};
}

void write_trace_json_lines(const EquilibriumTrace& trace, std::ostream& out) {
  for (const IterationRecord& r : trace.iterations) {
    out << nlohmann::json(r).dump() << "\n";
  }
}

}  // namespace advsvm
