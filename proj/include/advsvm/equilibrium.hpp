#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "advsvm/best_response.hpp"
#include "advsvm/errors.hpp"
#include "advsvm/game_eval.hpp"
#include "advsvm/model.hpp"
#include "advsvm/policy.hpp"

namespace advsvm {

// Whether the classifier's best response inside one iteration reads the
// iteration-k adversary (as the pseudocode orders its reads) or the freshly
// averaged one.
enum class Sweep { jacobi, gauss_seidel };

enum class StopReason { tolerance, max_iters };
const char* stop_reason_name(StopReason r);

struct IterationRecord {
  int k = 0;
  AdversaryPolicy adv_policy;   // post-averaging iterate
  ClassifierPolicy clf_policy;  // post-averaging iterate, not renormalized
  double tp = 0.0;
  double fn = 0.0;
  double tn = 0.0;
  double cost = 0.0;
  double adv_br_gain = 0.0;  // best-response improvement seen this iteration
  double clf_br_gain = 0.0;
};

struct EquilibriumTrace {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  StopReason stop_reason = StopReason::max_iters;
};

struct EquilibriumResult {
  AdversaryPolicy adversary;
  ClassifierPolicy classifier;  // normalized
  EquilibriumTrace trace;
};

// A best-response solve failed mid-run; the trace up to that point rides
// along for diagnosis.
class DynamicsError : public Error {
 public:
  DynamicsError(const std::string& msg, EquilibriumTrace partial)
      : Error(msg), partial_(std::move(partial)) {}
  const EquilibriumTrace& partial_trace() const { return partial_; }

 private:
  EquilibriumTrace partial_;
};

// Averaged best-response dynamics: from (init or) the identity adversary and
// the classifier's response to it, each iteration k computes both best
// responses and moves every policy parameter a step ϖ/k toward them. Stops
// when the largest parameter change drops below conv_tol or after max_iters.
// Every averaged iterate is checked against its feasibility bound.
EquilibriumResult run_best_response_dynamics(
    const GaussianClassModel& model, const GameConfig& config,
    Sweep sweep = Sweep::jacobi,
    const std::optional<std::pair<AdversaryPolicy, ClassifierPolicy>>& init =
        std::nullopt);

struct EquilibriumReport {
  double adv_gain = 0.0;
  double clf_gain = 0.0;
  bool is_equilibrium = false;
};

// How much either player could still gain by deviating to a best response.
// Throws FeasibilityError when an input policy violates its constraint.
EquilibriumReport verify_equilibrium(const GaussianClassModel& model,
                                     const AdversaryPolicy& adv,
                                     const ClassifierPolicy& clf,
                                     const GameConfig& config, double tol);

void to_json(nlohmann::json& j, const IterationRecord& r);

// One JSON object per line, one line per iteration.
void write_trace_json_lines(const EquilibriumTrace& trace, std::ostream& out);

}  // namespace advsvm
