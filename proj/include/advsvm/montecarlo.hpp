#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "advsvm/model.hpp"
#include "advsvm/policy.hpp"

namespace advsvm {

struct EmpiricalRates {
  double tp = 0.0;
  double fn = 0.0;
  double tn = 0.0;
  double fp = 0.0;
  double cost_mean = 0.0;
  long n_samples = 0;  // per class
  double std_err_tp = 0.0;
  double std_err_tn = 0.0;
  double std_err_cost = 0.0;
};

// Draws n points from each class, pushes the positives through the adversary,
// classifies, and tallies. Deterministic per seed and independent of the
// worker count: samples are indexed, work is chunked, and the reduction runs
// in chunk order.
EmpiricalRates empirical_rates(const GaussianClassModel& model,
                               const AdversaryPolicy& adv,
                               const ClassifierPolicy& clf, long n,
                               std::uint64_t seed, int workers = 1);

// Evenly spaced points of the decision line {y : weights . y + bias = 0}
// clipped to the box [lo, hi], two dimensions only. Every returned point is
// projected back onto the line so the residual is at most 1e-12. Empty when
// the line misses the box.
std::vector<Eigen::Vector2d> decision_boundary_points(
    const ClassifierPolicy& clf, const Eigen::Vector2d& lo,
    const Eigen::Vector2d& hi, int count);

// Scatter rows "x1,x2,class,manipulated": n points per class, positives after
// the adversary's map (manipulated = 1 unless the policy is the identity).
void write_scatter_csv(const GaussianClassModel& model,
                       const AdversaryPolicy& adv, long n_per_class,
                       std::uint64_t seed, std::ostream& out);

// Boundary polyline rows "x1,x2".
void write_boundary_csv(const std::vector<Eigen::Vector2d>& points,
                        std::ostream& out);

}  // namespace advsvm
