#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "advsvm/errors.hpp"
#include "advsvm/montecarlo.hpp"
#include "advsvm/numerics.hpp"
#include "advsvm/rng.hpp"

namespace advsvm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr long kChunk = 4096;

struct ChunkTally {
  long tp = 0;
  long tn = 0;
  double cost_sum = 0.0;
  double cost_sq_sum = 0.0;
};

}  // namespace

EmpiricalRates empirical_rates(const GaussianClassModel& model,
                               const AdversaryPolicy& adv,
                               const ClassifierPolicy& clf, long n,
                               std::uint64_t seed, int workers) {
  model.validate();
  if (n < 100) throw ConstructionError("empirical_rates needs n >= 100");
  const Eigen::Index dim = model.dim();
  if (adv.dim() != dim || clf.dim() != dim) {
    throw ConstructionError("policy dimensions do not match the model");
  }

  const MatrixXd l_pos = cholesky_lower(model.sigma_pos);
  const MatrixXd l_neg = cholesky_lower(model.sigma_neg);
  const MatrixXd noise_root = psd_sqrt(adv.w_cov);
  const MatrixXd residual_map =
      MatrixXd::Identity(dim, dim) - adv.a_matrix;

  const long chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkTally> tally(static_cast<std::size_t>(chunks));

  auto run_chunk = [&](long c) {
    const long begin = c * kChunk;
    const long end = std::min(n, begin + kChunk);
    ChunkTally t;
    for (long i = begin; i < end; ++i) {
      const std::uint64_t base =
          static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(dim);
      const VectorXd x_pos =
          model.mu_pos +
          l_pos * rng::normal_vector(seed, rng::stream::positive_class, base, dim);
      const VectorXd w =
          adv.w_mean +
          noise_root *
              rng::normal_vector(seed, rng::stream::adversary_noise, base, dim);
      const VectorXd y = adv.a_matrix * x_pos + w;
      if (classify(clf, y) == 1) ++t.tp;
      const double cost = (residual_map * x_pos).squaredNorm() + w.squaredNorm();
      t.cost_sum += cost;
      t.cost_sq_sum += cost * cost;

      const VectorXd x_neg =
          model.mu_neg +
          l_neg * rng::normal_vector(seed, rng::stream::negative_class, base, dim);
      if (classify(clf, x_neg) == -1) ++t.tn;
    }
    tally[static_cast<std::size_t>(c)] = t;
  };

  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(chunks)));
  if (pool == 1) {
    for (long c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int w = 0; w < pool; ++w) {
      threads.emplace_back([&] {
        for (long c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
          run_chunk(c);
        }
      });
    }
    for (std::thread& th : threads) th.join();
  }

  long tp_count = 0;
  long tn_count = 0;
  double cost_sum = 0.0;
  double cost_sq_sum = 0.0;
  for (long c = 0; c < chunks; ++c) {
    const ChunkTally& t = tally[static_cast<std::size_t>(c)];
    tp_count += t.tp;
    tn_count += t.tn;
    cost_sum += t.cost_sum;
    cost_sq_sum += t.cost_sq_sum;
  }

  EmpiricalRates out;
  out.n_samples = n;
  const double dn = static_cast<double>(n);
  out.tp = static_cast<double>(tp_count) / dn;
  out.fn = 1.0 - out.tp;
  out.tn = static_cast<double>(tn_count) / dn;
  out.fp = 1.0 - out.tn;
  out.cost_mean = cost_sum / dn;
  out.std_err_tp = std::sqrt(std::max(0.0, out.tp * (1.0 - out.tp) / dn));
  out.std_err_tn = std::sqrt(std::max(0.0, out.tn * (1.0 - out.tn) / dn));
  const double var =
      std::max(0.0, (cost_sq_sum - dn * out.cost_mean * out.cost_mean) /
                        (dn - 1.0));
  out.std_err_cost = std::sqrt(var / dn);
  return out;
}

std::vector<Eigen::Vector2d> decision_boundary_points(
    const ClassifierPolicy& clf, const Eigen::Vector2d& lo,
    const Eigen::Vector2d& hi, int count) {
  if (clf.dim() != 2) {
    throw ConstructionError("boundary points are defined for two dimensions");
  }
  if (clf.weights.lpNorm<Eigen::Infinity>() == 0.0) {
    throw DegeneratePolicyError("zero weights have no decision boundary");
  }
  if (count < 1) throw ConstructionError("count must be positive");
  if (!(lo.x() <= hi.x() && lo.y() <= hi.y())) {
    throw ConstructionError("bounding box is inverted");
  }

  const Eigen::Vector2d alpha = clf.weights;
  const Eigen::Vector2d anchor = -clf.bias * alpha / alpha.squaredNorm();
  const Eigen::Vector2d dir =
      Eigen::Vector2d(-alpha.y(), alpha.x()).normalized();

  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 2; ++axis) {
    const double d = dir[axis];
    const double p = anchor[axis];
    if (std::abs(d) < 1e-300) {
      if (p < lo[axis] || p > hi[axis]) return {};
      continue;
    }
    double a = (lo[axis] - p) / d;
    double b = (hi[axis] - p) / d;
    if (a > b) std::swap(a, b);
    t_lo = std::max(t_lo, a);
    t_hi = std::min(t_hi, b);
  }
  if (t_lo > t_hi) return {};

  std::vector<Eigen::Vector2d> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double frac =
        count == 1 ? 0.5 : static_cast<double>(j) / (count - 1);
    Eigen::Vector2d p = anchor + (t_lo + (t_hi - t_lo) * frac) * dir;
    for (int newton = 0; newton < 4; ++newton) {
      const double r = alpha.dot(p) + clf.bias;
      if (std::abs(r) <= 1e-13) break;
      p -= alpha * (r / alpha.squaredNorm());
    }
    points.push_back(p);
  }
  return points;
}

void write_scatter_csv(const GaussianClassModel& model,
                       const AdversaryPolicy& adv, long n_per_class,
                       std::uint64_t seed, std::ostream& out) {
  model.validate();
  const Eigen::Index dim = model.dim();
  if (adv.dim() != dim) {
    throw ConstructionError("adversary dimension does not match the model");
  }
  const MatrixXd l_pos = cholesky_lower(model.sigma_pos);
  const MatrixXd l_neg = cholesky_lower(model.sigma_neg);
  const MatrixXd noise_root = psd_sqrt(adv.w_cov);
  const bool identity =
      adv.a_matrix.isIdentity(0.0) &&
      adv.w_mean.lpNorm<Eigen::Infinity>() == 0.0 &&
      adv.w_cov.mat().lpNorm<Eigen::Infinity>() == 0.0;

  const auto prev = out.precision(17);
  out << "x1";
  for (Eigen::Index d = 1; d < dim; ++d) out << ",x" << d + 1;
  out << ",class,manipulated\n";
  for (long i = 0; i < n_per_class; ++i) {
    const std::uint64_t base =
        static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(dim);
    const VectorXd x =
        model.mu_pos +
        l_pos * rng::normal_vector(seed, rng::stream::positive_class, base, dim);
    const VectorXd w =
        adv.w_mean +
        noise_root *
            rng::normal_vector(seed, rng::stream::adversary_noise, base, dim);
    const VectorXd y = adv.a_matrix * x + w;
    for (Eigen::Index d = 0; d < dim; ++d) out << y[d] << ",";
    out << "1," << (identity ? 0 : 1) << "\n";
  }
  for (long i = 0; i < n_per_class; ++i) {
    const std::uint64_t base =
        static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(dim);
    const VectorXd x =
        model.mu_neg +
        l_neg * rng::normal_vector(seed, rng::stream::negative_class, base, dim);
    for (Eigen::Index d = 0; d < dim; ++d) out << x[d] << ",";
    out << "-1,0\n";
  }
  out.precision(prev);
}

void write_boundary_csv(const std::vector<Eigen::Vector2d>& points,
                        std::ostream& out) {
  const auto prev = out.precision(17);
  out << "x1,x2\n";
  for (const Eigen::Vector2d& p : points) {
    out << p.x() << "," << p.y() << "\n";
  }
  out.precision(prev);
}

}  // namespace advsvm
