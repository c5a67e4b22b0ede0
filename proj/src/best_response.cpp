#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "advsvm/best_response.hpp"
#include "advsvm/errors.hpp"
#include "advsvm/game_eval.hpp"

namespace advsvm {

namespace {

using conic::LinExpr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const double kSq2 = std::sqrt(2.0);

conic::SolveOptions options_for(double solver_tol) {
  conic::SolveOptions opts;
  opts.feas_tol = solver_tol;
  opts.gap_tol = 10.0 * solver_tol;
  return opts;
}

}  // namespace

ClassifierResponse classifier_best_response(const GaussianClassModel& model,
                                            const AdversaryPolicy& adversary,
                                            double delta, double solver_tol) {
  const Eigen::Index dim = model.dim();
  if (adversary.dim() != dim) {
    throw ConstructionError("adversary dimension does not match the model");
  }
  if (!(delta > 0.0 && delta < 0.5)) {
    throw ConstructionError("delta must lie in (0, 1/2)");
  }

  const double delta_prime = erf_inv(1.0 - 2.0 * delta);
  const MatrixXd shifted_cov =
      adversary.a_matrix * model.sigma_pos.mat() * adversary.a_matrix.transpose() +
      adversary.w_cov.mat();
  const MatrixXd f_pos = psd_sqrt(SymMatrix(shifted_cov));
  const MatrixXd f_neg = psd_sqrt(model.sigma_neg);
  const VectorXd shifted_mean = adversary.a_matrix * model.mu_pos + adversary.w_mean;

  conic::Program prog;
  const auto alpha = prog.vector("alpha", dim);
  const auto beta = prog.scalar("beta");
  const auto t = prog.scalar("t");

  LinExpr objective = beta();
  for (Eigen::Index i = 0; i < dim; ++i) objective += shifted_mean[i] * alpha(i);
  prog.maximize(objective);

  std::vector<LinExpr> soc_pos;
  soc_pos.emplace_back(1.0);
  for (Eigen::Index r = 0; r < dim; ++r) {
    LinExpr row;
    for (Eigen::Index k = 0; k < dim; ++k) row += kSq2 * f_pos(r, k) * alpha(k);
    soc_pos.push_back(row);
  }
  prog.add_soc(soc_pos);

  LinExpr margin = -1.0 * beta() - delta_prime * t();
  for (Eigen::Index k = 0; k < dim; ++k) margin -= model.mu_neg[k] * alpha(k);
  prog.add_inequality(margin);

  std::vector<LinExpr> soc_neg;
  soc_neg.push_back(t());
  for (Eigen::Index r = 0; r < dim; ++r) {
    LinExpr row;
    for (Eigen::Index k = 0; k < dim; ++k) row += kSq2 * f_neg(r, k) * alpha(k);
    soc_neg.push_back(row);
  }
  prog.add_soc(soc_neg);

  const conic::Solution sol = conic::solve(prog, options_for(solver_tol));

  ClassifierBRRaw raw;
  raw.status = sol.status;
  raw.delta_prime = delta_prime;
  if (sol.status != conic::Status::optimal) {
    throw SolverError("classifier best response did not reach an optimum",
                      conic::status_name(sol.status));
  }
  raw.alpha_bar = sol.value(alpha);
  raw.beta_bar = sol.value_scalar(beta);
  raw.t = sol.value_scalar(t);
  raw.objective = sol.objective_value;

  // The fractional program's optimum collapses to the origin exactly when no
  // delta-feasible classifier attains a true-positive rate above one half;
  // normalizing that point would only amplify solver noise.
  if (std::max(raw.alpha_bar.lpNorm<Eigen::Infinity>(),
               std::abs(raw.beta_bar)) < 1e-7) {
    throw DegeneratePolicyError(
        "no delta-feasible classifier attains a true-positive rate above one "
        "half; the best-response program degenerates to the zero policy");
  }

  ClassifierResponse out;
  out.policy = normalize_classifier(raw.alpha_bar, raw.beta_bar);
  out.raw = raw;
  out.achieved_tp = true_positive_prob(model, adversary, out.policy);
  if (true_negative_prob(model, out.policy) < 1.0 - delta - 1e-6) {
    throw SolverError("classifier best response violates the negative bound",
                      conic::status_name(sol.status));
  }
  return out;
}

namespace {

struct SdpRecovery {
  AdversaryBRRaw raw;
};

SdpRecovery solve_adversary_sdp(const GaussianClassModel& model,
                                const ClassifierPolicy& clf, double epsilon,
                                double solver_tol, AdversaryObjective objective) {
  const Eigen::Index dim = model.dim();
  const VectorXd& a = clf.weights;
  const MatrixXd second_moment =
      model.sigma_pos.mat() + model.mu_pos * model.mu_pos.transpose();
  const MatrixXd second_moment_inv =
      second_moment.llt().solve(MatrixXd::Identity(dim, dim));
  const MatrixXd sig_pos_half = psd_sqrt(model.sigma_pos);

  conic::Program prog;
  const auto a_bar = prog.matrix("a_bar", dim, dim);
  const auto mu_w_bar = prog.vector("mu_w_bar", dim);
  const auto r_w = prog.matrix("r_w", dim, dim);
  const auto z_prime = prog.symmetric("z_prime", dim);
  const auto t = prog.scalar("t");

  LinExpr push;  // alpha'(Abar mu+) + alpha'mwbar (+ t beta)
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      push += a[i] * model.mu_pos[j] * a_bar(i, j);
    }
    push += a[i] * mu_w_bar(i);
  }
  if (objective == AdversaryObjective::perspective_bias) {
    push += clf.bias * t();
  }
  prog.maximize(-push);

  // ||(sqrt2 S+^{1/2} Abar' alpha, sqrt2 Rw' alpha)|| <= 1
  std::vector<LinExpr> soc;
  soc.emplace_back(1.0);
  for (Eigen::Index r = 0; r < dim; ++r) {
    LinExpr row;
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        row += kSq2 * sig_pos_half(r, j) * a[i] * a_bar(i, j);
      }
    }
    soc.push_back(row);
  }
  for (Eigen::Index j = 0; j < dim; ++j) {
    LinExpr row;
    for (Eigen::Index i = 0; i < dim; ++i) row += kSq2 * a[i] * r_w(i, j);
    soc.push_back(row);
  }
  prog.add_soc(soc);

  LinExpr budget = epsilon * t();
  for (Eigen::Index j = 0; j < dim; ++j) budget -= z_prime(j, j);
  prog.add_inequality(budget);
  prog.add_inequality(t());

  // [[tI, 0, 0, Rw'], [0, t, 0, mwbar'], [0, 0, tM^{-1}, tI - Abar'],
  //  [Rw, mwbar, tI - Abar, Z']] >= 0
  const Eigen::Index p = 3 * dim + 1;
  std::vector<std::vector<LinExpr>> lmi(
      static_cast<std::size_t>(p), std::vector<LinExpr>(static_cast<std::size_t>(p)));
  auto at = [&lmi](Eigen::Index i, Eigen::Index j) -> LinExpr& {
    return lmi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  };
  for (Eigen::Index r = 0; r < dim; ++r) at(r, r) = t();
  at(dim, dim) = t();
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      at(dim + 1 + r, dim + 1 + c) = second_moment_inv(r, c) * t();
      at(r, 2 * dim + 1 + c) = r_w(c, r);
      at(2 * dim + 1 + r, c) = r_w(r, c);
      at(dim + 1 + r, 2 * dim + 1 + c) =
          (r == c ? t() : LinExpr()) - a_bar(c, r);
      at(2 * dim + 1 + r, dim + 1 + c) =
          (r == c ? t() : LinExpr()) - a_bar(r, c);
      at(2 * dim + 1 + r, 2 * dim + 1 + c) = z_prime(r, c);
    }
    at(dim, 2 * dim + 1 + r) = mu_w_bar(r);
    at(2 * dim + 1 + r, dim) = mu_w_bar(r);
  }
  prog.add_psd(lmi);

  const conic::Solution sol = conic::solve(prog, options_for(solver_tol));

  SdpRecovery rec;
  rec.raw.status = sol.status;
  rec.raw.objective = sol.objective_value;
  rec.raw.a_bar = sol.value(a_bar);
  rec.raw.mu_w_bar = sol.value(mu_w_bar);
  rec.raw.r_w = sol.value(r_w);
  rec.raw.z_prime = SymMatrix(sol.value(z_prime));
  rec.raw.t = sol.value_scalar(t);
  return rec;
}

}  // namespace

AdversaryResponse adversary_best_response(const GaussianClassModel& model,
                                          const ClassifierPolicy& classifier,
                                          double epsilon, double solver_tol,
                                          AdversaryObjective objective) {
  const Eigen::Index dim = model.dim();
  if (classifier.dim() != dim) {
    throw ConstructionError("classifier dimension does not match the model");
  }
  if (classifier.weights.lpNorm<Eigen::Infinity>() == 0.0) {
    throw DegeneratePolicyError("adversary best response needs nonzero weights");
  }
  if (epsilon < 0.0) throw ConstructionError("epsilon must be nonnegative");

  const SdpRecovery rec =
      solve_adversary_sdp(model, classifier, epsilon, solver_tol, objective);

  struct Candidate {
    AdversaryPolicy policy;
    std::string tag;
  };
  std::vector<Candidate> candidates;
  const double t = rec.raw.t;
  if (t > 1e-9) {
    const MatrixXd w_gram = rec.raw.r_w * rec.raw.r_w.transpose();
    AdversaryPolicy scaled;
    scaled.a_matrix = rec.raw.a_bar / t;
    scaled.w_mean = rec.raw.mu_w_bar / t;
    scaled.w_cov = SymMatrix(w_gram / t);
    candidates.push_back({scaled, "sdp/t"});
    scaled.w_cov = SymMatrix(w_gram / (t * t));
    candidates.push_back({scaled, "sdp/t2"});
  }
  candidates.push_back(
      {reduced_adversary_oracle(model, classifier, epsilon).first, "oracle"});
  candidates.push_back({identity_adversary(dim), "identity"});

  AdversaryResponse out;
  out.raw = rec.raw;
  bool found = false;
  for (const Candidate& cand : candidates) {
    if (manipulation_cost(model, cand.policy) > epsilon * (1.0 + 1e-6)) continue;
    const double fn = false_negative_prob(model, cand.policy, classifier);
    if (!found || fn > out.achieved_fn) {
      out.policy = cand.policy;
      out.achieved_fn = fn;
      out.winner = cand.tag;
      found = true;
    }
  }
  return out;
}

std::pair<AdversaryPolicy, double> reduced_adversary_oracle(
    const GaussianClassModel& model, const ClassifierPolicy& classifier,
    double epsilon, int resolution) {
  const Eigen::Index dim = model.dim();
  if (classifier.dim() != dim) {
    throw ConstructionError("classifier dimension does not match the model");
  }
  const VectorXd& a = classifier.weights;
  const double norm2 = a.squaredNorm();
  if (norm2 == 0.0) {
    throw DegeneratePolicyError("oracle search needs nonzero weights");
  }
  if (epsilon < 0.0) throw ConstructionError("epsilon must be nonnegative");
  if (resolution < 1) throw ConstructionError("resolution must be positive");

  const double trace_m =
      model.sigma_pos.trace() + model.mu_pos.squaredNorm();
  const double a_mu = a.dot(model.mu_pos);
  const double a_sig_a = a.dot(model.sigma_pos.mat() * a);
  const double bias = classifier.bias;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // Value is the erf argument of the false-negative rate; monotone in it.
  auto value_at = [&](double scale) -> std::pair<double, double> {
    const double slack = epsilon - (1.0 - scale) * (1.0 - scale) * trace_m;
    if (slack < 0.0) return {kNegInf, 0.0};
    const double shift = -std::sqrt(slack * norm2);
    const double den2 = 2.0 * scale * scale * a_sig_a;
    if (den2 <= 0.0) return {kNegInf, shift};
    return {(-bias - scale * a_mu - shift) / std::sqrt(den2), shift};
  };

  const double lo = std::max(0.0, 1.0 - std::sqrt(epsilon / trace_m));
  double best_value = kNegInf;
  double best_scale = lo;
  for (int i = 0; i <= resolution; ++i) {
    const double scale = lo + (1.0 - lo) * i / resolution;
    const double v = value_at(scale).first;
    if (v > best_value) {
      best_value = v;
      best_scale = scale;
    }
  }
  double step = (1.0 - lo) / resolution;
  while (step > 1e-12) {
    bool moved = false;
    for (const double probe : {best_scale - step, best_scale + step}) {
      const double clamped = std::min(1.0, std::max(lo, probe));
      const double v = value_at(clamped).first;
      if (v > best_value) {
        best_value = v;
        best_scale = clamped;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }

  AdversaryPolicy policy;
  policy.a_matrix = best_scale * MatrixXd::Identity(dim, dim);
  policy.w_mean = value_at(best_scale).second * a / norm2;
  policy.w_cov = SymMatrix::zero(dim);
  return {policy, false_negative_prob(model, policy, classifier)};
}

}  // namespace advsvm
