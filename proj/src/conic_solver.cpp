#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "advsvm/conic.hpp"

// Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
// predictor-corrector step. Dense linear algebra throughout; the programs this
// library builds stay small enough that factoring the saddle system each
// iteration is cheap.

namespace advsvm::conic::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSq2 = std::sqrt(2.0);

double inf_norm(const VectorXd& v) {
  return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0;
}

MatrixXd symkron(const MatrixXd& t) {
  const Eigen::Index d = svec_dim(t.rows());
  MatrixXd w(d, d);
  VectorXd e = VectorXd::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    e[k] = 1.0;
    w.col(k) = svec(t * smat(e) * t.transpose());
    e[k] = 0.0;
  }
  return w;
}

MatrixXd eig_pow(const MatrixXd& a, double p) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  const VectorXd w = es.eigenvalues().cwiseMax(1e-300).array().pow(p);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::Index cone_degree(const ConeSpec& cn) {
  switch (cn.kind) {
    case ConeKind::zero: return 0;
    case ConeKind::nonneg: return cn.dim;
    case ConeKind::soc: return 1;
    case ConeKind::psd: return cn.order;
  }
  return 0;
}

VectorXd cone_identity(const ConeSpec& cn) {
  switch (cn.kind) {
    case ConeKind::zero: return VectorXd::Zero(cn.dim);
    case ConeKind::nonneg: return VectorXd::Ones(cn.dim);
    case ConeKind::soc: {
      VectorXd e = VectorXd::Zero(cn.dim);
      e[0] = 1.0;
      return e;
    }
    case ConeKind::psd:
      return svec(MatrixXd::Identity(cn.order, cn.order));
  }
  return VectorXd();
}

bool cone_inside(const ConeSpec& cn, const VectorXd& v) {
  switch (cn.kind) {
    case ConeKind::zero: return true;
    case ConeKind::nonneg: return (v.array() > 0.0).all();
    case ConeKind::soc: return v[0] - v.tail(v.size() - 1).norm() > 0.0;
    case ConeKind::psd: {
      Eigen::LLT<MatrixXd> llt(smat(v));
      return llt.info() == Eigen::Success;
    }
  }
  return false;
}

double cone_step_max(const ConeSpec& cn, const VectorXd& v, const VectorXd& dv) {
  switch (cn.kind) {
    case ConeKind::zero: return kInf;
    case ConeKind::nonneg: {
      double a = kInf;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
      }
      return a;
    }
    case ConeKind::soc: {
      const auto v1 = v.tail(v.size() - 1);
      const auto d1 = dv.tail(dv.size() - 1);
      const double a = dv[0] * dv[0] - d1.squaredNorm();
      const double b = v[0] * dv[0] - v1.dot(d1);
      const double c0 = v[0] * v[0] - v1.squaredNorm();
      double tq = kInf;
      if (std::abs(a) < 1e-14) {
        if (b < -1e-14) tq = -c0 / (2.0 * b);
      } else {
        const double disc = b * b - a * c0;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          for (double t : {(-b + sq) / a, (-b - sq) / a}) {
            if (t > 0.0) tq = std::min(tq, t);
          }
        }
      }
      if (dv[0] < 0.0) tq = std::min(tq, -v[0] / dv[0]);
      return tq;
    }
    case ConeKind::psd: {
      const MatrixXd vm = smat(v);
      const MatrixXd dm = smat(dv);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(vm);
      const VectorXd w = es.eigenvalues();
      const double floor = std::max(std::abs(w[w.size() - 1]), 1.0) * 1e-13;
      const VectorXd rt = w.cwiseMax(floor).cwiseSqrt();
      const MatrixXd li =
          (es.eigenvectors() * rt.cwiseInverse().asDiagonal()).transpose();
      MatrixXd mi = li * dm * li.transpose();
      mi = 0.5 * (mi + mi.transpose()).eval();
      if (!mi.allFinite()) return 0.0;
      const double lo =
          Eigen::SelfAdjointEigenSolver<MatrixXd>(mi, Eigen::EigenvaluesOnly)
              .eigenvalues()[0];
      return lo >= 0.0 ? kInf : -1.0 / lo;
    }
  }
  return kInf;
}

VectorXd cone_nt(const ConeSpec& cn, const VectorXd& s, const VectorXd& z,
                 MatrixXd& w_out, MatrixXd& wi_out) {
  switch (cn.kind) {
    case ConeKind::zero: break;
    case ConeKind::nonneg: {
      const VectorXd w = (s.array() / z.array()).sqrt();
      w_out = w.asDiagonal();
      wi_out = w.cwiseInverse().asDiagonal();
      return (s.array() * z.array()).sqrt();
    }
    case ConeKind::soc: {
      const Eigen::Index d = cn.dim;
      const double ss = std::sqrt(s[0] * s[0] - s.tail(d - 1).squaredNorm());
      const double zz = std::sqrt(z[0] * z[0] - z.tail(d - 1).squaredNorm());
      const VectorXd sb = s / ss;
      VectorXd jzb = z / zz;
      jzb.tail(d - 1) *= -1.0;
      const double gam = std::sqrt((1.0 + sb.dot(z / zz)) / 2.0);
      const VectorXd wb = (sb + jzb) / (2.0 * gam);
      const double eta = std::sqrt(ss / zz);
      const double w0 = wb[0];
      const VectorXd w1 = wb.tail(d - 1);
      MatrixXd v(d, d);
      v(0, 0) = w0;
      v.row(0).tail(d - 1) = w1.transpose();
      v.col(0).tail(d - 1) = w1;
      v.bottomRightCorner(d - 1, d - 1) =
          MatrixXd::Identity(d - 1, d - 1) + w1 * w1.transpose() / (1.0 + w0);
      MatrixXd vi = v;
      vi.row(0).tail(d - 1) = -w1.transpose();
      vi.col(0).tail(d - 1) = -w1;
      w_out = eta * v;
      wi_out = vi / eta;
      return w_out * z;
    }
    case ConeKind::psd: {
      const MatrixXd q = eig_pow(smat(s), 0.5);
      const MatrixXd a0 = q * smat(z) * q;
      const MatrixXd a0is = eig_pow(0.5 * (a0 + a0.transpose()), -0.5);
      const MatrixXd t = q * a0is * q;
      const MatrixXd tsym = 0.5 * (t + t.transpose());
      w_out = symkron(eig_pow(tsym, 0.5));
      wi_out = symkron(eig_pow(tsym, -0.5));
      return w_out * z;
    }
  }
  return VectorXd::Zero(cn.dim);
}

VectorXd cone_prod(const ConeSpec& cn, const VectorXd& u, const VectorXd& v) {
  switch (cn.kind) {
    case ConeKind::zero: return VectorXd::Zero(cn.dim);
    case ConeKind::nonneg: return u.cwiseProduct(v);
    case ConeKind::soc: {
      VectorXd out(cn.dim);
      out[0] = u.dot(v);
      out.tail(cn.dim - 1) =
          u[0] * v.tail(cn.dim - 1) + v[0] * u.tail(cn.dim - 1);
      return out;
    }
    case ConeKind::psd: {
      const MatrixXd um = smat(u);
      const MatrixXd vm = smat(v);
      return svec(0.5 * (um * vm + vm * um));
    }
  }
  return VectorXd();
}

VectorXd cone_lam_div(const ConeSpec& cn, const VectorXd& lam,
                      const VectorXd& d) {
  switch (cn.kind) {
    case ConeKind::zero: return VectorXd::Zero(cn.dim);
    case ConeKind::nonneg: return d.cwiseQuotient(lam);
    case ConeKind::soc: {
      const Eigen::Index nd = cn.dim;
      const auto l1 = lam.tail(nd - 1);
      const auto d1 = d.tail(nd - 1);
      const double a = lam[0] * lam[0] - l1.squaredNorm();
      VectorXd out(nd);
      out[0] = (lam[0] * d[0] - l1.dot(d1)) / a;
      out.tail(nd - 1) = (d1 - out[0] * l1) / lam[0];
      return out;
    }
    case ConeKind::psd: {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(lam));
      const VectorXd w = es.eigenvalues();
      const MatrixXd v = es.eigenvectors();
      const MatrixXd dh = v.transpose() * smat(d) * v;
      MatrixXd u(w.size(), w.size());
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        for (Eigen::Index j = 0; j < w.size(); ++j) {
          u(i, j) = 2.0 * dh(i, j) / (w[i] + w[j]);
        }
      }
      return svec(v * u * v.transpose());
    }
  }
  return VectorXd();
}

}  // namespace

Eigen::Index svec_dim(Eigen::Index p) { return p * (p + 1) / 2; }

Eigen::VectorXd svec(const Eigen::MatrixXd& x) {
  const Eigen::Index p = x.rows();
  VectorXd out(svec_dim(p));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    out[k++] = x(j, j);
    for (Eigen::Index i = j + 1; i < p; ++i) out[k++] = kSq2 * x(i, j);
  }
  return out;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const Eigen::Index p = static_cast<Eigen::Index>(
      std::llround((std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0));
  MatrixXd x = MatrixXd::Zero(p, p);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    x(j, j) = v[k++];
    for (Eigen::Index i = j + 1; i < p; ++i) {
      x(i, j) = x(j, i) = v[k++] / kSq2;
    }
  }
  return x;
}

RawSolution solve_standard_form(const Eigen::VectorXd& c,
                                const Eigen::MatrixXd& G,
                                const Eigen::VectorXd& h,
                                const std::vector<ConeSpec>& cones,
                                double feas_tol, double gap_tol,
                                int max_iters) {
  const Eigen::Index n = c.size();
  const Eigen::Index m = h.size();

  RawSolution best;
  best.x = VectorXd::Zero(n);
  best.s = VectorXd::Zero(m);
  best.z = VectorXd::Zero(m);
  best.pres = kInf;
  best.dres = kInf;
  best.relgap = kInf;

  if (m == 0) {
    best.status = c.norm() == 0.0 ? Status::optimal : Status::unbounded;
    best.pres = best.dres = best.relgap = 0.0;
    return best;
  }

  std::vector<Eigen::Index> offs(cones.size());
  Eigen::Index off = 0;
  Eigen::Index nu = 0;
  for (std::size_t i = 0; i < cones.size(); ++i) {
    offs[i] = off;
    off += cones[i].dim;
    nu += cone_degree(cones[i]);
  }
  if (off != m) throw ConstructionError("cone sizes do not match row count");

  VectorXd x = VectorXd::Zero(n);
  VectorXd s(m);
  for (std::size_t i = 0; i < cones.size(); ++i) {
    s.segment(offs[i], cones[i].dim) = cone_identity(cones[i]);
  }
  VectorXd z = s;
  double tau = 1.0;
  double kap = 1.0;

  const double ftol_in = 1e-3 * feas_tol;
  const double gtol_in = 1e-3 * gap_tol;
  const double hn = h.norm();
  const double cn = c.norm();

  enum class Loop { max_iters, optimal, infeasible, unbounded, stalled };
  Loop state = Loop::max_iters;
  bool has_best = false;
  int stall = 0;
  double mu_prev = kInf;

  std::vector<MatrixXd> wb(cones.size());
  std::vector<MatrixXd> wib(cones.size());

  for (int it = 0; it < max_iters; ++it) {
    const double scale =
        std::max({inf_norm(x), inf_norm(z), inf_norm(s), tau, kap});
    if (!(x.allFinite() && z.allFinite() && s.allFinite() &&
          std::isfinite(tau) && std::isfinite(kap) && tau > 0.0 &&
          scale < 1e100)) {
      state = Loop::stalled;
      break;
    }

    const VectorXd rx = G.transpose() * z + c * tau;
    const VectorXd rz = s + G * x - h * tau;
    const double rt = kap + c.dot(x) + h.dot(z);
    const double mu = (s.dot(z) + tau * kap) / static_cast<double>(nu + 1);

    const double pres = (G * (x / tau) + s / tau - h).norm() / (1.0 + hn);
    const double dres = (G.transpose() * (z / tau) + c).norm() / (1.0 + cn);
    const double pobj = c.dot(x) / tau;
    const double dobj = -h.dot(z) / tau;
    const double gap = std::abs(pobj - dobj) /
                       (1.0 + std::max(std::abs(pobj), std::abs(dobj)));

    if (!has_best || std::max({pres, dres, gap}) <=
                         std::max({best.pres, best.dres, best.relgap})) {
      best.x = x / tau;
      best.z = z / tau;
      best.s = s / tau;
      best.pobj = pobj;
      best.pres = pres;
      best.dres = dres;
      best.relgap = gap;
      best.iters = it;
      has_best = true;
    }
    const bool meets_user =
        best.pres <= feas_tol && best.dres <= feas_tol && best.relgap <= gap_tol;
    if (pres <= ftol_in && dres <= ftol_in && gap <= gtol_in) {
      state = Loop::optimal;
      break;
    }

    // Certificates are cheap, so look for them every iteration.
    const double hz = h.dot(z);
    const double cx = c.dot(x);
    if (hz < -1e-12 &&
        (G.transpose() * (z / -hz)).norm() <= feas_tol * (1.0 + cn)) {
      state = Loop::infeasible;
      break;
    }
    if (cx < -1e-12 &&
        (G * (x / -cx) + s / -cx).norm() <= feas_tol * (1.0 + hn)) {
      state = Loop::unbounded;
      break;
    }
    stall = mu > 0.7 * mu_prev ? stall + 1 : 0;
    mu_prev = mu;
    if (stall >= 4 && meets_user) {
      state = Loop::optimal;
      break;
    }
    if (tau <= 1e-10 * std::max(1.0, kap) || mu <= 1e-15 || stall >= 8) {
      state = Loop::stalled;
      break;
    }

    VectorXd lam = VectorXd::Zero(m);
    for (std::size_t i = 0; i < cones.size(); ++i) {
      if (cones[i].kind == ConeKind::zero) continue;
      lam.segment(offs[i], cones[i].dim) =
          cone_nt(cones[i], s.segment(offs[i], cones[i].dim),
                  z.segment(offs[i], cones[i].dim), wb[i], wib[i]);
    }

    auto w_apply = [&](const VectorXd& v) {
      VectorXd out = VectorXd::Zero(m);
      for (std::size_t i = 0; i < cones.size(); ++i) {
        if (cones[i].kind == ConeKind::zero) continue;
        out.segment(offs[i], cones[i].dim) =
            wb[i] * v.segment(offs[i], cones[i].dim);
      }
      return out;
    };

    MatrixXd K = MatrixXd::Zero(n + m, n + m);
    K.topRightCorner(n, m) = G.transpose();
    K.bottomLeftCorner(m, n) = G;
    for (std::size_t i = 0; i < cones.size(); ++i) {
      auto block = K.block(n + offs[i], n + offs[i], cones[i].dim, cones[i].dim);
      if (cones[i].kind == ConeKind::zero) {
        block.diagonal().setConstant(-1e-12);
      } else {
        block = -(wb[i] * wb[i]);
      }
    }
    const Eigen::PartialPivLU<MatrixXd> lu(K);

    auto saddle_solve = [&](const VectorXd& r1, const VectorXd& r2,
                            VectorXd& out1, VectorXd& out2) {
      VectorXd rhs(n + m);
      rhs << r1, r2;
      VectorXd sol = lu.solve(rhs);
      for (int rr = 0; rr < 2; ++rr) sol += lu.solve(rhs - K * sol);
      out1 = sol.head(n);
      out2 = sol.tail(m);
    };

    VectorXd u2, v2;
    saddle_solve(-c, h, u2, v2);
    const double denom_t = c.dot(u2) + h.dot(v2) - kap / tau;

    struct Dir {
      VectorXd dx, dz, ds;
      double dtau = 0.0, dkap = 0.0;
    };
    auto direction = [&](double eta, const VectorXd& dsv, double dk) {
      VectorXd dtil = VectorXd::Zero(m);
      for (std::size_t i = 0; i < cones.size(); ++i) {
        if (cones[i].kind == ConeKind::zero) continue;
        dtil.segment(offs[i], cones[i].dim) =
            cone_lam_div(cones[i], lam.segment(offs[i], cones[i].dim),
                         dsv.segment(offs[i], cones[i].dim));
      }
      const VectorXd wd = w_apply(dtil);
      VectorXd u1, v1;
      saddle_solve(-eta * rx, -eta * rz - wd, u1, v1);
      Dir d;
      d.dtau = (-eta * rt - c.dot(u1) - h.dot(v1) - dk / tau) / denom_t;
      d.dx = u1 + d.dtau * u2;
      d.dz = v1 + d.dtau * v2;
      d.ds = wd - w_apply(w_apply(d.dz));
      for (std::size_t i = 0; i < cones.size(); ++i) {
        if (cones[i].kind == ConeKind::zero) {
          d.ds.segment(offs[i], cones[i].dim).setZero();
        }
      }
      d.dkap = (dk - kap * d.dtau) / tau;
      return d;
    };

    auto max_step = [&](const Dir& d) {
      double a = kInf;
      for (std::size_t i = 0; i < cones.size(); ++i) {
        if (cones[i].kind == ConeKind::zero) continue;
        a = std::min(a, cone_step_max(cones[i],
                                      s.segment(offs[i], cones[i].dim),
                                      d.ds.segment(offs[i], cones[i].dim)));
        a = std::min(a, cone_step_max(cones[i],
                                      z.segment(offs[i], cones[i].dim),
                                      d.dz.segment(offs[i], cones[i].dim)));
      }
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkap < 0.0) a = std::min(a, -kap / d.dkap);
      return a;
    };

    VectorXd dsv_aff = VectorXd::Zero(m);
    for (std::size_t i = 0; i < cones.size(); ++i) {
      if (cones[i].kind == ConeKind::zero) continue;
      const VectorXd lseg = lam.segment(offs[i], cones[i].dim);
      dsv_aff.segment(offs[i], cones[i].dim) = -cone_prod(cones[i], lseg, lseg);
    }
    const Dir aff = direction(1.0, dsv_aff, -tau * kap);
    const double a_aff = std::min(1.0, max_step(aff));
    const double mu_aff =
        ((s + a_aff * aff.ds).dot(z + a_aff * aff.dz) +
         (tau + a_aff * aff.dtau) * (kap + a_aff * aff.dkap)) /
        static_cast<double>(nu + 1);
    const double sigma =
        std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    VectorXd dsv = VectorXd::Zero(m);
    for (std::size_t i = 0; i < cones.size(); ++i) {
      if (cones[i].kind == ConeKind::zero) continue;
      const Eigen::Index o = offs[i];
      const Eigen::Index d = cones[i].dim;
      const VectorXd lseg = lam.segment(o, d);
      const VectorXd corr = cone_prod(cones[i], wib[i] * aff.ds.segment(o, d),
                                      wb[i] * aff.dz.segment(o, d));
      dsv.segment(o, d) = -cone_prod(cones[i], lseg, lseg) - corr +
                          sigma * mu * cone_identity(cones[i]);
    }
    const double dk = sigma * mu - tau * kap - aff.dtau * aff.dkap;
    const Dir dir = direction(1.0 - sigma, dsv, dk);

    double a = std::min(1.0, 0.99 * max_step(dir));
    for (int bt = 0; bt < 60; ++bt) {
      bool ok = tau + a * dir.dtau > 0.0 && kap + a * dir.dkap > 0.0;
      for (std::size_t i = 0; ok && i < cones.size(); ++i) {
        if (cones[i].kind == ConeKind::zero) continue;
        const Eigen::Index o = offs[i];
        const Eigen::Index d = cones[i].dim;
        ok = cone_inside(cones[i], s.segment(o, d) + a * dir.ds.segment(o, d)) &&
             cone_inside(cones[i], z.segment(o, d) + a * dir.dz.segment(o, d));
      }
      if (ok) break;
      a *= 0.9;
    }
    x += a * dir.dx;
    z += a * dir.dz;
    s += a * dir.ds;
    tau += a * dir.dtau;
    kap += a * dir.dkap;
  }

  switch (state) {
    case Loop::optimal: best.status = Status::optimal; break;
    case Loop::infeasible: best.status = Status::infeasible; break;
    case Loop::unbounded: best.status = Status::unbounded; break;
    case Loop::max_iters:
    case Loop::stalled:
      if (best.pres <= feas_tol && best.dres <= feas_tol &&
          best.relgap <= gap_tol) {
        best.status = Status::optimal;
      } else if (best.pres <= 1e4 * feas_tol && best.dres <= 1e4 * feas_tol &&
                 best.relgap <= 1e4 * gap_tol) {
        best.status = Status::inaccurate;
      } else {
        best.status = Status::failed;
      }
      break;
  }
  return best;
}

}  // namespace advsvm::conic::detail
