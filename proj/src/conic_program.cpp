#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "advsvm/conic.hpp"
#include "advsvm/numerics.hpp"

namespace advsvm::conic {

const char* status_name(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::inaccurate: return "inaccurate";
    case Status::failed: return "failed";
  }
  return "failed";
}

LinExpr LinExpr::term(const void* owner, int var, double coeff) {
  LinExpr e;
  e.owner_ = owner;
  if (coeff != 0.0) e.coeffs_[var] = coeff;
  return e;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  if (owner_ == nullptr) owner_ = o.owner_;
  else if (o.owner_ != nullptr && o.owner_ != owner_) {
    throw ConstructionError("mixing variables from different programs");
  }
  constant_ += o.constant_;
  for (const auto& [k, v] : o.coeffs_) {
    const double nv = (coeffs_[k] += v);
    if (nv == 0.0) coeffs_.erase(k);
  }
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) { return *this += -1.0 * o; }

LinExpr& LinExpr::operator*=(double k) {
  constant_ *= k;
  if (k == 0.0) {
    coeffs_.clear();
  } else {
    for (auto& [_, v] : coeffs_) v *= k;
  }
  return *this;
}

double LinExpr::value_at(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (const auto& [k, c] : coeffs_) v += c * x[k];
  return v;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator-(LinExpr a) { return a *= -1.0; }
LinExpr operator*(double k, LinExpr a) { return a *= k; }
LinExpr operator*(LinExpr a, double k) { return a *= k; }

int VarBlock::flat_index(Eigen::Index i, Eigen::Index j) const {
  if (i < 0 || i >= rows || j < 0 || j >= cols) {
    throw ConstructionError("variable index out of range in block " + name);
  }
  if (shape == BlockShape::symmetric) {
    if (i < j) std::swap(i, j);  // lower triangle holds the variables
    return offset + static_cast<int>(j * rows - j * (j + 1) / 2 + i);
  }
  return offset + static_cast<int>(j * rows + i);
}

int VarBlock::size() const {
  if (shape == BlockShape::symmetric) {
    return static_cast<int>(rows * (rows + 1) / 2);
  }
  return static_cast<int>(rows * cols);
}

LinExpr VarBlock::operator()(Eigen::Index i, Eigen::Index j) const {
  return LinExpr::term(owner, flat_index(i, j), 1.0);
}

VarBlock Program::add_block(const std::string& name, BlockShape shape,
                            Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) {
    throw ConstructionError("variable block " + name + " has empty shape");
  }
  VarBlock b;
  b.owner = this;
  b.name = name;
  b.shape = shape;
  b.offset = num_vars_;
  b.rows = rows;
  b.cols = cols;
  num_vars_ += b.size();
  blocks_.push_back(b);
  return b;
}

VarBlock Program::scalar(const std::string& name) {
  return add_block(name, BlockShape::scalar, 1, 1);
}

VarBlock Program::vector(const std::string& name, Eigen::Index n) {
  return add_block(name, BlockShape::vector, n, 1);
}

VarBlock Program::matrix(const std::string& name, Eigen::Index rows,
                         Eigen::Index cols) {
  return add_block(name, BlockShape::matrix, rows, cols);
}

VarBlock Program::symmetric(const std::string& name, Eigen::Index n) {
  return add_block(name, BlockShape::symmetric, n, n);
}

void Program::check_owner(const LinExpr& e) const {
  if (e.owner() != nullptr && e.owner() != this) {
    throw ConstructionError("expression uses variables of another program");
  }
}

void Program::maximize(const LinExpr& objective) {
  check_owner(objective);
  objective_ = objective;
  maximize_ = true;
  has_objective_ = true;
}

void Program::minimize(const LinExpr& objective) {
  check_owner(objective);
  objective_ = objective;
  maximize_ = false;
  has_objective_ = true;
}

void Program::add_equality(const LinExpr& lhs, const LinExpr& rhs) {
  check_owner(lhs);
  check_owner(rhs);
  constraints_.push_back({ConstraintKind::zero, {lhs - rhs}, 0});
}

void Program::add_inequality(const LinExpr& expr) {
  check_owner(expr);
  constraints_.push_back({ConstraintKind::nonneg, {expr}, 0});
}

void Program::add_soc(const std::vector<LinExpr>& stacked) {
  if (stacked.size() < 2) {
    throw ConstructionError("second-order cone needs a head and a tail");
  }
  for (const auto& e : stacked) check_owner(e);
  constraints_.push_back({ConstraintKind::soc, stacked, 0});
}

void Program::add_psd(const std::vector<std::vector<LinExpr>>& block) {
  const Eigen::Index p = static_cast<Eigen::Index>(block.size());
  if (p < 1) throw ConstructionError("empty PSD block");
  for (const auto& row : block) {
    if (static_cast<Eigen::Index>(row.size()) != p) {
      throw ConstructionError("PSD block is not square");
    }
  }

  auto expr_scale = [](const LinExpr& e) {
    double s = std::abs(e.constant());
    for (const auto& [_, v] : e.coeffs()) s = std::max(s, std::abs(v));
    return s;
  };
  auto check_sym = [&](const LinExpr& a, const LinExpr& b) {
    const LinExpr d = a - b;
    const double tol = 1e-12 * std::max(1.0, std::max(expr_scale(a), expr_scale(b)));
    if (std::abs(d.constant()) > tol) return false;
    for (const auto& [_, v] : d.coeffs()) {
      if (std::abs(v) > tol) return false;
    }
    return true;
  };

  const double sq2 = std::sqrt(2.0);
  std::vector<LinExpr> rows;
  rows.reserve(static_cast<std::size_t>(p * (p + 1) / 2));
  for (Eigen::Index j = 0; j < p; ++j) {
    check_owner(block[j][j]);
    rows.push_back(block[j][j]);
    for (Eigen::Index i = j + 1; i < p; ++i) {
      check_owner(block[i][j]);
      check_owner(block[j][i]);
      if (!check_sym(block[i][j], block[j][i])) {
        throw ConstructionError("PSD block is not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) +
                                ")");
      }
      rows.push_back(sq2 * 0.5 * (block[i][j] + block[j][i]));
    }
  }
  constraints_.push_back({ConstraintKind::psd, std::move(rows), p});
}

void Program::assemble(Eigen::VectorXd& c, Eigen::MatrixXd& g,
                       Eigen::VectorXd& h,
                       std::vector<detail::ConeSpec>& cones) const {
  Eigen::Index m = 0;
  for (const auto& con : constraints_) {
    m += static_cast<Eigen::Index>(con.rows.size());
  }
  c = Eigen::VectorXd::Zero(num_vars_);
  if (has_objective_) {
    const double sense = maximize_ ? -1.0 : 1.0;
    for (const auto& [k, v] : objective_.coeffs()) c[k] = sense * v;
  }
  g = Eigen::MatrixXd::Zero(m, num_vars_);
  h = Eigen::VectorXd::Zero(m);
  cones.clear();
  Eigen::Index r = 0;
  for (const auto& con : constraints_) {
    const Eigen::Index base = r;
    for (const auto& e : con.rows) {
      h[r] = e.constant();
      for (const auto& [k, v] : e.coeffs()) g(r, k) = -v;
      ++r;
    }
    detail::ConeSpec spec;
    switch (con.kind) {
      case ConstraintKind::zero: spec.kind = detail::ConeKind::zero; break;
      case ConstraintKind::nonneg: spec.kind = detail::ConeKind::nonneg; break;
      case ConstraintKind::soc: spec.kind = detail::ConeKind::soc; break;
      case ConstraintKind::psd: spec.kind = detail::ConeKind::psd; break;
    }
    spec.dim = r - base;
    spec.order = con.psd_order;
    cones.push_back(spec);
  }
}

void Program::dump_triplets(std::ostream& out) const {
  Eigen::VectorXd c, h;
  Eigen::MatrixXd g;
  std::vector<detail::ConeSpec> cones;
  assemble(c, g, h, cones);

  const auto flags = out.flags();
  out.precision(17);
  out << "conic-triplet v1\n";
  out << "vars " << num_vars_ << "\n";
  for (const auto& b : blocks_) {
    const char* shape = b.shape == BlockShape::scalar     ? "scalar"
                        : b.shape == BlockShape::vector   ? "vector"
                        : b.shape == BlockShape::matrix   ? "matrix"
                                                          : "symmetric";
    out << "block " << b.name << " " << shape << " " << b.rows << " "
        << b.cols << " " << b.offset << "\n";
  }
  out << "objective "
      << (!has_objective_ ? "none" : (maximize_ ? "maximize" : "minimize"))
      << " constant " << objective_.constant() << "\n";
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (c[k] != 0.0) out << "c " << k << " " << c[k] << "\n";
  }
  for (const auto& spec : cones) {
    const char* kind = spec.kind == detail::ConeKind::zero     ? "zero"
                       : spec.kind == detail::ConeKind::nonneg ? "nonneg"
                       : spec.kind == detail::ConeKind::soc    ? "soc"
                                                               : "psd";
    out << "cone " << kind << " " << spec.dim << " " << spec.order << "\n";
  }
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      if (g(r, k) != 0.0) out << "G " << r << " " << k << " " << g(r, k) << "\n";
    }
  }
  for (Eigen::Index r = 0; r < h.size(); ++r) {
    if (h[r] != 0.0) out << "h " << r << " " << h[r] << "\n";
  }
  out.flags(flags);
}

Eigen::MatrixXd Solution::value(const VarBlock& b) const {
  Eigen::MatrixXd out(b.rows, b.cols);
  for (Eigen::Index j = 0; j < b.cols; ++j) {
    for (Eigen::Index i = 0; i < b.rows; ++i) {
      out(i, j) = x_[b.flat_index(i, j)];
    }
  }
  return out;
}

double Solution::value_scalar(const VarBlock& b) const {
  return x_[b.flat_index(0, 0)];
}

Solution solve(const Program& p, const SolveOptions& opts) {
  Eigen::VectorXd c, h;
  Eigen::MatrixXd g;
  std::vector<detail::ConeSpec> cones;
  p.assemble(c, g, h, cones);

  const detail::RawSolution raw = detail::solve_standard_form(
      c, g, h, cones, opts.feas_tol, opts.gap_tol, opts.max_iters);

  Solution sol;
  sol.status = raw.status;
  sol.iterations = raw.iters;
  sol.x_ = raw.x;

  if (raw.status == Status::infeasible || raw.status == Status::unbounded) {
    sol.objective_value = std::numeric_limits<double>::quiet_NaN();
    sol.max_primal_residual = raw.pres;
    sol.rel_gap = raw.relgap;
    return sol;
  }

  sol.objective_value = p.objective_.value_at(raw.x);

  // Residuals recomputed from the returned point against the constraints as
  // stated, not read back from solver internals.
  double worst = 0.0;
  for (const auto& con : p.constraints_) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(con.rows.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v[i] = con.rows[static_cast<std::size_t>(i)].value_at(raw.x);
    }
    double viol = 0.0;
    switch (con.kind) {
      case Program::ConstraintKind::zero:
        viol = v.cwiseAbs().maxCoeff();
        break;
      case Program::ConstraintKind::nonneg:
        viol = std::max(0.0, -v.minCoeff());
        break;
      case Program::ConstraintKind::soc:
        viol = std::max(0.0, v.tail(v.size() - 1).norm() - v[0]);
        break;
      case Program::ConstraintKind::psd:
        viol = std::max(0.0, -min_eigenvalue(SymMatrix(detail::smat(v))));
        break;
    }
    worst = std::max(worst, viol);
  }
  sol.max_primal_residual = worst / (1.0 + h.norm());

  const double pobj = c.dot(raw.x);
  const double dobj = -h.dot(raw.z);
  sol.rel_gap =
      std::abs(pobj - dobj) / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));

  if (sol.status == Status::optimal &&
      (sol.max_primal_residual > opts.feas_tol || sol.rel_gap > opts.gap_tol)) {
    sol.status = Status::inaccurate;
  }
  return sol;
}

}  // namespace advsvm::conic
