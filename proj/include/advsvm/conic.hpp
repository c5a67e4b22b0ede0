#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "advsvm/errors.hpp"

// Minimal conic modeling layer and an embedded primal-dual interior-point
// solver for programs with linear equalities/inequalities, second-order cone
// constraints, and dense linear matrix inequalities. Sized for desk-scale
// problems (total PSD order up to a couple hundred).

namespace advsvm::conic {

enum class Status { optimal, infeasible, unbounded, inaccurate, failed };
const char* status_name(Status s);

// Affine expression over the variables of one Program.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}

  static LinExpr term(const void* owner, int var, double coeff);

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double k);

  double constant() const { return constant_; }
  const std::map<int, double>& coeffs() const { return coeffs_; }
  const void* owner() const { return owner_; }

  double value_at(const Eigen::VectorXd& x) const;

 private:
  friend class Program;
  std::map<int, double> coeffs_;
  double constant_ = 0.0;
  const void* owner_ = nullptr;  // program the variables belong to
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a);
LinExpr operator*(double k, LinExpr a);
LinExpr operator*(LinExpr a, double k);

enum class BlockShape { scalar, vector, matrix, symmetric };

// Handle to a named variable block. Symmetric blocks are parameterized by
// their lower triangle, so entry (i,j) and (j,i) are the same scalar
// variable and symmetry is exact by construction.
struct VarBlock {
  const void* owner = nullptr;
  std::string name;
  BlockShape shape = BlockShape::scalar;
  int offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  LinExpr operator()(Eigen::Index i = 0, Eigen::Index j = 0) const;
  int flat_index(Eigen::Index i, Eigen::Index j) const;
  int size() const;
};

struct SolveOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-7;
  int max_iters = 200;
};

class Program;

class Solution {
 public:
  Status status = Status::failed;
  double objective_value = 0.0;  // in the sense the program was stated
  double max_primal_residual = 0.0;
  double rel_gap = 0.0;
  int iterations = 0;

  Eigen::MatrixXd value(const VarBlock& b) const;
  double value_scalar(const VarBlock& b) const;

  const Eigen::VectorXd& raw() const { return x_; }

 private:
  friend Solution solve(const Program&, const SolveOptions&);
  Eigen::VectorXd x_;
};

namespace detail {
struct ConeSpec;
}

class Program {
 public:
  Program() = default;
  Program(const Program&) = delete;
  Program& operator=(const Program&) = delete;

  VarBlock scalar(const std::string& name);
  VarBlock vector(const std::string& name, Eigen::Index n);
  VarBlock matrix(const std::string& name, Eigen::Index rows,
                  Eigen::Index cols);
  VarBlock symmetric(const std::string& name, Eigen::Index n);

  void maximize(const LinExpr& objective);
  void minimize(const LinExpr& objective);

  void add_equality(const LinExpr& lhs, const LinExpr& rhs);
  // expr >= 0
  void add_inequality(const LinExpr& expr);
  // stacked[0] >= norm(stacked[1..])
  void add_soc(const std::vector<LinExpr>& stacked);
  // block (square, symmetric as affine expressions) is PSD
  void add_psd(const std::vector<std::vector<LinExpr>>& block);

  int num_vars() const { return num_vars_; }

  // Plain-text sparse triplet dump of the assembled standard form, for
  // cross-checking against external solvers. Format documented in README.
  void dump_triplets(std::ostream& out) const;

 private:
  friend Solution solve(const Program&, const SolveOptions&);

  enum class ConstraintKind { zero, nonneg, soc, psd };
  struct Constraint {
    ConstraintKind kind;
    std::vector<LinExpr> rows;  // PSD rows are already in scaled svec order
    Eigen::Index psd_order = 0;
  };

  void check_owner(const LinExpr& e) const;
  VarBlock add_block(const std::string& name, BlockShape shape,
                     Eigen::Index rows, Eigen::Index cols);
  void assemble(Eigen::VectorXd& c, Eigen::MatrixXd& g, Eigen::VectorXd& h,
                std::vector<detail::ConeSpec>& cones) const;

  std::vector<VarBlock> blocks_;
  std::vector<Constraint> constraints_;
  LinExpr objective_;
  bool maximize_ = true;
  bool has_objective_ = false;
  int num_vars_ = 0;
};

Solution solve(const Program& p, const SolveOptions& opts = {});

namespace detail {

// Standard form consumed by the embedded solver:
//   minimize c'x  subject to  Gx + s = h,  s in K,
// with K a product of the cones listed below, in row order.
enum class ConeKind { zero, nonneg, soc, psd };

struct ConeSpec {
  ConeKind kind;
  Eigen::Index dim;        // rows occupied in the stacked slack vector
  Eigen::Index order = 0;  // matrix order for psd cones (dim = order*(order+1)/2)
};

struct RawSolution {
  Status status = Status::failed;
  Eigen::VectorXd x, s, z;
  double pobj = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  double relgap = 0.0;
  int iters = 0;
};

RawSolution solve_standard_form(const Eigen::VectorXd& c,
                                const Eigen::MatrixXd& G,
                                const Eigen::VectorXd& h,
                                const std::vector<ConeSpec>& cones,
                                double feas_tol, double gap_tol,
                                int max_iters);

Eigen::Index svec_dim(Eigen::Index p);
Eigen::VectorXd svec(const Eigen::MatrixXd& x);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

}  // namespace detail

}  // namespace advsvm::conic
