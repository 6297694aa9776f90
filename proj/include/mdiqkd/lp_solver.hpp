#pragma once

// Dense bounded-variable primal simplex for small linear programs
//
//   min / max  c'x   s.t.  row_lo <= A x <= row_hi,  var_lo <= x <= var_hi
//
// Infinite limits are allowed. Pivoting follows Bland's rule, so a solve is
// deterministic and cannot cycle. The basis is refactorised with a partial
// pivoting LU at every iteration; the problems this is meant for have at most
// a few hundred columns.

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdiqkd::lp {

enum class Sense { minimize, maximize };

enum class Status { optimal, infeasible, unbounded, numerical_breakdown };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_breakdown: return "numerical_breakdown";
  }
  return "unknown";
}

template <class Scalar>
struct LinearProgram {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();

  Sense sense = Sense::minimize;
  Vector objective;
  Matrix rows;  ///< one constraint per row
  Vector row_lo, row_hi;
  Vector var_lo, var_hi;

  LinearProgram() = default;

  /// n variables in [0, 1], zero objective, no constraints.
  explicit LinearProgram(Eigen::Index n)
      : objective(Vector::Zero(n)),
        rows(0, n),
        var_lo(Vector::Zero(n)),
        var_hi(Vector::Ones(n)) {}

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_rows() const { return rows.rows(); }

  template <class Derived>
  Eigen::Index add_constraint(const Eigen::MatrixBase<Derived>& coeffs, Scalar lo, Scalar hi) {
    if (coeffs.size() != num_vars()) throw std::invalid_argument("lp: constraint dimension mismatch");
    const Eigen::Index r = rows.rows();
    rows.conservativeResize(r + 1, Eigen::NoChange);
    rows.row(r) = coeffs.transpose();
    row_lo.conservativeResize(r + 1);
    row_hi.conservativeResize(r + 1);
    row_lo(r) = lo;
    row_hi(r) = hi;
    return r;
  }

  void check() const {
    const Eigen::Index n = num_vars();
    if (rows.cols() != n || var_lo.size() != n || var_hi.size() != n ||
        row_lo.size() != rows.rows() || row_hi.size() != rows.rows()) {
      throw std::invalid_argument("lp: dimension mismatch");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(var_lo(j) <= var_hi(j))) throw std::invalid_argument("lp: variable bounds crossed");
    }
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      if (!(row_lo(i) <= row_hi(i))) throw std::invalid_argument("lp: constraint bounds crossed");
    }
    if (!rows.allFinite() || !objective.allFinite()) throw std::invalid_argument("lp: non-finite coefficient");
  }

  /// Plain-text listing readable by a human or by a short script.
  void dump(std::ostream& os) const {
    const auto old = os.precision(17);
    os << (sense == Sense::minimize ? "minimize" : "maximize") << '\n';
    os << "vars " << num_vars() << " rows " << num_rows() << '\n';
    os << "objective";
    for (Eigen::Index j = 0; j < num_vars(); ++j) os << ' ' << objective(j);
    os << '\n';
    for (Eigen::Index j = 0; j < num_vars(); ++j) {
      os << "bound " << j << ' ' << var_lo(j) << ' ' << var_hi(j) << '\n';
    }
    for (Eigen::Index i = 0; i < num_rows(); ++i) {
      os << "row " << i << ' ' << row_lo(i) << ' ' << row_hi(i);
      for (Eigen::Index j = 0; j < num_vars(); ++j) os << ' ' << rows(i, j);
      os << '\n';
    }
    os.precision(old);
  }
};

template <class Scalar>
struct Result {
  using Vector = typename LinearProgram<Scalar>::Vector;
  Status status = Status::numerical_breakdown;
  Scalar optimum = std::numeric_limits<Scalar>::quiet_NaN();
  Vector x;
  /// Bound on the optimum certified by the final reduced costs (equals the
  /// optimum up to rounding when status is optimal).
  Scalar dual_bound = std::numeric_limits<Scalar>::quiet_NaN();
  /// Largest bound violation of x over rows and variables, in original units.
  Scalar max_violation = Scalar(0);
  int iterations = 0;
  /// Rows whose activity sits at one of its limits at the returned point.
  std::vector<Eigen::Index> active_rows;
};

namespace detail {

template <class Scalar>
class Simplex {
 public:
  using Vector = typename LinearProgram<Scalar>::Vector;
  using Matrix = typename LinearProgram<Scalar>::Matrix;

  Simplex(const Matrix& A, const Vector& lo, const Vector& hi, Scalar tol)
      : m_(A.rows()), tol_(tol) {
    const Eigen::Index n = A.cols();
    cols_ = n + m_;
    M_ = Matrix::Zero(m_, cols_);
    M_.leftCols(n) = A;
    M_.rightCols(m_) = -Matrix::Identity(m_, m_);
    lo_ = lo;
    hi_ = hi;
    value_.resize(cols_);
    basic_pos_.assign(static_cast<std::size_t>(cols_), -1);
  }

  /// Places structurals at a finite bound, makes each row's slack basic when
  /// it can be, and adds an artificial column for the remaining rows.
  void initial_basis(Eigen::Index n_struct) {
    for (Eigen::Index j = 0; j < n_struct; ++j) value_(j) = start_value(j);
    const Vector act = M_.leftCols(n_struct) * value_.head(n_struct);
    basis_.resize(static_cast<std::size_t>(m_));
    std::vector<Eigen::Index> need;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index s = n_struct + i;
      const Scalar a = act(i);
      if (a >= lo_(s) - tol_ && a <= hi_(s) + tol_) {
        set_basic(static_cast<std::size_t>(i), s);
        value_(s) = a;
      } else {
        value_(s) = a < lo_(s) ? lo_(s) : hi_(s);
        need.push_back(i);
      }
    }
    first_art_ = cols_;
    for (Eigen::Index i : need) {
      // act - s + sign * art = 0 with art >= 0
      const Scalar sign = (value_(n_struct + i) - act(i)) >= 0 ? Scalar(1) : Scalar(-1);
      const Eigen::Index c = cols_;
      M_.conservativeResize(Eigen::NoChange, cols_ + 1);
      M_.col(c).setZero();
      M_(i, c) = sign;
      lo_.conservativeResize(cols_ + 1);
      hi_.conservativeResize(cols_ + 1);
      value_.conservativeResize(cols_ + 1);
      lo_(c) = 0;
      hi_(c) = LinearProgram<Scalar>::inf;
      value_(c) = std::abs(value_(n_struct + i) - act(i));
      basic_pos_.push_back(-1);
      ++cols_;
      set_basic(static_cast<std::size_t>(i), c);
    }
  }

  bool has_artificials() const { return first_art_ < cols_; }

  void close_artificials() {
    for (Eigen::Index c = first_art_; c < cols_; ++c) hi_(c) = 0;
  }

  Scalar artificial_sum() const {
    Scalar s = 0;
    for (Eigen::Index c = first_art_; c < cols_; ++c) s += value_(c);
    return s;
  }

  Vector phase1_cost() const {
    Vector c = Vector::Zero(cols_);
    for (Eigen::Index k = first_art_; k < cols_; ++k) c(k) = 1;
    return c;
  }

  Vector extend_cost(const Vector& c_struct) const {
    Vector c = Vector::Zero(cols_);
    c.head(c_struct.size()) = c_struct;
    return c;
  }

  /// Minimises cost'z from the current basis. Returns optimal, unbounded or
  /// numerical_breakdown.
  Status run(const Vector& cost, int& iterations, int max_iterations) {
    while (true) {
      if (iterations >= max_iterations) return Status::numerical_breakdown;
      if (!factorise()) return Status::numerical_breakdown;
      recompute_basics();
      if (!value_.allFinite()) return Status::numerical_breakdown;

      Vector cb(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      const Vector y = m_ ? Vector(lu_.transpose().solve(cb)) : Vector();
      reduced_ = cost - M_.transpose() * y;

      Eigen::Index enter = -1;
      Scalar dir = 0;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (basic_pos_[static_cast<std::size_t>(j)] >= 0 || lo_(j) == hi_(j)) continue;
        const Scalar d = reduced_(j);
        const bool at_lo = value_(j) <= lo_(j);
        const bool at_hi = value_(j) >= hi_(j);
        if (d < -tol_ && !at_hi) {
          enter = j;
          dir = 1;
          break;
        }
        if (d > tol_ && !at_lo) {
          enter = j;
          dir = -1;
          break;
        }
      }
      if (enter < 0) return Status::optimal;

      // Basic values move by -dir * B^{-1} a_enter per unit step.
      const Vector w = m_ ? Vector(lu_.solve(M_.col(enter))) : Vector();
      // Two-pass ratio test: the first pass finds the longest step that keeps
      // every basic within its bounds relaxed by tol, the second picks the
      // largest pivot among rows that block within that step.
      const Scalar span = hi_(enter) - lo_(enter);
      auto room_of = [&](Eigen::Index i, Scalar slack) {
        const Scalar rate = -dir * w(i);
        const Eigen::Index v = basis_[static_cast<std::size_t>(i)];
        if (rate > 0) {
          if (hi_(v) == LinearProgram<Scalar>::inf) return LinearProgram<Scalar>::inf;
          return std::max((hi_(v) + slack - value_(v)) / rate, Scalar(0));
        }
        if (lo_(v) == -LinearProgram<Scalar>::inf) return LinearProgram<Scalar>::inf;
        return std::max((lo_(v) - slack - value_(v)) / rate, Scalar(0));
      };
      Scalar relaxed = span;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (std::abs(w(i)) <= pivot_tol_) continue;
        relaxed = std::min(relaxed, room_of(i, tol_));
      }
      Scalar step = span;
      Eigen::Index leave_pos = -1;  // -1: bound flip of the entering column
      Eigen::Index leave_var = enter;
      if (relaxed < span) {
        Scalar best_pivot = 0;
        for (Eigen::Index i = 0; i < m_; ++i) {
          const Scalar piv = std::abs(w(i));
          if (piv <= pivot_tol_) continue;
          const Scalar room = room_of(i, Scalar(0));
          if (room > relaxed) continue;
          const Eigen::Index v = basis_[static_cast<std::size_t>(i)];
          if (piv > best_pivot || (piv == best_pivot && v < leave_var)) {
            best_pivot = piv;
            step = room;
            leave_pos = i;
            leave_var = v;
          }
        }
      }
      if (step == LinearProgram<Scalar>::inf) return Status::unbounded;

      ++iterations;
      if (leave_pos < 0) {
        value_(enter) = dir > 0 ? hi_(enter) : lo_(enter);
        continue;
      }
      const Eigen::Index v = leave_var;
      const Scalar rate = -dir * w(leave_pos);
      value_(v) = rate > 0 ? hi_(v) : lo_(v);
      basic_pos_[static_cast<std::size_t>(v)] = -1;
      value_(enter) += dir * step;
      set_basic(static_cast<std::size_t>(leave_pos), enter);
    }
  }

  /// Objective bound implied by the last reduced costs and the column bounds.
  Scalar dual_bound(const Vector& cost) const {
    Scalar b = 0;
    for (Eigen::Index j = 0; j < cols_; ++j) {
      const Scalar d = reduced_(j);
      if (basic_pos_[static_cast<std::size_t>(j)] >= 0 || d == 0) continue;
      const Scalar lim = d > 0 ? lo_(j) : hi_(j);
      if (!std::isfinite(lim)) return -LinearProgram<Scalar>::inf;
      b += d * lim;
    }
    (void)cost;
    return b;
  }

  const Vector& values() const { return value_; }

 private:
  Scalar start_value(Eigen::Index j) const {
    if (std::isfinite(lo_(j))) return lo_(j);
    if (std::isfinite(hi_(j))) return hi_(j);
    return 0;
  }

  void set_basic(std::size_t pos, Eigen::Index var) {
    basis_[pos] = var;
    basic_pos_[static_cast<std::size_t>(var)] = static_cast<Eigen::Index>(pos);
  }

  bool factorise() {
    if (m_ == 0) return true;
    Matrix B(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) B.col(i) = M_.col(basis_[static_cast<std::size_t>(i)]);
    lu_.compute(B);
    const Scalar scale = std::max(Scalar(1), B.cwiseAbs().maxCoeff());
    return std::abs(lu_.determinant()) > std::pow(scale * Scalar(1e-12), Scalar(m_)) &&
           lu_.rcond() > Scalar(1e-18);
  }

  void recompute_basics() {
    if (m_ == 0) return;
    Vector rhs = Vector::Zero(m_);
    for (Eigen::Index j = 0; j < cols_; ++j) {
      if (basic_pos_[static_cast<std::size_t>(j)] < 0 && value_(j) != 0) rhs -= M_.col(j) * value_(j);
    }
    const Vector xb = lu_.solve(rhs);
    for (Eigen::Index i = 0; i < m_; ++i) value_(basis_[static_cast<std::size_t>(i)]) = xb(i);
  }

  Eigen::Index m_;
  Eigen::Index cols_;
  Eigen::Index first_art_ = 0;
  Scalar tol_;
  Scalar pivot_tol_ = Scalar(1e-11);
  Matrix M_;
  Vector lo_, hi_, value_, reduced_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> basic_pos_;
  Eigen::PartialPivLU<Matrix> lu_;
};

/// Upper limit on x_j implied by a single row with non-negative coefficients
/// on non-negative variables, or +inf when no row gives one.
template <class Scalar>
Scalar implied_upper(const LinearProgram<Scalar>& lp, Eigen::Index j) {
  Scalar best = lp.var_hi(j);
  for (Eigen::Index i = 0; i < lp.num_rows(); ++i) {
    const Scalar a = lp.rows(i, j);
    if (!(a > 0) || !std::isfinite(lp.row_hi(i))) continue;
    Scalar floor_sum = 0;
    bool usable = true;
    for (Eigen::Index k = 0; k < lp.num_vars() && usable; ++k) {
      if (lp.rows(i, k) < 0 || lp.var_lo(k) < 0) usable = false;
      else if (k != j) floor_sum += lp.rows(i, k) * lp.var_lo(k);
    }
    if (usable) best = std::min(best, (lp.row_hi(i) - floor_sum) / a);
  }
  return best;
}

}  // namespace detail

/// Solves the program. `tol` is the feasibility and optimality tolerance on
/// the internally scaled problem, where every row has unit max norm and every
/// variable's natural range is of order one.
template <class Scalar>
Result<Scalar> solve(const LinearProgram<Scalar>& lp, Scalar tol = Scalar(1e-9),
                     int max_iterations = 50000) {
  using Vector = typename LinearProgram<Scalar>::Vector;
  using Matrix = typename LinearProgram<Scalar>::Matrix;
  lp.check();
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m = lp.num_rows();
  Result<Scalar> res;

  // Column scaling x = s .* x' so that every variable's plausible range is
  // about [0, 1]; then row scaling to unit max norm.
  Vector s(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar u = std::abs(detail::implied_upper(lp, j));
    const Scalar box = std::max(std::abs(lp.var_lo(j)), std::abs(lp.var_hi(j)));
    if (std::isfinite(box)) u = std::min(u, box);
    u = std::max(u, std::abs(lp.var_lo(j)));
    s(j) = (std::isfinite(u) && u > 0) ? u : Scalar(1);
  }
  Matrix A = lp.rows * s.asDiagonal();
  Vector rlo = lp.row_lo, rhi = lp.row_hi;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar norm = A.row(i).cwiseAbs().maxCoeff();
    if (norm > 0) {
      A.row(i) /= norm;
      rlo(i) /= norm;
      rhi(i) /= norm;
    } else if (rlo(i) > tol || rhi(i) < -tol) {
      res.status = Status::infeasible;
      return res;
    } else {
      rlo(i) = std::min(rlo(i), Scalar(0));
      rhi(i) = std::max(rhi(i), Scalar(0));
    }
  }
  Vector lo(n + m), hi(n + m);
  lo.head(n) = lp.var_lo.cwiseQuotient(s);
  hi.head(n) = lp.var_hi.cwiseQuotient(s);
  lo.tail(m) = rlo;
  hi.tail(m) = rhi;

  Vector c = lp.objective.cwiseProduct(s);
  if (lp.sense == Sense::maximize) c = -c;
  const Scalar cscale = c.size() ? c.cwiseAbs().maxCoeff() : Scalar(0);
  if (cscale > 0) c /= cscale;

  detail::Simplex<Scalar> sx(A, lo, hi, tol);
  sx.initial_basis(n);
  if (sx.has_artificials()) {
    const Status st = sx.run(sx.phase1_cost(), res.iterations, max_iterations);
    if (st != Status::optimal) {
      res.status = Status::numerical_breakdown;
      return res;
    }
    if (sx.artificial_sum() > tol * std::max<Scalar>(1, static_cast<Scalar>(m))) {
      res.status = Status::infeasible;
      return res;
    }
    sx.close_artificials();
  }
  const Vector cost = sx.extend_cost(c);
  const Status st = sx.run(cost, res.iterations, max_iterations);
  if (st != Status::optimal) {
    res.status = st;
    return res;
  }

  {
    // Ill-conditioned bases are allowed, so the point is checked against the
    // scaled rows before it is reported.
    const Vector xs = sx.values().head(n);
    const Vector act_s = A * xs;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar viol = std::max({rlo(i) - act_s(i), act_s(i) - rhi(i), Scalar(0)});
      if (viol > Scalar(100) * tol) return res;
    }
  }
  res.status = Status::optimal;
  res.x = sx.values().head(n).cwiseProduct(s);
  for (Eigen::Index j = 0; j < n; ++j) res.x(j) = std::clamp(res.x(j), lp.var_lo(j), lp.var_hi(j));
  res.optimum = lp.objective.dot(res.x);
  Scalar db = sx.dual_bound(cost) * cscale;
  if (lp.sense == Sense::maximize) db = -db;
  res.dual_bound = db;

  const Vector act = lp.rows * res.x;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar norm = std::max(lp.rows.row(i).cwiseAbs().maxCoeff(), std::numeric_limits<Scalar>::min());
    const Scalar viol = std::max({lp.row_lo(i) - act(i), act(i) - lp.row_hi(i), Scalar(0)});
    res.max_violation = std::max(res.max_violation, viol);
    const Scalar band = tol * norm * s.maxCoeff();
    if (std::abs(act(i) - lp.row_lo(i)) <= band || std::abs(act(i) - lp.row_hi(i)) <= band) {
      res.active_rows.push_back(i);
    }
  }
#ifndef NDEBUG
  {
    // Weak duality: the reduced-cost bound never beats the primal optimum.
    const Scalar slack = Scalar(1e-6) * std::max(Scalar(1), std::abs(res.optimum)) + tol * cscale * Scalar(n + m);
    if (lp.sense == Sense::minimize) assert(res.dual_bound <= res.optimum + slack);
    else assert(res.dual_bound >= res.optimum - slack);
  }
#endif
  return res;
}

}  // namespace mdiqkd::lp
