/**
 * @file conic.hpp
 * @brief Small dense convex conic solver.
 *
 * Handles problems of the form
 *
 *   maximize  c^T x
 *   s.t.      a_i^T x <= b_i            (affine rows, or equalities)
 *             ||A_j x + b_j|| <= c_j^T x + d_j     (second-order cones)
 *             f_j^T x + g_j <= ln(h_j^T x + k_j)   (log blocks)
 *             lo <= x <= hi
 *
 * via a primal log-barrier path-following method: equalities are eliminated
 * through a null-space reduction, variables and constraint blocks are
 * rescaled (warm-start magnitudes drive the variable scaling), a feasibility
 * phase minimises a shared slack until the iterate is strictly interior, and
 * the main phase follows the central path with damped Newton steps. The
 * subproblems this library emits have at most a few hundred variables, so
 * dense factorisations are the right tool.
 */
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fdcf {

enum class ConicStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit, kNumericalFailure };

inline const char* to_string(ConicStatus s) {
  switch (s) {
    case ConicStatus::kOptimal: return "optimal";
    case ConicStatus::kInfeasible: return "infeasible";
    case ConicStatus::kUnbounded: return "unbounded";
    case ConicStatus::kIterationLimit: return "iteration_limit";
    case ConicStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct AffineRow {
  Eigen::VectorXd a;
  double b = 0.0;
  bool equality = false;  // a^T x == b instead of <=
};

// ||A x + b|| <= c^T x + d
struct SocBlock {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double d = 0.0;
};

// f^T x + g <= ln(h^T x + k)
struct ExpBlock {
  Eigen::VectorXd f;
  double g = 0.0;
  Eigen::VectorXd h;
  double k = 0.0;
};

struct ConicProgram {
  int n = 0;
  Eigen::VectorXd maximize;  // objective coefficients (maximised)
  std::vector<AffineRow> rows;
  std::vector<SocBlock> socs;
  std::vector<ExpBlock> exps;
  Eigen::VectorXd lower;      // size n, -inf allowed
  Eigen::VectorXd upper;      // size n, +inf allowed
  Eigen::VectorXd warm_start; // optional: size 0 or n; drives variable scaling

  static ConicProgram make(int n_vars) {
    ConicProgram p;
    p.n = n_vars;
    p.maximize = Eigen::VectorXd::Zero(n_vars);
    p.lower = Eigen::VectorXd::Constant(n_vars, -std::numeric_limits<double>::infinity());
    p.upper = Eigen::VectorXd::Constant(n_vars, std::numeric_limits<double>::infinity());
    return p;
  }
};

struct SolveStats {
  int newton_steps = 0;
  double gap = std::numeric_limits<double>::infinity();  // objective-scale duality gap estimate
  double max_violation = 0.0;                            // recomputed at the returned point
};

struct ConicSolution {
  ConicStatus status = ConicStatus::kNumericalFailure;
  Eigen::VectorXd x;  // present only when status == kOptimal
  double objective = 0.0;
  SolveStats stats;
};

struct SolverOptions {
  double feas_tol = 1e-7;
  double gap_tol = 1e-7;
  int max_newton_per_phase = 200;
  double t_initial = 1.0;
  double t_factor = 20.0;
};

/// Largest constraint violation of `program` at `x` (0 when feasible).
inline double max_constraint_violation(const ConicProgram& program, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const auto& r : program.rows) {
    double s = r.a.dot(x) - r.b;
    v = std::max(v, r.equality ? std::abs(s) : s);
  }
  for (const auto& s : program.socs) {
    v = std::max(v, (s.A * x + s.b).norm() - (s.c.dot(x) + s.d));
  }
  for (const auto& e : program.exps) {
    double u = e.h.dot(x) + e.k;
    if (u <= 0.0) {
      v = std::max(v, -u + 1.0);
    } else {
      v = std::max(v, e.f.dot(x) + e.g - std::log(u));
    }
  }
  for (int i = 0; i < program.n; ++i) {
    if (std::isfinite(program.lower(i))) v = std::max(v, program.lower(i) - x(i));
    if (std::isfinite(program.upper(i))) v = std::max(v, x(i) - program.upper(i));
  }
  return v;
}

namespace conic_detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Diagnostic trace, enabled by setting FDCF_CONIC_TRACE in the environment.
inline bool trace_enabled() {
  static const bool on = std::getenv("FDCF_CONIC_TRACE") != nullptr;
  return on;
}

// Scaled, equality-free working problem. The feasibility phase appends one
// extra slack variable; `soft` marks which constraints it relaxes.
struct Work {
  int n = 0;
  Eigen::VectorXd obj;
  std::vector<AffineRow> rows;  // inequalities only
  std::vector<SocBlock> socs;
  std::vector<ExpBlock> exps;
  Eigen::VectorXd lo, hi;
  double barrier_order() const {
    double nu = static_cast<double>(rows.size()) + 2.0 * socs.size() + 2.0 * exps.size();
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(lo(i))) nu += 1.0;
      if (std::isfinite(hi(i))) nu += 1.0;
    }
    return nu;
  }
};

struct BarrierEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  bool in_domain = false;
};

inline bool domain_ok(const Work& w, const Eigen::VectorXd& y) {
  for (const auto& r : w.rows) {
    if (!(r.b - r.a.dot(y) > 0.0)) return false;
  }
  for (const auto& s : w.socs) {
    double wd = s.c.dot(y) + s.d;
    if (!(wd > 0.0)) return false;
    double psi = wd * wd - (s.A * y + s.b).squaredNorm();
    if (!(psi > 0.0)) return false;
  }
  for (const auto& e : w.exps) {
    double u = e.h.dot(y) + e.k;
    if (!(u > 0.0)) return false;
    double r = std::log(u) - (e.f.dot(y) + e.g);
    if (!(r > 0.0)) return false;
  }
  for (int i = 0; i < w.n; ++i) {
    if (std::isfinite(w.lo(i)) && !(y(i) - w.lo(i) > 0.0)) return false;
    if (std::isfinite(w.hi(i)) && !(w.hi(i) - y(i) > 0.0)) return false;
  }
  return true;
}

inline double barrier_value(const Work& w, const Eigen::VectorXd& y) {
  double val = 0.0;
  for (const auto& r : w.rows) val -= std::log(r.b - r.a.dot(y));
  for (const auto& s : w.socs) {
    double wd = s.c.dot(y) + s.d;
    val -= std::log(wd * wd - (s.A * y + s.b).squaredNorm());
  }
  for (const auto& e : w.exps) {
    double u = e.h.dot(y) + e.k;
    double r = std::log(u) - (e.f.dot(y) + e.g);
    val -= std::log(r) + std::log(u);
  }
  for (int i = 0; i < w.n; ++i) {
    if (std::isfinite(w.lo(i))) val -= std::log(y(i) - w.lo(i));
    if (std::isfinite(w.hi(i))) val -= std::log(w.hi(i) - y(i));
  }
  return val;
}

inline void barrier_derivatives(const Work& w, const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                                Eigen::MatrixXd& hess) {
  grad.setZero(w.n);
  hess.setZero(w.n, w.n);
  for (const auto& r : w.rows) {
    double s = r.b - r.a.dot(y);
    grad += r.a / s;
    hess += (r.a * r.a.transpose()) / (s * s);
  }
  for (const auto& s : w.socs) {
    Eigen::VectorXd v = s.A * y + s.b;
    double wd = s.c.dot(y) + s.d;
    double psi = wd * wd - v.squaredNorm();
    Eigen::VectorXd dpsi = 2.0 * wd * s.c - 2.0 * s.A.transpose() * v;
    grad -= dpsi / psi;
    hess += (dpsi * dpsi.transpose()) / (psi * psi);
    hess -= (2.0 * (s.c * s.c.transpose()) - 2.0 * (s.A.transpose() * s.A)) / psi;
  }
  for (const auto& e : w.exps) {
    double u = e.h.dot(y) + e.k;
    double r = std::log(u) - (e.f.dot(y) + e.g);
    Eigen::VectorXd dr = e.h / u - e.f;
    grad += -dr / r - e.h / u;
    hess += (dr * dr.transpose()) / (r * r);
    hess += (e.h * e.h.transpose()) * (1.0 / (r * u * u) + 1.0 / (u * u));
  }
  for (int i = 0; i < w.n; ++i) {
    if (std::isfinite(w.lo(i))) {
      double s = y(i) - w.lo(i);
      grad(i) -= 1.0 / s;
      hess(i, i) += 1.0 / (s * s);
    }
    if (std::isfinite(w.hi(i))) {
      double s = w.hi(i) - y(i);
      grad(i) += 1.0 / s;
      hess(i, i) += 1.0 / (s * s);
    }
  }
}

enum class PathStatus { kConverged, kEarlyStop, kUnbounded, kIterationLimit, kLineSearchFailure };

struct PathResult {
  PathStatus status = PathStatus::kIterationLimit;
  Eigen::VectorXd y;
  int newton_steps = 0;
  double gap = kInf;
};

// Follows the central path for  maximize obj^T y  over the Work's barrier.
// `gap_target` is the absolute stopping gap in (scaled) objective units.
// `early_stop`, when provided, is checked after every Newton step.
template <typename EarlyStop>
inline PathResult follow_path(const Work& w, Eigen::VectorXd y, double gap_target, double t0,
                              double t_factor, int max_newton, EarlyStop early_stop) {
  PathResult res;
  const double nu = std::max(w.barrier_order(), 1.0);
  double t = t0;
  Eigen::VectorXd grad(w.n), dir(w.n);
  Eigen::MatrixXd hess(w.n, w.n);
  if (!domain_ok(w, y)) {
    res.status = PathStatus::kLineSearchFailure;
    res.y = y;
    return res;
  }
  while (true) {
    // Center at the current barrier parameter.
    double best_dec2 = kInf;
    int stalled = 0;
    double prev_obj = kInf;
    int frozen = 0;
    for (int inner = 0;; ++inner) {
      if (res.newton_steps >= max_newton) {
        res.status = PathStatus::kIterationLimit;
        res.y = y;
        res.gap = nu / t;
        return res;
      }
      barrier_derivatives(w, y, grad, hess);
      grad -= t * w.obj;
      // Damp each diagonal entry relative to its own magnitude so that soft
      // curvature directions are not flattened by the stiffest ones; keep a
      // small absolute floor for exactly singular modes.
      double floor_reg = 1e-30 * std::max(1.0, hess.diagonal().maxCoeff());
      hess.diagonal() = hess.diagonal() * (1.0 + 1e-14);
      hess.diagonal().array() += floor_reg;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      if (ldlt.info() != Eigen::Success) {
        res.status = PathStatus::kLineSearchFailure;
        res.y = y;
        return res;
      }
      dir = ldlt.solve(-grad);
      double decrement2 = -grad.dot(dir);
      if (!std::isfinite(decrement2)) {
        res.status = PathStatus::kLineSearchFailure;
        res.y = y;
        return res;
      }
      if (decrement2 * 0.5 <= 1e-9) break;  // centered
      // Rounding and near-singular curvature can keep the decrement from
      // reaching the centering threshold even though the iterate has stopped
      // improving. Accept the point as centered once progress is numerically
      // dead: either a stagnant small decrement or a frozen objective.
      if (decrement2 < 0.9 * best_dec2) {
        best_dec2 = decrement2;
        stalled = 0;
      } else if (++stalled >= 5 && decrement2 <= 1e-4) {
        break;
      }
      double cur_obj = w.obj.dot(y);
      if (std::abs(cur_obj - prev_obj) <= 1e-10 * std::max(1.0, std::abs(cur_obj))) {
        if (++frozen >= 10 && decrement2 <= 1e-2) break;
      } else {
        frozen = 0;
      }
      prev_obj = cur_obj;
      // Backstop: a stage that cannot center within a generous step budget but
      // is already inside the damped-Newton basin proceeds to the next stage
      // rather than exhausting the whole budget here.
      if (inner >= 60 && decrement2 <= 0.1) break;
      // Backtracking line search: stay in the barrier domain, then Armijo.
      double f0 = -t * w.obj.dot(y) + barrier_value(w, y);
      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 70; ++ls) {
        Eigen::VectorXd cand = y + step * dir;
        if (domain_ok(w, cand)) {
          double fc = -t * w.obj.dot(cand) + barrier_value(w, cand);
          if (fc <= f0 - 0.25 * step * decrement2) {
            y = cand;
            moved = true;
            break;
          }
        }
        step *= 0.5;
      }
      ++res.newton_steps;
      if (trace_enabled()) {
        std::fprintf(stderr, "    [newton %3d] t=%.3e dec2=%.3e step=%.3e moved=%d obj=%.6e\n",
                     res.newton_steps, t, decrement2, step, moved ? 1 : 0, w.obj.dot(y));
      }
      if (!moved) {
        res.status = PathStatus::kLineSearchFailure;
        res.y = y;
        return res;
      }
      if (y.lpNorm<Eigen::Infinity>() > 1e13) {
        res.status = PathStatus::kUnbounded;
        res.y = y;
        return res;
      }
      if (early_stop(y)) {
        res.status = PathStatus::kEarlyStop;
        res.y = y;
        res.gap = nu / t;
        return res;
      }
    }
    if (nu / t <= gap_target) {
      res.status = PathStatus::kConverged;
      res.y = y;
      res.gap = nu / t;
      return res;
    }
    t *= t_factor;
  }
}

inline Eigen::VectorXd interior_start(const Work& w, const Eigen::VectorXd& hint) {
  Eigen::VectorXd y = hint;
  for (int i = 0; i < w.n; ++i) {
    double lo = w.lo(i), hi = w.hi(i);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      double margin = 1e-6 * (hi - lo);
      y(i) = std::min(std::max(y(i), lo + margin), hi - margin);
    } else if (std::isfinite(lo)) {
      y(i) = std::max(y(i), lo + 1e-6 * (1.0 + std::abs(lo)));
    } else if (std::isfinite(hi)) {
      y(i) = std::min(y(i), hi - 1e-6 * (1.0 + std::abs(hi)));
    }
  }
  return y;
}

// Appends the shared feasibility slack z as variable n: every row gains -z,
// every SOC's affine side gains +z, every log block's left side gains -z.
inline Work soften(const Work& w, double z_hi) {
  Work s;
  s.n = w.n + 1;
  s.obj = Eigen::VectorXd::Zero(s.n);
  s.obj(w.n) = -1.0;  // maximize -z
  s.lo = Eigen::VectorXd::Constant(s.n, -kInf);
  s.hi = Eigen::VectorXd::Constant(s.n, kInf);
  s.lo.head(w.n) = w.lo;
  s.hi.head(w.n) = w.hi;
  s.lo(w.n) = -(z_hi + 10.0);
  s.hi(w.n) = z_hi + 10.0;
  auto extend = [&](const Eigen::VectorXd& v, double zc) {
    Eigen::VectorXd e(s.n);
    e.head(w.n) = v;
    e(w.n) = zc;
    return e;
  };
  for (const auto& r : w.rows) s.rows.push_back({extend(r.a, -1.0), r.b, false});
  for (const auto& sb : w.socs) {
    Eigen::MatrixXd A(sb.A.rows(), s.n);
    A.leftCols(w.n) = sb.A;
    A.col(w.n).setZero();
    s.socs.push_back({A, sb.b, extend(sb.c, 1.0), sb.d});
  }
  for (const auto& e : w.exps) s.exps.push_back({extend(e.f, -1.0), e.g, extend(e.h, 0.0), e.k});
  return s;
}

inline double soft_violation(const Work& w, const Eigen::VectorXd& y) {
  double v = 0.0;
  for (const auto& r : w.rows) v = std::max(v, r.a.dot(y) - r.b);
  for (const auto& s : w.socs) v = std::max(v, (s.A * y + s.b).norm() - (s.c.dot(y) + s.d));
  for (const auto& e : w.exps) {
    double u = e.h.dot(y) + e.k;
    v = std::max(v, e.f.dot(y) + e.g - std::log(std::max(u, 1e-300)));
  }
  return v;
}

}  // namespace conic_detail

/// Solves the program. Deterministic; returns a typed status instead of
/// throwing on infeasible/unbounded/ill-behaved instances.
inline ConicSolution solve(const ConicProgram& program, const SolverOptions& options = {}) {
  using namespace conic_detail;
  ConicSolution sol;
  const int n = program.n;
  if (n <= 0) throw std::invalid_argument("conic solve: program has no variables");

  // --- Equality elimination: x = x0 + Z y ----------------------------------
  std::vector<const AffineRow*> eqs;
  for (const auto& r : program.rows)
    if (r.equality) eqs.push_back(&r);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd z_basis = Eigen::MatrixXd::Identity(n, n);
  if (!eqs.empty()) {
    Eigen::MatrixXd e_mat(eqs.size(), n);
    Eigen::VectorXd e_rhs(eqs.size());
    for (std::size_t i = 0; i < eqs.size(); ++i) {
      e_mat.row(static_cast<Eigen::Index>(i)) = eqs[i]->a.transpose();
      e_rhs(static_cast<Eigen::Index>(i)) = eqs[i]->b;
    }
    x0 = e_mat.colPivHouseholderQr().solve(e_rhs);
    if ((e_mat * x0 - e_rhs).lpNorm<Eigen::Infinity>() >
        1e-9 * (1.0 + e_rhs.lpNorm<Eigen::Infinity>())) {
      sol.status = ConicStatus::kInfeasible;
      return sol;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(e_mat);
    Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() == 1 && kernel.isZero(0.0)) kernel.resize(n, 0);
    if (kernel.cols() == 0) {
      // Unique point; just verify it.
      double viol = max_constraint_violation(program, x0);
      if (viol <= options.feas_tol) {
        sol.status = ConicStatus::kOptimal;
        sol.x = x0;
        sol.objective = program.maximize.dot(x0);
        sol.stats.gap = 0.0;
        sol.stats.max_violation = viol;
      } else {
        sol.status = ConicStatus::kInfeasible;
      }
      return sol;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(kernel);
    z_basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, kernel.cols());
  }
  const int ny = static_cast<int>(z_basis.cols());
  const bool reduced = !eqs.empty();

  // --- Warm start in reduced coordinates -----------------------------------
  Eigen::VectorXd y_warm = Eigen::VectorXd::Zero(ny);
  if (program.warm_start.size() == n) {
    y_warm = z_basis.transpose() * (program.warm_start - x0);
  }

  // --- Variable scaling from the warm start --------------------------------
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(ny);
  for (int i = 0; i < ny; ++i) {
    double m = std::abs(y_warm(i));
    if (m > 1e-300) scale(i) = std::min(std::max(m, 1e-16), 1e16);
  }

  // Map x-space constraint data into scaled reduced coordinates.
  auto reduce_vec = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
    Eigen::VectorXd v = z_basis.transpose() * a;
    return v.cwiseProduct(scale);
  };

  Work w;
  w.n = ny;
  w.lo = Eigen::VectorXd::Constant(ny, -kInf);
  w.hi = Eigen::VectorXd::Constant(ny, kInf);
  if (!reduced) {
    w.lo = (program.lower - x0).cwiseQuotient(scale);
    w.hi = (program.upper - x0).cwiseQuotient(scale);
  } else {
    // Bounds become rows under the null-space map, normalized like any other
    // row so that slack is measured on a common scale.
    auto push_bound_row = [&](const Eigen::VectorXd& a, double b) {
      double rs = std::max({a.lpNorm<Eigen::Infinity>(), std::abs(b), 1e-300});
      w.rows.push_back({a / rs, b / rs, false});
    };
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd ei = Eigen::VectorXd::Unit(n, i);
      if (std::isfinite(program.upper(i))) {
        push_bound_row(reduce_vec(ei), program.upper(i) - x0(i));
      }
      if (std::isfinite(program.lower(i))) {
        push_bound_row(reduce_vec(-ei), x0(i) - program.lower(i));
      }
    }
  }
  for (const auto& r : program.rows) {
    if (r.equality) continue;
    Eigen::VectorXd a = reduce_vec(r.a);
    double b = r.b - r.a.dot(x0);
    double rs = std::max({a.lpNorm<Eigen::Infinity>(), std::abs(b), 1e-300});
    w.rows.push_back({a / rs, b / rs, false});
  }
  for (const auto& s : program.socs) {
    SocBlock sb;
    sb.A.resize(s.A.rows(), ny);
    for (int r = 0; r < s.A.rows(); ++r) sb.A.row(r) = reduce_vec(s.A.row(r).transpose()).transpose();
    sb.b = s.b + s.A * x0;
    sb.c = reduce_vec(s.c);
    sb.d = s.d + s.c.dot(x0);
    double rs = std::max({sb.A.cwiseAbs().maxCoeff(), sb.b.lpNorm<Eigen::Infinity>(),
                          sb.c.lpNorm<Eigen::Infinity>(), std::abs(sb.d), 1e-300});
    sb.A /= rs;
    sb.b /= rs;
    sb.c /= rs;
    sb.d /= rs;
    w.socs.push_back(std::move(sb));
  }
  for (const auto& e : program.exps) {
    ExpBlock eb;
    eb.f = reduce_vec(e.f);
    eb.g = e.g + e.f.dot(x0);
    eb.h = reduce_vec(e.h);
    eb.k = e.k + e.h.dot(x0);
    double us = std::max({eb.h.lpNorm<Eigen::Infinity>(), std::abs(eb.k), 1e-300});
    eb.h /= us;
    eb.k /= us;
    eb.g -= std::log(us);  // s <= ln(u) <=> s - ln(us) <= ln(u / us)
    w.exps.push_back(std::move(eb));
  }
  w.obj = reduce_vec(program.maximize);
  double obj_scale = w.obj.lpNorm<Eigen::Infinity>();
  const bool pure_feasibility = !(obj_scale > 0.0);
  if (!pure_feasibility) w.obj /= obj_scale;
  // Post-scaling objective relates to the original by c^T x = obj_scale * obj^T y + c^T x0.

  Eigen::VectorXd y = interior_start(w, y_warm.cwiseQuotient(scale));

  auto unscale = [&](const Eigen::VectorXd& yy) -> Eigen::VectorXd {
    return x0 + z_basis * yy.cwiseProduct(scale);
  };

  // --- Phase A: get the log arguments positive if they are not -------------
  bool need_phase_a = false;
  for (const auto& e : w.exps) {
    if (!(e.h.dot(y) + e.k > 1e-8)) need_phase_a = true;
  }
  int steps_used = 0;
  if (trace_enabled()) {
    std::fprintf(stderr, "  [conic] n=%d ny=%d rows=%zu socs=%zu exps=%zu phaseA=%d\n", n, ny,
                 w.rows.size(), w.socs.size(), w.exps.size(), need_phase_a ? 1 : 0);
  }
  if (need_phase_a) {
    Work wa;
    wa.n = w.n;
    wa.lo = w.lo;
    wa.hi = w.hi;
    wa.obj = Eigen::VectorXd::Zero(w.n);
    wa.rows = w.rows;
    for (const auto& e : w.exps) wa.rows.push_back({-e.h, e.k - 1e-6, false});
    double z0 = soft_violation(wa, y) * 1.5 + 0.1;
    Work was = soften(wa, z0);
    Eigen::VectorXd ya(was.n);
    ya.head(w.n) = y;
    ya(w.n) = z0;
    auto stop_a = [&](const Eigen::VectorXd& yy) { return yy(w.n) < -1e-3; };
    PathResult ra = follow_path(was, ya, 1e-9, options.t_initial, options.t_factor,
                                options.max_newton_per_phase, stop_a);
    steps_used += ra.newton_steps;
    if (ra.status == PathStatus::kEarlyStop ||
        (ra.status == PathStatus::kConverged && ra.y(w.n) < -1e-9)) {
      y = ra.y.head(w.n);
    } else if (ra.status == PathStatus::kConverged) {
      sol.status = ConicStatus::kInfeasible;
      sol.stats.newton_steps = steps_used;
      return sol;
    } else {
      sol.status = ra.status == PathStatus::kIterationLimit ? ConicStatus::kIterationLimit
                                                            : ConicStatus::kNumericalFailure;
      sol.stats.newton_steps = steps_used;
      return sol;
    }
  }

  // --- Phase B: shared-slack feasibility ------------------------------------
  {
    double z0 = soft_violation(w, y) * 1.5 + 0.01;
    Work ws = soften(w, z0);
    Eigen::VectorXd yb(ws.n);
    yb.head(w.n) = y;
    yb(w.n) = z0;
    auto stop_b = [&](const Eigen::VectorXd& yy) { return yy(w.n) < -1e-3; };
    PathResult rb = follow_path(ws, yb, 1e-9, options.t_initial, options.t_factor,
                                options.max_newton_per_phase, stop_b);
    if (trace_enabled()) {
      std::fprintf(stderr, "  [conic] phase B: status=%d z=%.3e newton=%d\n",
                   static_cast<int>(rb.status), rb.y(w.n), rb.newton_steps);
      Eigen::VectorXd yf = rb.y.head(w.n);
      double z = rb.y(w.n);
      // Constraints whose unsoftened margin is within a factor of the final
      // slack level are the ones pinning z.
      for (std::size_t i = 0; i < w.rows.size(); ++i) {
        double s = w.rows[i].b - w.rows[i].a.dot(yf);
        if (s + z < 10.0 * std::abs(z) + 1e-8)
          std::fprintf(stderr, "    row %zu margin %.3e (binding)\n", i, s);
      }
      for (std::size_t i = 0; i < w.socs.size(); ++i) {
        const auto& s = w.socs[i];
        double m = s.c.dot(yf) + s.d - (s.A * yf + s.b).norm();
        if (m + z < 10.0 * std::abs(z) + 1e-8)
          std::fprintf(stderr, "    soc %zu margin %.3e (binding)\n", i, m);
      }
      for (std::size_t i = 0; i < w.exps.size(); ++i) {
        const auto& e = w.exps[i];
        double u = e.h.dot(yf) + e.k;
        double m = u > 0.0 ? std::log(u) - (e.f.dot(yf) + e.g) : -1.0;
        if (m + z < 10.0 * std::abs(z) + 1e-8)
          std::fprintf(stderr, "    exp %zu margin %.3e (binding)\n", i, m);
      }
    }
    steps_used += rb.newton_steps;
    if (rb.status == PathStatus::kEarlyStop ||
        (rb.status == PathStatus::kConverged && rb.y(w.n) < -1e-9)) {
      y = rb.y.head(w.n);
    } else if (rb.status == PathStatus::kConverged) {
      sol.status = ConicStatus::kInfeasible;
      sol.stats.newton_steps = steps_used;
      return sol;
    } else {
      sol.status = rb.status == PathStatus::kIterationLimit ? ConicStatus::kIterationLimit
                                                            : ConicStatus::kNumericalFailure;
      sol.stats.newton_steps = steps_used;
      return sol;
    }
  }

  if (pure_feasibility) {
    sol.status = ConicStatus::kOptimal;
    sol.x = unscale(y);
    sol.objective = program.maximize.dot(sol.x);
    sol.stats.newton_steps = steps_used;
    sol.stats.gap = 0.0;
    sol.stats.max_violation = max_constraint_violation(program, sol.x);
    return sol;
  }

  // --- Phase C: follow the central path on the true objective --------------
  auto no_stop = [](const Eigen::VectorXd&) { return false; };
  double gap_target = options.gap_tol;  // scaled objective is O(1)
  PathResult rc = follow_path(w, y, gap_target, options.t_initial, options.t_factor,
                              options.max_newton_per_phase, no_stop);
  steps_used += rc.newton_steps;
  sol.stats.newton_steps = steps_used;
  switch (rc.status) {
    case PathStatus::kConverged: {
      sol.status = ConicStatus::kOptimal;
      sol.x = unscale(rc.y);
      sol.objective = program.maximize.dot(sol.x);
      sol.stats.gap = rc.gap * obj_scale;
      sol.stats.max_violation = max_constraint_violation(program, sol.x);
      return sol;
    }
    case PathStatus::kUnbounded:
      sol.status = ConicStatus::kUnbounded;
      return sol;
    case PathStatus::kIterationLimit:
      sol.status = ConicStatus::kIterationLimit;
      return sol;
    default:
      sol.status = ConicStatus::kNumericalFailure;
      return sol;
  }
}

}  // namespace fdcf
