#include "bhc/uniqueness.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bhc {

namespace {

double log_A(double d, double w, double delta) {
  const double od = 1.0 - delta;
  return std::log(od) + w * std::log(d) + (w + 1.0) * std::log(w + 1.0) -
         (w + 1.0) * std::log(d * w - od);
}

double branch_bound(double d, double delta) {
  const double od = 1.0 - delta;
  return od / d * std::exp(1.0 + od / d);
}

// larger T_delta root; falls back to the minimizer y when the two roots
// have numerically merged (w at or just above w_delta)
double x2_or_y(const TreeParams& p, const SolverOptions& opt) {
  auto roots = t_delta_roots(p, opt);
  if (!roots.empty()) return roots.back();
  const double od = 1.0 - p.delta;
  // w at or a rounding error above w_delta: the double root sits at the
  // minimizer y; clamp the (>= 1 in exact arithmetic) argument
  const double u =
      std::max(1.0, p.alpha * (p.d * p.w - od) / (od * (1.0 + p.w)));
  return std::expm1(std::log(u) / p.w);
}

// sign of M_delta with the common factor (1+x)^w divided out; immune to the
// overflow of (1+x)^{w+1} at the huge x probed while bracketing
double m_delta_scaled(double x, const TreeParams& p) {
  double lx = std::log1p(x);
  double q = std::exp(-p.w * lx);  // (1+x)^-w, may underflow to 0
  return p.w * lx * (p.alpha * p.d * q - (1.0 + x)) +
         p.delta * (x + 1.0) * (p.alpha * q + 1.0);
}

// unique positive root of M_delta for delta > 0: M(0+) = (alpha+1) delta > 0
// and M is eventually negative (strict concavity gives a single crossing).
// Returns +inf when the root lies beyond the floating range (tiny w with
// delta near 1), which callers treat as "larger than any T-root".
double x_m_root(const TreeParams& p, const SolverOptions& opt) {
  auto m = [&](double x) { return m_delta_scaled(x, p); };
  double lo = 1e-12;
  double mlo = m(lo);
  if (mlo <= 0.0)
    throw std::runtime_error("solve_critical_system: M_delta(0+) not positive");
  double hi = 1.0;
  while (m(hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e250) return INFINITY;
  }
  for (int it = 0; it < opt.max_iter; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo <= opt.x_tol_abs + 0.5 * opt.rel_tol * std::fabs(mid)) return mid;
    if (m(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double scaled_t_residual(double x, const TreeParams& p) {
  double xw = std::exp(p.w * std::log1p(x));
  double a = (1.0 - p.delta) * (x + 1.0) * (p.alpha + xw);
  double b = p.alpha * p.d * p.w * x;
  return std::fabs(a - b) / (1.0 + std::fabs(a) + std::fabs(b));
}

double scaled_m_residual(double x, const TreeParams& p) {
  double lx = std::log1p(x);
  double xw = std::exp(p.w * lx);
  double a = p.w * lx * (p.alpha * p.d - (1.0 + x) * xw);
  double b = p.delta * (x + 1.0) * (p.alpha + xw);
  return std::fabs(a + b) / (1.0 + std::fabs(a) + std::fabs(b));
}

}  // namespace

double A(double d, double w, double delta) {
  if (!(d > 0.0) || !(w > 0.0))
    throw std::invalid_argument("A: d, w must be positive");
  if (!(d * w > 1.0 - delta))
    throw std::invalid_argument("A: requires d w > 1 - delta");
  return std::exp(log_A(d, w, delta));
}

double lambda_hat(double d, double w) { return A(d, w, 0.0); }

std::pair<double, double> closed_form_pair(double d, double w) {
  if (!(d >= 1.0) || !(d * w > 1.0))
    throw std::invalid_argument("closed_form_pair: requires d >= 1 and dw > 1");
  return {lambda_hat(w, d), lambda_hat(d, w)};
}

double solve_w_delta(double d, double alpha, double delta,
                     const SolverOptions& opt) {
  if (!(alpha > branch_bound(d, delta)))
    throw std::invalid_argument(
        "solve_w_delta: alpha below the branch bound; every lambda is "
        "delta-unique");
  const double od = 1.0 - delta;
  const double target = std::log(alpha);
  // A is strictly decreasing in w on dw > 1-delta, from +inf down to the
  // branch bound; bracket and bisect on log A
  double lo = od / d * (1.0 + 1e-12);
  while (log_A(d, lo, delta) <= target) {
    lo = od / d + 0.5 * (lo - od / d);  // walk toward the pole
    if (lo - od / d < 1e-300)
      throw std::runtime_error("solve_w_delta: no lower bracket");
  }
  double hi = std::max(1.0, 2.0 * od / d);
  while (log_A(d, hi, delta) >= target) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("solve_w_delta: no upper bracket");
  }
  for (int it = 0; it < opt.max_iter; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo <= opt.x_tol_abs + 0.5 * opt.rel_tol * std::fabs(mid)) break;
    if (log_A(d, mid, delta) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ThresholdReport solve_critical_system(double d, double alpha, double delta,
                                      const SolverOptions& opt) {
  if (!(d > 0.0) || !(alpha > 0.0) || !(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("solve_critical_system: bad parameters");
  ThresholdReport rep;
  rep.d = d;
  rep.alpha = alpha;
  rep.delta = delta;
  rep.branch_bound = branch_bound(d, delta);
  if (alpha <= rep.branch_bound) {
    rep.always_unique = true;
    rep.lambda_2c = 0.0;
    return rep;
  }
  rep.w_delta = solve_w_delta(d, alpha, delta, opt);

  TreeParams p;
  p.d = d;
  p.alpha = alpha;
  p.delta = delta;
  p.lambda = 1.0;  // unused by T/M

  if (delta == 0.0) {
    // M_0 = 0 forces (1+x)^{w+1} = alpha d; combined with T_0 = 0 the
    // crossing sits exactly at w_delta with x = (d+1)/(dw-1)
    rep.w_c = rep.w_delta;
    rep.x_c = (d + 1.0) / (d * rep.w_c - 1.0);
  } else {
    auto gap = [&](double w) {
      TreeParams pw = p;
      pw.w = w;
      return x2_or_y(pw, opt) - x_m_root(pw, opt);
    };
    // x2 < x_M at w_delta and a single sign change at w_c
    double lo = rep.w_delta * (1.0 + 1e-9);
    double glo = gap(lo);
    if (glo >= 0.0) {
      rep.w_c = lo;
    } else {
      double hi = rep.w_delta + std::max(1.0, rep.w_delta);
      while (gap(hi) <= 0.0) {
        hi = rep.w_delta + 2.0 * (hi - rep.w_delta);
        if (hi > 1e9)
          throw std::runtime_error(
              "solve_critical_system: no crossing of x2 and x_M below w = 1e9 "
              "(d=" + std::to_string(d) + ", alpha=" + std::to_string(alpha) +
              ", delta=" + std::to_string(delta) + ")");
      }
      for (int it = 0; it < opt.max_iter; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hi - lo <= opt.x_tol_abs + 0.5 * opt.rel_tol * std::fabs(mid)) break;
        if (gap(mid) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      rep.w_c = 0.5 * (lo + hi);
    }
    TreeParams pc = p;
    pc.w = rep.w_c;
    rep.x_c = 0.5 * (x2_or_y(pc, opt) + x_m_root(pc, opt));
  }

  TreeParams pc = p;
  pc.w = rep.w_c;
  rep.lambda_2c = lambda_of_x(rep.x_c, pc);
  rep.t_residual = scaled_t_residual(rep.x_c, pc);
  rep.m_residual = scaled_m_residual(rep.x_c, pc);
  return rep;
}

bool is_delta_unique_tuple(double lambda, double d, double alpha, double w,
                           double delta) {
  TreeParams p;
  p.lambda = lambda;
  p.d = d;
  p.alpha = alpha;
  p.w = w;
  p.delta = delta;
  return find_fixpoints(p).delta_unique;
}

bool is_delta_unique(double lambda, double d, double alpha, double delta) {
  if (!(lambda > 0.0)) throw std::invalid_argument("is_delta_unique: lambda <= 0");
  if (!(d >= 1.0 - delta))
    throw std::invalid_argument("is_delta_unique: requires d >= 1 - delta");
  ThresholdReport rep = solve_critical_system(d, alpha, delta);
  if (rep.always_unique) return true;
  return lambda >= rep.lambda_2c - 1e-12 * (1.0 + rep.lambda_2c);
}

bool is_delta_unique_pair(double lambda, double d, double delta) {
  return is_delta_unique(lambda, d, lambda, delta);
}

double certify_delta_pair(double lambda, double d) {
  if (!(d >= 1.0))
    throw std::invalid_argument("certify_delta_pair: requires d >= 1");
  if (!is_delta_unique_pair(lambda, d, 0.0)) return 0.0;
  double lo = 0.0, hi = 1.0 - 1e-12;
  if (is_delta_unique_pair(lambda, d, hi)) return hi;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (is_delta_unique_pair(lambda, d, mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double low_temp_threshold(double d, double w) {
  auto [lc, ac] = closed_form_pair(d, w);
  (void)lc;
  return 3.0 * (d + 1.0) * (w + 1.0) * ac - 1.0;
}

std::vector<PhaseRow> phase_table(double d, const std::vector<double>& w_grid) {
  std::vector<PhaseRow> rows;
  rows.reserve(w_grid.size());
  for (double w : w_grid) {
    auto [lc, ac] = closed_form_pair(d, w);
    rows.push_back({w, ac, lc, 3.0 * (d + 1.0) * (w + 1.0) * ac - 1.0});
  }
  return rows;
}

std::string phase_table_csv(const std::vector<PhaseRow>& rows) {
  std::string out = "w,alpha_c,lambda_c,lambda_low\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", r.w, r.alpha_c,
                  r.lambda_c, r.lambda_low);
    out += buf;
  }
  return out;
}

}  // namespace bhc
