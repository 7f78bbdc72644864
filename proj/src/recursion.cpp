#include "bhc/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace bhc {

void validate(const TreeParams& p) {
  if (!(p.d > 0.0) || !(p.w > 0.0))
    throw std::invalid_argument("TreeParams: branching numbers must be positive");
  if (!(p.lambda > 0.0) || !(p.alpha > 0.0))
    throw std::invalid_argument("TreeParams: fugacities must be positive");
  if (!(p.delta >= 0.0 && p.delta < 1.0))
    throw std::invalid_argument("TreeParams: delta must be in [0, 1)");
}

namespace {

// alpha (1+x)^-w, the second-level attenuation
double q_of(double x, const TreeParams& p) {
  return std::exp(std::log(p.alpha) - p.w * std::log1p(x));
}

// sign-change bisection; f(lo) and f(hi) must differ in sign (or be 0)
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double flo, const SolverOptions& opt) {
  for (int it = 0; it < opt.max_iter; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo <= opt.x_tol_abs + 0.5 * opt.rel_tol * std::fabs(mid)) return mid;
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double F(double x, const TreeParams& p) {
  return p.lambda * std::exp(-p.d * std::log1p(q_of(x, p)));
}

double dF(double x, const TreeParams& p) {
  double q = q_of(x, p);
  return p.d * p.w * q / ((1.0 + x) * (1.0 + q)) * F(x, p);
}

double T_delta(double x, const TreeParams& p) {
  double xw = std::exp(p.w * std::log1p(x));
  return (1.0 - p.delta) * (x + 1.0) * (p.alpha + xw) -
         p.alpha * p.d * p.w * x;
}

double dT_delta(double x, const TreeParams& p) {
  double xw = std::exp(p.w * std::log1p(x));
  return (1.0 - p.delta) * (1.0 + p.w) * xw -
         p.alpha * (p.d * p.w - (1.0 - p.delta));
}

double M_delta(double x, const TreeParams& p) {
  double lx = std::log1p(x);
  double xw = std::exp(p.w * lx);
  return p.w * lx * (p.alpha * p.d - (1.0 + x) * xw) +
         p.delta * (x + 1.0) * (p.alpha + xw);
}

double lambda_of_x(double x, const TreeParams& p) {
  if (!(x > 0.0)) return 0.0;
  return x * std::exp(p.d * std::log1p(q_of(x, p)));
}

std::vector<double> t_delta_roots(const TreeParams& p,
                                  const SolverOptions& opt) {
  validate(p);
  const double od = 1.0 - p.delta;
  const double num = p.alpha * (p.d * p.w - od);
  const double den = od * (1.0 + p.w);
  // T' > 0 on [0, inf) when the minimizer does not exist; T(0) > 0 then
  if (!(num > 0.0) || num / den < 1.0) return {};
  const double y = std::expm1(std::log(num / den) / p.w);
  const double ty = T_delta(y, p);
  const double scale =
      od * (y + 1.0) * (p.alpha + std::exp(p.w * std::log1p(y))) +
      p.alpha * p.d * p.w * y;
  if (ty > 1e-12 * scale) return {};
  if (std::fabs(ty) <= 1e-12 * scale) return {y};

  auto t = [&](double x) { return T_delta(x, p); };
  // T(0) = (1-delta)(1+alpha) > 0 > T(y)
  double x1 = bisect(t, 0.0, y, T_delta(0.0, p), opt);
  double hi = std::max(2.0 * y + 1.0, 1.0);
  while (T_delta(hi, p) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("t_delta_roots: no upper bracket");
  }
  double x2 = bisect(t, y, hi, ty, opt);
  return {x1, x2};
}

FixpointReport find_fixpoints(const TreeParams& p, const SolverOptions& opt) {
  validate(p);
  TreeParams p0 = p;
  p0.delta = 0.0;
  // sign(lambda'(x)) = sign(T_0(x)); its roots split lambda(x) into
  // increasing / decreasing / increasing pieces
  std::vector<double> turns = t_delta_roots(p0, opt);

  double hi = std::max({1.0, p.lambda, turns.empty() ? 0.0 : 2.0 * turns.back()});
  while (lambda_of_x(hi, p) <= p.lambda) {
    hi *= 2.0;
    if (hi > 1e300)
      throw std::runtime_error("find_fixpoints: no upper bracket for lambda(x)");
  }

  std::vector<double> breaks{0.0};
  for (double t : turns)
    if (t < hi) breaks.push_back(t);
  breaks.push_back(hi);

  auto g = [&](double x) { return lambda_of_x(x, p) - p.lambda; };
  std::vector<double> roots;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    double a = breaks[i], b = breaks[i + 1];
    double ga = g(a), gb = g(b);
    if (ga == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (gb == 0.0) {
      if (i + 2 == breaks.size()) roots.push_back(b);
      continue;
    }
    if ((ga < 0.0) != (gb < 0.0)) roots.push_back(bisect(g, a, b, ga, opt));
  }

  std::sort(roots.begin(), roots.end());
  FixpointReport rep;
  for (double x : roots) {
    if (!rep.fixpoints.empty() &&
        x - rep.fixpoints.back().x <= 1e-8 * (1.0 + x))
      continue;  // tangency: both adjacent pieces found the same root
    rep.fixpoints.push_back({x, dF(x, p)});
  }
  rep.max_fprime = 0.0;
  for (const auto& fp : rep.fixpoints)
    rep.max_fprime = std::max(rep.max_fprime, fp.fprime);
  rep.delta_unique =
      rep.max_fprime - (1.0 - p.delta) <= 1e-10 * (1.0 + rep.max_fprime);
  return rep;
}

double psi(double x) {
  if (!(x > 0.0)) throw std::domain_error("psi: requires x > 0");
  return x / ((x + 1.0) * std::log1p(x));
}

double phi(double x) {
  if (!(x > 0.0)) throw std::domain_error("phi: requires x > 0");
  return 1.0 / ((x + 1.0) * std::log1p(x));
}

double H(double x, const TreeParams& p) {
  if (x < 0.0) throw std::domain_error("H: requires x >= 0");
  if (x == 0.0) return 0.0;
  double fx = F(x, p);
  double q = q_of(x, p);
  return std::log1p(x) / ((1.0 + fx) * std::log1p(fx)) * p.d * p.w * q /
         (1.0 + q) * fx;
}

double U(double z, double lambda, double d, double alpha) {
  if (!(lambda > 0.0) || !(d > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("U: parameters must be positive");
  if (z < 1.0 || z > 1.0 + alpha) throw std::domain_error("U: z outside [1, 1+alpha]");
  double zm1 = z - 1.0;
  if (zm1 < 1e-300) return 0.0;
  if (zm1 >= alpha) return 0.0;
  double t = std::exp(std::log(lambda) - d * std::log(z));
  return t / ((1.0 + t) * std::log1p(t)) * d * (zm1 / z) *
         std::log(alpha / zm1);
}

ContractionSup contraction_sup(double lambda, double d, double alpha) {
  const int grid = 2000;
  double best = 0.0, zbest = 1.0;
  for (int i = 0; i <= grid; ++i) {
    double z = 1.0 + alpha * i / grid;
    double u = U(z, lambda, d, alpha);
    if (u > best) {
      best = u;
      zbest = z;
    }
  }
  double lo = std::max(1.0, zbest - alpha / grid);
  double hi = std::min(1.0 + alpha, zbest + alpha / grid);
  // golden-section to 1e-12 interval width on the best grid bracket
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), e = a + gr * (b - a);
  double fc = U(c, lambda, d, alpha), fe = U(e, lambda, d, alpha);
  while (b - a > 1e-12) {
    if (fc >= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - gr * (b - a);
      fc = U(c, lambda, d, alpha);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + gr * (b - a);
      fe = U(e, lambda, d, alpha);
    }
  }
  double zm = 0.5 * (a + b);
  double um = U(zm, lambda, d, alpha);
  if (um < best) {
    um = best;
    zm = zbest;
  }
  return {um, zm};
}

}  // namespace bhc
