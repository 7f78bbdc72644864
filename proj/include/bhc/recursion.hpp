#pragma once

#include <vector>

namespace bhc {

// Parameters of the two-level tree recursion. d and w are real branching
// numbers (d = Delta - 1 on the bounded side, w fractional on the other),
// lambda/alpha the fugacities, delta the uniqueness gap.
struct TreeParams {
  double d = 1.0;
  double w = 1.0;
  double lambda = 1.0;
  double alpha = 1.0;
  double delta = 0.0;
};

void validate(const TreeParams& p);

struct SolverOptions {
  double x_tol_abs = 1e-12;   // absolute bracket width
  double rel_tol = 1e-10;     // relative residual / bracket tolerance
  int max_iter = 200;
};

// F(x) = lambda (1 + alpha (1+x)^-w)^-d, increasing, bounded by lambda
double F(double x, const TreeParams& p);

// F'(x) = alpha d w (x+1)^{-w-1} (1 + alpha (x+1)^{-w})^{-1} F(x)
double dF(double x, const TreeParams& p);

// T_delta(x) = (1-delta)(x+1)(alpha + (1+x)^w) - alpha d w x.
// At a fixpoint, F'(x) <= 1-delta iff T_delta(x) >= 0.
double T_delta(double x, const TreeParams& p);

// T_delta'(x) = (1-delta)(1+w)(1+x)^w - alpha (d w - (1-delta))
double dT_delta(double x, const TreeParams& p);

// M_delta(x) = w log(1+x)(alpha d - (1+x)^{w+1}) + delta(x+1)(alpha + (x+1)^w)
double M_delta(double x, const TreeParams& p);

// lambda(x) = x (1 + alpha (1+x)^-w)^d, the unique lambda making x a fixpoint
double lambda_of_x(double x, const TreeParams& p);

// Positive roots of T_delta(x) = 0, ascending: zero, one or two of them.
// Uses the strict convexity of T_delta: the minimizer
// y = (alpha (dw - (1-delta)) / ((1-delta)(1+w)))^{1/w} - 1 decides the count.
std::vector<double> t_delta_roots(const TreeParams& p,
                                  const SolverOptions& opt = {});

struct FixpointInfo {
  double x;        // fixpoint, |F(x)-x| <= 1e-10 (1+x)
  double fprime;   // F'(x)
};

struct FixpointReport {
  std::vector<FixpointInfo> fixpoints;  // ascending, 1..3 entries
  double max_fprime = 0.0;
  bool delta_unique = false;  // max F' <= 1-delta, 1e-10 relative slack
};

// Locates all fixpoints of F by solving lambda(x) = lambda on each monotone
// piece of lambda(x); the pieces are delimited by the roots of T_0, which
// carries the sign of lambda'(x).
FixpointReport find_fixpoints(const TreeParams& p,
                              const SolverOptions& opt = {});

// potential psi(x) = x / ((x+1) log(x+1)) and phi(x) = psi(x)/x
double psi(double x);
double phi(double x);

// H(x) = (phi(F(x)) / phi(x)) F'(x); H(0) = 0 as a limit
double H(double x, const TreeParams& p);

// U(z) = (lambda z^-d / ((1 + lambda z^-d) log(1 + lambda z^-d)))
//        * d * ((z-1)/z) * log(alpha / (z-1)),  z in [1, 1+alpha],
// with U(1) = U(1+alpha) = 0. Equals H(x) under z = 1 + alpha (1+x)^-w.
double U(double z, double lambda, double d, double alpha);

struct ContractionSup {
  double value;
  double argmax_z;
};

// sup of U over [1, 1+alpha]: 2000-point grid scan, then golden-section
// refinement of the best bracket to 1e-12 interval width
ContractionSup contraction_sup(double lambda, double d, double alpha);

}  // namespace bhc
