#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bhc/recursion.hpp"

namespace bhc {

// Solved critical quantities for fixed (d, alpha, delta).
struct ThresholdReport {
  double d = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  // alpha <= ((1-delta)/d) e^{1+(1-delta)/d}: every lambda is delta-unique
  // and lambda_2c = 0 by convention
  bool always_unique = false;
  double branch_bound = 0.0;  // the alpha threshold above
  double w_delta = 0.0;       // meaningful iff !always_unique
  double x_c = 0.0;           // meaningful iff solved
  double w_c = 0.0;
  double lambda_2c = 0.0;
  double t_residual = 0.0;  // |T_delta| / (1 + |terms|) at (x_c, w_c)
  double m_residual = 0.0;  // |M_delta| / (1 + |terms|) at (x_c, w_c)
};

// A(d, w, delta) = (1-delta) d^w (w+1)^{w+1} / (dw - (1-delta))^{w+1},
// evaluated in log space; requires dw > 1-delta.
double A(double d, double w, double delta);

// lambda_hat(d, w) = A(d, w, 0)
double lambda_hat(double d, double w);

// (lambda_c, alpha_c) = (lambda_hat(w, d), lambda_hat(d, w)); d >= 1, dw > 1
std::pair<double, double> closed_form_pair(double d, double w);

// unique w with A(d, w, delta) = alpha; requires
// alpha > ((1-delta)/d) e^{1+(1-delta)/d}
double solve_w_delta(double d, double alpha, double delta,
                     const SolverOptions& opt = {});

// Solves the system T_delta = M_delta = 0 for (x_c, w_c) and sets
// lambda_2c = lambda(x_c). At delta = 0, M_0 = 0 degenerates to
// alpha d = (1+x)^{w+1} and the system collapses to the closed form
// x = (d+1)/(dw-1) at w = w_delta.
ThresholdReport solve_critical_system(double d, double alpha, double delta,
                                      const SolverOptions& opt = {});

// (lambda, d, alpha, w) is delta-unique: every fixpoint of F has
// F' <= 1-delta (via find_fixpoints)
bool is_delta_unique_tuple(double lambda, double d, double alpha, double w,
                           double delta);

// (lambda, d, alpha) is delta-unique for all w > 0: lambda >= lambda_2c
bool is_delta_unique(double lambda, double d, double alpha, double delta);

// equal-fugacity version: alpha = lambda
bool is_delta_unique_pair(double lambda, double d, double delta);

// largest delta with (lambda, d) delta-unique, by bisection; 0 if none
double certify_delta_pair(double lambda, double d);

// lambda_low = 3 (d+1)(w+1) alpha_c(d, w) - 1, the low-temperature
// comparison line; requires dw > 1
double low_temp_threshold(double d, double w);

struct PhaseRow {
  double w;
  double alpha_c;
  double lambda_c;
  double lambda_low;
};

std::vector<PhaseRow> phase_table(double d, const std::vector<double>& w_grid);

// CSV with header "w,alpha_c,lambda_c,lambda_low"
std::string phase_table_csv(const std::vector<PhaseRow>& rows);

}  // namespace bhc
