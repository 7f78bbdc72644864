#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bhc/recursion.hpp"
#include "bhc/rng.hpp"
#include "bhc/uniqueness.hpp"

using namespace bhc;

TEST_CASE("lambda_hat golden values") {
  CHECK(lambda_hat(2, 2) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(lambda_hat(3, 3) == doctest::Approx(27.0 / 16).epsilon(1e-13));
  CHECK_THROWS_AS(lambda_hat(1, 0.5), std::invalid_argument);
}

TEST_CASE("A decreasing in d and w") {
  Rng rng(2);
  for (int i = 0; i < 40; ++i) {
    double delta = 0.8 * rng.next_double();
    double d = 0.7 + 4 * rng.next_double();
    double w = 0.7 + 4 * rng.next_double();
    if (d * w <= 1 - delta + 0.05) continue;
    CHECK(A(d * 1.02, w, delta) < A(d, w, delta));
    CHECK(A(d, w * 1.02, delta) < A(d, w, delta));
  }
}

TEST_CASE("closed_form_pair") {
  auto [l22, a22] = closed_form_pair(2, 2);
  CHECK(l22 == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(a22 == doctest::Approx(4.0).epsilon(1e-13));
  auto [l23, a23] = closed_form_pair(2, 3);
  CHECK(l23 == doctest::Approx(243.0 / 125).epsilon(1e-13));
  CHECK(a23 == doctest::Approx(2048.0 / 625).epsilon(1e-13));
  auto [l32, a32] = closed_form_pair(3, 2);
  CHECK(l32 == doctest::Approx(a23).epsilon(1e-13));
  CHECK(a32 == doctest::Approx(l23).epsilon(1e-13));
  // the (2,3) pair is exactly critical for the contraction too
  auto sup = contraction_sup(l23, 2, a23);
  CHECK(sup.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solve_w_delta") {
  CHECK(solve_w_delta(2, 4, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(solve_w_delta(3, 27.0 / 16, 0) == doctest::Approx(3.0).epsilon(1e-10));
  double residual = std::fabs(A(2, solve_w_delta(2, 2.9, 0.2), 0.2) - 2.9);
  CHECK(residual <= 1e-9 * 2.9);
  // alpha just above the bound: w_delta blows up
  double bound = 0.5 * std::exp(1.5);
  CHECK(solve_w_delta(2, bound + 1e-6, 0) > 1e3);
  CHECK_THROWS_AS(solve_w_delta(2, bound - 1e-6, 0), std::invalid_argument);
}

TEST_CASE("critical system at delta = 0") {
  for (double d : {2.0, 3.0, 4.0}) {
    double alpha = lambda_hat(d, d);  // lambda_c(d+1)
    ThresholdReport rep = solve_critical_system(d, alpha, 0.0);
    CHECK_FALSE(rep.always_unique);
    CHECK(rep.x_c == doctest::Approx(1.0 / (d - 1)).epsilon(1e-10));
    CHECK(rep.w_c == doctest::Approx(d).epsilon(1e-10));
    CHECK(rep.lambda_2c == doctest::Approx(alpha).epsilon(1e-10));
    CHECK(rep.t_residual <= 1e-9);
    CHECK(rep.m_residual <= 1e-9);
  }
}

TEST_CASE("critical system x_c form along the closed-form manifold") {
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    double d = 1.2 + 3 * rng.next_double();
    double w = 1.2 + 3 * rng.next_double();
    if (d * w <= 1.05) continue;
    auto [lc, ac] = closed_form_pair(d, w);
    ThresholdReport rep = solve_critical_system(d, ac, 0.0);
    CHECK(rep.x_c == doctest::Approx((d + 1) / (d * w - 1)).epsilon(1e-8));
    CHECK(rep.lambda_2c == doctest::Approx(lc).epsilon(1e-8));
  }
}

TEST_CASE("critical system at delta > 0 moves up") {
  ThresholdReport rep = solve_critical_system(2, 4, 0.1);
  CHECK_FALSE(rep.always_unique);
  CHECK(rep.lambda_2c > 4.0);
  CHECK(rep.t_residual <= 1e-9);
  CHECK(rep.m_residual <= 1e-9);
  CHECK(rep.w_c > rep.w_delta);
}

TEST_CASE("at the critical point the contraction peaks at 1 - delta") {
  // the solved (x_c, w_c, lambda_2c) must satisfy F'(x_c) = H(x_c) = 1-delta
  // and sup U = 1-delta, attained at z = 1 + alpha (1+x_c)^{-w_c}
  for (double delta : {0.05, 0.1, 0.3}) {
    ThresholdReport rep = solve_critical_system(2, 4, delta);
    REQUIRE_FALSE(rep.always_unique);
    TreeParams p{2, rep.w_c, rep.lambda_2c, 4, delta};
    CHECK(F(rep.x_c, p) == doctest::Approx(rep.x_c).epsilon(1e-8));
    CHECK(dF(rep.x_c, p) == doctest::Approx(1 - delta).epsilon(1e-7));
    CHECK(H(rep.x_c, p) == doctest::Approx(1 - delta).epsilon(1e-7));
    auto sup = contraction_sup(rep.lambda_2c, 2, 4);
    CHECK(sup.value == doctest::Approx(1 - delta).epsilon(1e-6));
    double zc = 1 + 4 * std::pow(1 + rep.x_c, -rep.w_c);
    CHECK(sup.argmax_z == doctest::Approx(zc).epsilon(1e-5));
  }
}

TEST_CASE("lambda_2c nondecreasing in delta") {
  double prev = -1;
  for (double delta : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5}) {
    ThresholdReport rep = solve_critical_system(2, 4, delta);
    CHECK(rep.lambda_2c >= prev - 1e-9);
    prev = rep.lambda_2c;
  }
}

TEST_CASE("is_delta_unique branches") {
  // small alpha branch: unique for every lambda
  CHECK(is_delta_unique(0.01, 2, 0.1, 0.0));
  CHECK(is_delta_unique(100.0, 2, 0.1, 0.0));
  // the critical equal-fugacity point
  CHECK(is_delta_unique(4.0, 2, 4.0, 0.0));
  CHECK_FALSE(is_delta_unique(4.0, 2, 4.0, 0.05));
  CHECK_FALSE(is_delta_unique_pair(1.5 * 4.0, 2, 0.0));
  CHECK(is_delta_unique_pair(4.0, 2, 0.0));
  CHECK(is_delta_unique_pair(0.9 * 4.0, 2, 0.01));
}

TEST_CASE("consistency triangle at delta 0") {
  Rng rng(19);
  for (int i = 0; i < 6; ++i) {
    double d = 1.3 + 2.5 * rng.next_double();
    double w = 1.3 + 2.5 * rng.next_double();
    auto [lc, ac] = closed_form_pair(d, w);
    auto sup = contraction_sup(lc, d, ac);
    CHECK(sup.value == doctest::Approx(1.0).epsilon(1e-6));
    TreeParams p{d, w, lc, ac, 0.0};
    FixpointReport rep = find_fixpoints(p);
    CHECK(rep.delta_unique);
    ThresholdReport th = solve_critical_system(d, ac, 0.0);
    CHECK(th.lambda_2c == doctest::Approx(lc).epsilon(1e-8));
  }
}

TEST_CASE("pair uniqueness is downward closed in lambda") {
  Rng rng(29);
  for (double frac : {1.0, 0.8, 0.5, 0.2, 0.05}) {
    CHECK(is_delta_unique_pair(frac * 4.0, 2, 0.0));
  }
  // and with a positive certified delta
  double lambda_star = 0.9 * 4.0;
  double delta = 0.01;
  REQUIRE(is_delta_unique_pair(lambda_star, 2, delta));
  for (int i = 0; i < 10; ++i) {
    double lambda = lambda_star * rng.next_double();
    if (lambda < 1e-6) continue;
    CHECK(is_delta_unique_pair(lambda, 2, delta));
  }
}

TEST_CASE("tuple and triple checks agree on grid-aligned probes") {
  // The w sweep covers the grid 2^{k/8}, k = -16..40. A lambda below
  // lambda_2c is non-unique at the w where lambda lies between the two
  // branch values lambda_1(w) < lambda_2(w), so the non-unique probe is
  // drawn from inside that interval at a grid point near w_c.
  Rng rng(41);
  int checked = 0;
  for (int i = 0; i < 12; ++i) {
    double d = 1.5 + 2.5 * rng.next_double();
    double alpha = 0.5 + 5 * rng.next_double();
    double delta = 0.4 * rng.next_double();
    ThresholdReport rep = solve_critical_system(d, alpha, delta);
    std::vector<double> probes;
    if (rep.always_unique) {
      probes.push_back(0.5 + 3 * rng.next_double());
    } else {
      if (rep.w_delta >= 30.0) continue;  // grid cannot see past w = 32
      probes.push_back(1.2 * rep.lambda_2c);
      int kg = static_cast<int>(std::lround(8.0 * std::log2(rep.w_c)));
      kg = std::max(-16, std::min(40, kg));
      double wg = std::pow(2.0, kg / 8.0);
      if (wg <= rep.w_delta) wg = std::pow(2.0, (kg + 1) / 8.0);
      TreeParams p{d, wg, 1.0, alpha, delta};
      auto roots = t_delta_roots(p);
      if (roots.size() == 2) {
        double l1 = lambda_of_x(roots[0], p), l2 = lambda_of_x(roots[1], p);
        if (l1 < l2) probes.push_back(std::sqrt(std::max(l1, 1e-300) * l2));
      }
    }
    for (double lambda : probes) {
      bool triple = is_delta_unique(lambda, d, alpha, delta);
      bool tuple_all = true;
      for (int k = -16; k <= 40; ++k) {
        double w = std::pow(2.0, k / 8.0);
        if (!is_delta_unique_tuple(lambda, d, alpha, w, delta)) tuple_all = false;
      }
      CHECK(triple == tuple_all);
      ++checked;
    }
  }
  CHECK(checked >= 12);
}

TEST_CASE("certify_delta_pair") {
  double d1 = certify_delta_pair(1.0, 1.0);
  CHECK(d1 > 0.7);
  CHECK(is_delta_unique_pair(1.0, 1.0, d1));
  double d2 = certify_delta_pair(1.0, 2.0);
  CHECK(d2 > 0.0);
  CHECK(is_delta_unique_pair(1.0, 2.0, d2));
  CHECK_FALSE(is_delta_unique_pair(1.0, 2.0, std::min(0.999, d2 + 0.01)));
  // at criticality the certified gap collapses
  CHECK(certify_delta_pair(4.0, 2.0) <= 1e-6);
}

TEST_CASE("low temperature comparison line") {
  CHECK(low_temp_threshold(2, 2) == doctest::Approx(107.0).epsilon(1e-12));
  for (double d : {2.0, 3.0}) {
    for (double w = 1.0; w <= 8.0; w += 0.5) {
      auto [lc, ac] = closed_form_pair(d, w);
      CHECK(low_temp_threshold(d, w) > lc);
    }
  }
  // lambda_c = Theta(1/w), lambda_low = Theta(w) at scale
  auto [lc, ac] = closed_form_pair(100, 100);
  CHECK(lc * 100 < 300.0);
  CHECK(lc * 100 > 0.3);
  CHECK(low_temp_threshold(100, 100) / 100 > 1.0);
}

TEST_CASE("phase_table csv") {
  auto rows = phase_table(2, {1.0, 2.0, 3.0});
  std::string csv = phase_table_csv(rows);
  CHECK(csv.rfind("w,alpha_c,lambda_c,lambda_low\n", 0) == 0);
  CHECK(rows[1].lambda_low == doctest::Approx(107.0));
  CHECK(rows[1].lambda_c == doctest::Approx(4.0));
}
