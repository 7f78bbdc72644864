#include "bhc/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace bhc {

ChainState make_all_minus_state(const BipartiteGraph& g, bool with_right,
                                uint64_t seed) {
  ChainState s{std::vector<int8_t>(g.n_left(), -1),
               with_right ? std::vector<int8_t>(g.n_right(), -1)
                          : std::vector<int8_t>{},
               std::vector<int>(g.n_right(), 0), Rng(seed), 0};
  return s;
}

int free_count(const ChainState& s, const BipartiteGraph& g, int u) {
  const int self = s.spins_left[u] > 0 ? 1 : 0;
  int c = 0;
  for (int v : g.adj_left(u))
    if (s.cnt[v] == self) ++c;
  return c;
}

bool cnt_invariant_holds(const ChainState& s, const BipartiteGraph& g) {
  std::vector<int> cnt(g.n_right(), 0);
  for (int u = 0; u < g.n_left(); ++u)
    if (s.spins_left[u] > 0)
      for (int v : g.adj_left(u)) ++cnt[v];
  return cnt == s.cnt;
}

namespace {

void check_fugacities(const Fugacities& f) {
  if (!(f.lambda > 0.0) || !(f.alpha > 0.0))
    throw std::invalid_argument("fugacities must be positive");
}

std::vector<double> powers(double base, int up_to) {
  std::vector<double> p(up_to + 1, 1.0);
  for (int k = 1; k <= up_to; ++k) p[k] = p[k - 1] * base;
  return p;
}

}  // namespace

GlauberNu::GlauberNu(const BipartiteGraph& g, const Fugacities& f)
    : g_(g), f_(f) {
  check_fugacities(f);
  off_.assign(g.n_left() + 1, 0);
  for (int u = 0; u < g.n_left(); ++u)
    off_[u + 1] = off_[u] + g.deg_left(u);
  flat_.reserve(off_.back());
  for (int u = 0; u < g.n_left(); ++u)
    for (int v : g.adj_left(u)) flat_.push_back(v);
  pow1a_ = powers(1.0 + f.alpha, g.max_deg_left());
}

int GlauberNu::fast_free_count(const ChainState& s, int u) const {
  const int self = s.spins_left[u] > 0 ? 1 : 0;
  int c = 0;
  for (int k = off_[u]; k < off_[u + 1]; ++k)
    if (s.cnt[flat_[k]] == self) ++c;
  return c;
}

double GlauberNu::update_probability(const ChainState& s, int u) const {
  const double b = pow1a_[fast_free_count(s, u)];
  return f_.lambda / (f_.lambda + b);
}

void GlauberNu::set_left_spin(ChainState& s, int u, int8_t spin) const {
  if (s.spins_left[u] == spin) return;
  const int d = spin > 0 ? 1 : -1;
  for (int k = off_[u]; k < off_[u + 1]; ++k) s.cnt[flat_[k]] += d;
  s.spins_left[u] = spin;
}

void GlauberNu::step(ChainState& s) const {
  const int u = static_cast<int>(s.rng.next_below(g_.n_left()));
  const double p = update_probability(s, u);
  set_left_spin(s, u, s.rng.next_double() < p ? int8_t{1} : int8_t{-1});
  ++s.step;
}

GlauberMu::GlauberMu(const BipartiteGraph& g, const Fugacities& f)
    : g_(g), f_(f) {
  check_fugacities(f);
}

void GlauberMu::step(ChainState& s) const {
  if (!s.has_right())
    throw std::invalid_argument("GlauberMu: state lacks right spins");
  const int n = g_.n_left() + g_.n_right();
  const int i = static_cast<int>(s.rng.next_below(n));
  if (i < g_.n_left()) {
    bool blocked = false;
    for (int v : g_.adj_left(i))
      if (s.spins_right[v] > 0) blocked = true;
    int8_t spin = -1;
    if (!blocked)
      spin = s.rng.next_double() < f_.lambda / (1.0 + f_.lambda) ? 1 : -1;
    if (spin != s.spins_left[i]) {
      const int d = spin > 0 ? 1 : -1;
      for (int v : g_.adj_left(i)) s.cnt[v] += d;
      s.spins_left[i] = spin;
    }
  } else {
    const int v = i - g_.n_left();
    int8_t spin = -1;
    if (s.cnt[v] == 0)
      spin = s.rng.next_double() < f_.alpha / (1.0 + f_.alpha) ? 1 : -1;
    s.spins_right[v] = spin;
  }
  ++s.step;
}

BlockDynamics::BlockDynamics(const BipartiteGraph& g, const Fugacities& f)
    : nu_(g, f), g_(g), f_(f) {}

void BlockDynamics::step(ChainState& s) const {
  if (!s.has_right())
    throw std::invalid_argument("BlockDynamics: state lacks right spins");
  const int u = static_cast<int>(s.rng.next_below(g_.n_left()));
  const double p = nu_.update_probability(s, u);
  nu_.set_left_spin(s, u, s.rng.next_double() < p ? int8_t{1} : int8_t{-1});
  const double pr = f_.alpha / (1.0 + f_.alpha);
  for (int v = 0; v < g_.n_right(); ++v) {
    const bool occ = s.rng.next_double() < pr;
    s.spins_right[v] = (s.cnt[v] == 0 && occ) ? 1 : -1;
  }
  ++s.step;
}

FieldDynamics::FieldDynamics(const BipartiteGraph& g, const Fugacities& f,
                             const FieldDynamicsParams& p,
                             const OracleOptions& opt)
    : g_(g),
      f_(f),
      p_(p),
      inner_(g, Fugacities{f.lambda / p.theta, f.alpha}) {
  check_fugacities(f);
  if (!(p.theta > 0.0 && p.theta < 1.0))
    throw std::invalid_argument("FieldDynamics: theta must be in (0, 1)");
  if (p.T < 1) throw std::invalid_argument("FieldDynamics: T must be >= 1");
  if (p.inner_mode == FieldDynamicsParams::InnerMode::Glauber && p.m < 1)
    throw std::invalid_argument("FieldDynamics: m must be >= 1");
  if (p.inner_mode == FieldDynamicsParams::InnerMode::Exact) {
    if (g.n_left() > opt.enum_cap)
      throw std::runtime_error("FieldDynamics: enumeration cap exceeded in exact mode");
    if (g.n_right() > 64)
      throw std::runtime_error("FieldDynamics: exact mode supports n_right <= 64");
    right_mask_.assign(g.n_left(), 0);
    for (int u = 0; u < g.n_left(); ++u)
      for (int v : g.adj_left(u)) right_mask_[u] |= uint64_t{1} << v;
    pow_tilted_ = powers(f.lambda / p.theta, g.n_left());
    pow1a_ = powers(1.0 + f.alpha, g.n_right());
  }
}

void FieldDynamics::exact_inner_sample(ChainState& s,
                                       const std::vector<int>& free_left,
                                       Rng& rng) const {
  const int k = static_cast<int>(free_left.size());
  const uint64_t n = uint64_t{1} << k;
  // weights lambda_tilted^{|A|} (1+alpha)^{#free right}; log space guards
  // large tilts, the CDF draw is done on shifted exponentials
  std::vector<double> lw(n);
  double max_lw = -INFINITY;
  const double log_lt = std::log(f_.lambda / p_.theta);
  const double log_1a = std::log1p(f_.alpha);
  for (uint64_t a = 0; a < n; ++a) {
    uint64_t blocked = 0;
    for (int i = 0; i < k; ++i)
      if (a >> i & 1) blocked |= right_mask_[free_left[i]];
    lw[a] = std::popcount(a) * log_lt +
            (g_.n_right() - std::popcount(blocked)) * log_1a;
    max_lw = std::max(max_lw, lw[a]);
  }
  double z = 0.0;
  for (uint64_t a = 0; a < n; ++a) {
    lw[a] = std::exp(lw[a] - max_lw);
    z += lw[a];
  }
  double target = rng.next_double() * z;
  uint64_t pick = n - 1;
  double acc = 0.0;
  for (uint64_t a = 0; a < n; ++a) {
    acc += lw[a];
    if (target < acc) {
      pick = a;
      break;
    }
  }
  for (int i = 0; i < k; ++i)
    inner_.set_left_spin(s, free_left[i], (pick >> i & 1) ? 1 : -1);
}

ChainState FieldDynamics::run_left(uint64_t seed) const {
  Rng master(seed);
  ChainState s = make_all_minus_state(g_, false, seed);
  std::vector<int> free_left;
  free_left.reserve(g_.n_left());
  for (int t = 1; t <= p_.T; ++t) {
    Rng sub = master.split(2 * static_cast<uint64_t>(t));
    Rng inner_rng = master.split(2 * static_cast<uint64_t>(t) + 1);
    // S keeps a (1-theta)-subsample of the current -1s pinned at -1;
    // everything else is redrawn from the tilted conditional
    free_left.clear();
    for (int u = 0; u < g_.n_left(); ++u) {
      if (s.spins_left[u] == -1 && sub.next_double() < 1.0 - p_.theta)
        continue;  // u joins S
      free_left.push_back(u);
    }
    if (p_.inner_mode == FieldDynamicsParams::InnerMode::Exact) {
      exact_inner_sample(s, free_left, inner_rng);
    } else {
      for (int u : free_left) inner_.set_left_spin(s, u, 1);
      const int nf = static_cast<int>(free_left.size());
      if (nf > 0) {
        for (long i = 0; i < p_.m; ++i) {
          const int u = free_left[inner_rng.next_below(nf)];
          const double p = inner_.update_probability(s, u);
          inner_.set_left_spin(s, u,
                               inner_rng.next_double() < p ? int8_t{1}
                                                           : int8_t{-1});
        }
      }
    }
    ++s.step;
  }
  return s;
}

ChainState FieldDynamics::run(uint64_t seed) const {
  ChainState s = run_left(seed);
  Rng finish = Rng(seed).split(0);
  return complete_right(g_, f_, s.spins_left, finish);
}

ChainState complete_right(const BipartiteGraph& g, const Fugacities& f,
                          const std::vector<int8_t>& spins_left, Rng& rng) {
  check_fugacities(f);
  if (static_cast<int>(spins_left.size()) != g.n_left())
    throw std::invalid_argument("complete_right: spins_left size mismatch");
  ChainState s{spins_left, std::vector<int8_t>(g.n_right(), -1),
               std::vector<int>(g.n_right(), 0), rng, 0};
  for (int u = 0; u < g.n_left(); ++u)
    if (spins_left[u] > 0)
      for (int v : g.adj_left(u)) ++s.cnt[v];
  const double pr = f.alpha / (1.0 + f.alpha);
  for (int v = 0; v < g.n_right(); ++v) {
    const bool occ = rng.next_double() < pr;
    s.spins_right[v] = (s.cnt[v] == 0 && occ) ? 1 : -1;
  }
  s.rng = rng;
  return s;
}

TheoreticalParams theoretical_parameters(const BipartiteGraph& g,
                                         const Fugacities& f, double delta,
                                         double eps) {
  check_fugacities(f);
  if (g.n_left() < 2)
    throw std::invalid_argument("theoretical_parameters: need n >= 2");
  if (!(delta > 0.0 && delta < 1.0) || !(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument(
        "theoretical_parameters: delta, eps must be in (0,1)");
  const double n = g.n_left();
  const double Delta = std::max(2, g.max_deg_left());
  const double lambda = f.lambda;

  TheoreticalParams pp;
  pp.C = std::pow(1.0 + lambda, Delta);
  pp.theta = lambda / (pp.C * std::exp(9.0) * Delta * std::log(n));
  const double exponent = 1e5 * std::pow(pp.C, 5.0) / delta;
  double tail = std::log(n * std::log(pp.C) / (eps * eps / 2.0));
  if (tail < 1.0) {
    tail = 1.0;
    pp.log_clamped = true;
  }
  pp.log_T = exponent * (-std::log(pp.theta)) + std::log(tail);
  pp.T = std::exp(pp.log_T);
  const double log_4T_over_eps = std::log(4.0) + pp.log_T - std::log(eps);
  pp.m = std::ceil(log_4T_over_eps / std::log(n)) * 21.0 * n * std::log(n);
  return pp;
}

}  // namespace bhc
