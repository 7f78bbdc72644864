#include "bhc/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "bhc/uniqueness.hpp"

namespace bhc {

double tv_distance(const ExactDistribution& p, const ExactDistribution& q) {
  if (p.side != q.side || p.n_left != q.n_left || p.n_right != q.n_right)
    throw std::invalid_argument("tv_distance: mismatched support universes");
  double sum = 0.0;
  size_t i = 0, j = 0;
  while (i < p.entries.size() || j < q.entries.size()) {
    if (j >= q.entries.size() ||
        (i < p.entries.size() && p.entries[i].first < q.entries[j].first)) {
      sum += std::fabs(p.entries[i].second);
      ++i;
    } else if (i >= p.entries.size() ||
               q.entries[j].first < p.entries[i].first) {
      sum += std::fabs(q.entries[j].second);
      ++j;
    } else {
      sum += std::fabs(p.entries[i].second - q.entries[j].second);
      ++i;
      ++j;
    }
  }
  return 0.5 * sum;
}

ExactDistribution make_empirical(
    Side side, int n_left, int n_right,
    const std::vector<std::pair<uint64_t, uint64_t>>& counts) {
  ExactDistribution d;
  d.side = side;
  d.n_left = n_left;
  d.n_right = n_right;
  uint64_t total = 0;
  for (const auto& [k, c] : counts) total += c;
  if (total == 0) throw std::invalid_argument("make_empirical: no samples");
  d.entries.reserve(counts.size());
  for (const auto& [k, c] : counts)
    if (c > 0) d.entries.emplace_back(k, static_cast<double>(c) / total);
  std::sort(d.entries.begin(), d.entries.end());
  return d;
}

namespace {

uint64_t left_mask(const ChainState& s) {
  uint64_t m = 0;
  for (size_t u = 0; u < s.spins_left.size(); ++u)
    if (s.spins_left[u] > 0) m |= uint64_t{1} << u;
  return m;
}

}  // namespace

MixingCurve mixing_curve(ChainKind kind, const BipartiteGraph& g,
                         const Fugacities& f,
                         const std::vector<uint64_t>& times, uint64_t replicas,
                         uint64_t seed, const FieldDynamicsParams* fd,
                         int jobs, const OracleOptions& opt) {
  if (times.empty()) throw std::invalid_argument("mixing_curve: no time points");
  for (size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw std::invalid_argument("mixing_curve: times must be strictly increasing");
  if (g.n_left() > 62 || g.n_left() > opt.enum_cap)
    throw std::runtime_error("mixing_curve: enumeration cap exceeded");
  if (kind == ChainKind::Field && fd == nullptr)
    throw std::invalid_argument("mixing_curve: field chain needs parameters");

  const ExactDistribution target = dist_side(g, f, Side::L, opt);
  const size_t nt = times.size();
  const uint64_t nmask = uint64_t{1} << g.n_left();
  const bool two_side = kind == ChainKind::Mu || kind == ChainKind::Block;

  jobs = std::max(1, jobs);
  std::vector<std::vector<uint64_t>> hist(
      nt, std::vector<uint64_t>(nmask, 0));  // aggregated below

  auto run_range = [&](uint64_t r_lo, uint64_t r_hi,
                       std::vector<std::vector<uint64_t>>& h) {
    GlauberNu nu(g, f);
    GlauberMu mu(g, f);
    BlockDynamics block(g, f);
    Rng root(seed);
    for (uint64_t r = r_lo; r < r_hi; ++r) {
      const uint64_t rseed = root.split(r).seed();
      if (kind == ChainKind::Field) {
        // outer iterations cannot be snapshotted incrementally across
        // checkpoints without replaying, so rerun to each time point
        for (size_t ti = 0; ti < nt; ++ti) {
          if (times[ti] == 0) {
            ++h[ti][0];  // all-minus start
            continue;
          }
          FieldDynamicsParams p = *fd;
          p.T = static_cast<int>(times[ti]);
          FieldDynamics chain(g, f, p, opt);
          ChainState s = chain.run_left(rseed);
          ++h[ti][left_mask(s)];
        }
        continue;
      }
      ChainState s = make_all_minus_state(g, two_side, rseed);
      uint64_t t = 0;
      for (size_t ti = 0; ti < nt; ++ti) {
        for (; t < times[ti]; ++t) {
          if (kind == ChainKind::Nu)
            nu.step(s);
          else if (kind == ChainKind::Mu)
            mu.step(s);
          else
            block.step(s);
        }
        ++h[ti][left_mask(s)];
      }
    }
  };

  if (jobs == 1) {
    run_range(0, replicas, hist);
  } else {
    std::vector<std::vector<std::vector<uint64_t>>> parts(
        jobs, std::vector<std::vector<uint64_t>>(
                  nt, std::vector<uint64_t>(nmask, 0)));
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) {
      uint64_t lo = replicas * j / jobs;
      uint64_t hi = replicas * (j + 1) / jobs;
      threads.emplace_back(
          [&, lo, hi, j]() { run_range(lo, hi, parts[j]); });
    }
    for (auto& t : threads) t.join();
    for (int j = 0; j < jobs; ++j)
      for (size_t ti = 0; ti < nt; ++ti)
        for (uint64_t m = 0; m < nmask; ++m) hist[ti][m] += parts[j][ti][m];
  }

  MixingCurve curve;
  curve.times = times;
  curve.replicas = replicas;
  curve.tv.resize(nt);
  for (size_t ti = 0; ti < nt; ++ti) {
    std::vector<std::pair<uint64_t, uint64_t>> counts;
    counts.reserve(nmask);
    for (uint64_t m = 0; m < nmask; ++m)
      if (hist[ti][m] > 0) counts.emplace_back(m, hist[ti][m]);
    curve.tv[ti] =
        tv_distance(target, make_empirical(Side::L, g.n_left(), g.n_right(), counts));
  }
  return curve;
}

std::string mixing_curve_csv(const MixingCurve& c) {
  std::string out = "t,tv,replicas\n";
  char buf[96];
  for (size_t i = 0; i < c.times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%llu,%.17g,%llu\n",
                  static_cast<unsigned long long>(c.times[i]), c.tv[i],
                  static_cast<unsigned long long>(c.replicas));
    out += buf;
  }
  return out;
}

SIReport si_check(const BipartiteGraph& g, const Fugacities& f, double delta,
                  PinningPolicy policy, int k, const OracleOptions& opt) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("si_check: delta must be in (0, 1)");
  const int nl = g.n_left();
  if (nl < 2) throw std::invalid_argument("si_check: need at least 2 left vertices");

  SIReport rep;
  rep.delta = delta;
  // A degree bound of 1 is also a degree bound of 2, so such graphs are
  // checked against the Delta = 2 form of eta.
  rep.Delta = std::max(2, g.max_deg_left());
  const double d = rep.Delta - 1;
  rep.eta = rep.Delta / d * std::pow(1.0 + f.alpha, rep.Delta) / delta;
  rep.applicable = is_delta_unique(f.lambda, d, f.alpha, delta);
  if (!rep.applicable) return rep;

  int kmax = policy == PinningPolicy::None ? 0 : (k < 0 ? nl - 2 : k);
  kmax = std::min(kmax, nl - 2);
  if (policy == PinningPolicy::AllUpToK && nl > 10)
    throw std::runtime_error("si_check: all-pinnings policy capped at nL <= 10");

  rep.global_max = -INFINITY;
  // subsets of size <= kmax, each with all +-1 assignments; every
  // assignment on L is admissible since L spans no edge
  for (uint64_t sub = 0; sub < (uint64_t{1} << nl); ++sub) {
    const int sz = std::popcount(sub);
    if (sz > kmax) continue;
    std::vector<int> idx;
    for (int u = 0; u < nl; ++u)
      if (sub >> u & 1) idx.push_back(u);
    for (uint64_t asg = 0; asg < (uint64_t{1} << sz); ++asg) {
      Pinning pin(nl, 0);
      SIPinningRecord rec;
      rec.pinned_vertices = idx;
      for (int i = 0; i < sz; ++i) {
        pin[idx[i]] = (asg >> i & 1) ? 1 : -1;
        rec.pinned_values.push_back(pin[idx[i]]);
      }
      InfluenceMatrix psi = influence_matrix(g, f, pin, opt);
      rec.max_eig = max_eigenvalue(psi);
      if (rec.max_eig > rep.global_max) {
        rep.global_max = rec.max_eig;
        rep.worst = rec;
      }
      rep.records.push_back(std::move(rec));
    }
  }
  rep.pass = rep.global_max <= rep.eta + 1e-9;
  return rep;
}

}  // namespace bhc
