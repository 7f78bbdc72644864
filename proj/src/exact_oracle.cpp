#include "bhc/exact_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bhc {

double ExactDistribution::prob(uint64_t key) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), key,
      [](const std::pair<uint64_t, double>& e, uint64_t k) { return e.first < k; });
  if (it != entries.end() && it->first == key) return it->second;
  return 0.0;
}

namespace {

void check_fugacities(const Fugacities& f) {
  if (!(f.lambda > 0.0) || !(f.alpha > 0.0))
    throw std::invalid_argument("fugacities must be positive");
}

// Enumeration context for nu conditioned on a pinning of L.
// free_left[k] is the k-th unpinned left vertex. For every right vertex v
// not blocked by a pinned +1 vertex, rmask holds the set of unpinned left
// neighbors of v as a bitmask over k; identical masks are merged.
struct EnumCtx {
  std::vector<int> free_left;
  std::vector<std::pair<uint64_t, int>> right_groups;  // (rmask, count)
  int pinned_plus = 0;

  int n_free() const { return static_cast<int>(free_left.size()); }

  // number of free right vertices given the occupied mask on free_left
  int free_right(uint64_t mask) const {
    int c = 0;
    for (const auto& [rm, cnt] : right_groups)
      if ((mask & rm) == 0) c += cnt;
    return c;
  }
};

EnumCtx make_ctx(const BipartiteGraph& g, const Pinning& pinning,
                 const OracleOptions& opt, const char* who) {
  if (!pinning.empty() && static_cast<int>(pinning.size()) != g.n_left())
    throw std::invalid_argument(std::string(who) + ": pinning size mismatch");
  EnumCtx ctx;
  std::vector<int> pos(g.n_left(), -1);
  for (int u = 0; u < g.n_left(); ++u) {
    int s = pinning.empty() ? 0 : pinning[u];
    if (s == 0) {
      pos[u] = ctx.n_free();
      ctx.free_left.push_back(u);
    } else if (s > 0) {
      ++ctx.pinned_plus;
    }
  }
  if (ctx.n_free() > opt.enum_cap || ctx.n_free() > 62)
    throw std::runtime_error(std::string(who) + ": enumeration cap exceeded (" +
                             std::to_string(ctx.n_free()) + " > " +
                             std::to_string(std::min(opt.enum_cap, 62)) + ")");
  std::vector<std::pair<uint64_t, int>> groups;
  for (int v = 0; v < g.n_right(); ++v) {
    bool blocked = false;
    uint64_t rm = 0;
    for (int u : g.adj_right(v)) {
      int s = pinning.empty() ? 0 : pinning[u];
      if (s > 0) blocked = true;
      if (s == 0) rm |= uint64_t{1} << pos[u];
    }
    if (!blocked) groups.emplace_back(rm, 1);
  }
  std::sort(groups.begin(), groups.end());
  for (const auto& [rm, c] : groups) {
    if (!ctx.right_groups.empty() && ctx.right_groups.back().first == rm)
      ctx.right_groups.back().second += c;
    else
      ctx.right_groups.emplace_back(rm, c);
  }
  return ctx;
}

// log weight of the left configuration `mask` over ctx.free_left
double log_weight(const EnumCtx& ctx, const Fugacities& f, uint64_t mask) {
  int occ = std::popcount(mask) + ctx.pinned_plus;
  return occ * std::log(f.lambda) + ctx.free_right(mask) * std::log1p(f.alpha);
}

}  // namespace

double log_partition_function(const BipartiteGraph& g, const Fugacities& f,
                              const OracleOptions& opt) {
  check_fugacities(f);
  EnumCtx ctx = make_ctx(g, {}, opt, "partition_function");
  const uint64_t n = uint64_t{1} << ctx.n_free();
  double max_lw = -INFINITY;
  for (uint64_t mask = 0; mask < n; ++mask)
    max_lw = std::max(max_lw, log_weight(ctx, f, mask));
  double acc = 0.0;
  for (uint64_t mask = 0; mask < n; ++mask)
    acc += std::exp(log_weight(ctx, f, mask) - max_lw);
  return max_lw + std::log(acc);
}

double partition_function(const BipartiteGraph& g, const Fugacities& f,
                          const OracleOptions& opt) {
  return std::exp(log_partition_function(g, f, opt));
}

ExactDistribution dist_side(const BipartiteGraph& g, const Fugacities& f,
                            Side side, const OracleOptions& opt) {
  check_fugacities(f);
  EnumCtx ctx = make_ctx(g, {}, opt, "dist_side");
  if (ctx.n_free() != g.n_left())
    throw std::logic_error("dist_side: unexpected pinning");
  if (side != Side::L && (g.n_right() > opt.enum_cap || g.n_right() > 26))
    throw std::runtime_error("dist_side: enumeration cap exceeded on R");
  if (side == Side::Full && g.n_left() + g.n_right() > 26)
    throw std::runtime_error("dist_side: full support too large to enumerate");

  const int nl = g.n_left();
  const uint64_t n = uint64_t{1} << nl;
  ExactDistribution dist;
  dist.side = side;
  dist.n_left = nl;
  dist.n_right = g.n_right();

  std::vector<double> lw(n);
  double max_lw = -INFINITY;
  for (uint64_t mask = 0; mask < n; ++mask) {
    lw[mask] = log_weight(ctx, f, mask);
    max_lw = std::max(max_lw, lw[mask]);
  }

  if (side == Side::L) {
    double z = 0.0;
    for (uint64_t mask = 0; mask < n; ++mask) z += std::exp(lw[mask] - max_lw);
    dist.entries.reserve(n);
    for (uint64_t mask = 0; mask < n; ++mask)
      dist.entries.emplace_back(mask, std::exp(lw[mask] - max_lw) / z);
    return dist;
  }

  // occupied-right-neighborhood masks per left vertex, for free-set masks
  std::vector<uint64_t> nbr(nl, 0);
  for (int u = 0; u < nl; ++u)
    for (int v : g.adj_left(u)) nbr[u] |= uint64_t{1} << v;

  const double log_alpha = std::log(f.alpha);
  const double log1p_alpha = std::log1p(f.alpha);
  const uint64_t nr_size = uint64_t{1} << g.n_right();
  std::vector<double> out;
  if (side == Side::R) out.assign(nr_size, 0.0);
  std::vector<std::pair<uint64_t, double>> full_entries;

  for (uint64_t mask = 0; mask < n; ++mask) {
    uint64_t blocked = 0;
    for (int u = 0; u < nl; ++u)
      if (mask >> u & 1) blocked |= nbr[u];
    const uint64_t fr = ~blocked & (nr_size - 1);
    // conditional weight of right config tau (subset of fr): alpha^|tau|;
    // rescale so the enumerated S-weight excludes the (1+alpha)^{#free} factor
    const double base_lw = lw[mask] - max_lw -
                           std::popcount(fr) * log1p_alpha;
    uint64_t tau = fr;
    while (true) {  // submask enumeration, including empty
      double w = std::exp(base_lw + std::popcount(tau) * log_alpha);
      if (side == Side::R)
        out[tau] += w;
      else
        full_entries.emplace_back(mask | (tau << nl), w);
      if (tau == 0) break;
      tau = (tau - 1) & fr;
    }
  }

  double z = 0.0;
  if (side == Side::R) {
    for (double w : out) z += w;
    dist.entries.reserve(nr_size);
    for (uint64_t tau = 0; tau < nr_size; ++tau)
      dist.entries.emplace_back(tau, out[tau] / z);
  } else {
    std::sort(full_entries.begin(), full_entries.end());
    for (const auto& [k, w] : full_entries) z += w;
    for (auto& [k, w] : full_entries) w /= z;
    dist.entries = std::move(full_entries);
  }
  return dist;
}

double conditional_marginal(const BipartiteGraph& g, const Fugacities& f,
                            const Pinning& pinning, int u,
                            const OracleOptions& opt) {
  check_fugacities(f);
  if (u < 0 || u >= g.n_left())
    throw std::invalid_argument("conditional_marginal: vertex out of range");
  if (!pinning.empty() && pinning[u] != 0)
    throw std::invalid_argument("conditional_marginal: vertex is pinned");
  EnumCtx ctx = make_ctx(g, pinning, opt, "conditional_marginal");
  int ku = -1;
  for (int k = 0; k < ctx.n_free(); ++k)
    if (ctx.free_left[k] == u) ku = k;
  const uint64_t n = uint64_t{1} << ctx.n_free();
  double max_lw = -INFINITY;
  for (uint64_t mask = 0; mask < n; ++mask)
    max_lw = std::max(max_lw, log_weight(ctx, f, mask));
  double z = 0.0, zu = 0.0;
  for (uint64_t mask = 0; mask < n; ++mask) {
    double w = std::exp(log_weight(ctx, f, mask) - max_lw);
    z += w;
    if (mask >> ku & 1) zu += w;
  }
  return zu / z;
}

InfluenceMatrix influence_matrix(const BipartiteGraph& g, const Fugacities& f,
                                 const Pinning& pinning,
                                 const OracleOptions& opt) {
  check_fugacities(f);
  EnumCtx ctx = make_ctx(g, pinning, opt, "influence_matrix");
  const int k = ctx.n_free();
  if (k < 2)
    throw std::invalid_argument("influence_matrix: need >= 2 unpinned vertices");

  const uint64_t n = uint64_t{1} << k;
  double max_lw = -INFINITY;
  for (uint64_t mask = 0; mask < n; ++mask)
    max_lw = std::max(max_lw, log_weight(ctx, f, mask));

  double z = 0.0;
  std::vector<double> p1(k, 0.0);
  std::vector<std::vector<double>> p2(k, std::vector<double>(k, 0.0));
  for (uint64_t mask = 0; mask < n; ++mask) {
    double w = std::exp(log_weight(ctx, f, mask) - max_lw);
    z += w;
    for (uint64_t m1 = mask; m1 != 0; m1 &= m1 - 1) {
      int i = std::countr_zero(m1);
      p1[i] += w;
      // joint weights stored at [larger][smaller]
      for (uint64_t m2 = m1 & (m1 - 1); m2 != 0; m2 &= m2 - 1)
        p2[std::countr_zero(m2)][i] += w;
    }
  }

  InfluenceMatrix psi;
  psi.vertices = ctx.free_left;
  psi.m.assign(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i) {
    psi.m[i][i] = 1.0;
    double pi = p1[i] / z;
    if (!(pi > 0.0 && pi < 1.0)) continue;  // "0 otherwise" clause
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      double pj = p1[j] / z;
      double pij = (i > j ? p2[i][j] : p2[j][i]) / z;
      psi.m[i][j] = pij / pi - (pj - pij) / (1.0 - pi);
    }
  }
  return psi;
}

double max_eigenvalue(const InfluenceMatrix& im) {
  const int n = static_cast<int>(im.m.size());
  if (n == 0) throw std::invalid_argument("max_eigenvalue: empty matrix");
  for (const auto& row : im.m)
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("max_eigenvalue: matrix not square");
  if (n == 1) return im.m[0][0];

  // Gershgorin shift keeps the target eigenvalue both largest in magnitude
  // and positive, so plain power iteration cannot lock onto the wrong end
  // of the spectrum.
  double shift = 0.0;
  for (const auto& row : im.m) {
    double s = 0.0;
    for (double x : row) s += std::fabs(x);
    shift = std::max(shift, s);
  }

  std::vector<double> v(n), bv(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * i;  // not an eigvec of I
  double theta = 0.0;
  const int max_iter = 100000;
  const double tol = 1e-9;
  double resid = INFINITY;
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      double s = shift * v[i];
      for (int j = 0; j < n; ++j) s += im.m[i][j] * v[j];
      bv[i] = s;
    }
    double norm = 0.0;
    for (double x : bv) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return -shift;  // v in kernel: eigenvalue 0 of B
    double vv = 0.0, vbv = 0.0;
    for (int i = 0; i < n; ++i) {
      vv += v[i] * v[i];
      vbv += v[i] * bv[i];
    }
    theta = vbv / vv;  // Rayleigh quotient
    const double vn = std::sqrt(vv);
    resid = 0.0;
    for (int i = 0; i < n; ++i)
      resid = std::max(resid, std::fabs(bv[i] - theta * v[i]) / vn);
    if (resid <= tol * (std::fabs(theta) + 1.0)) return theta - shift;
    for (int i = 0; i < n; ++i) v[i] = bv[i] / norm;
  }
  throw std::runtime_error("max_eigenvalue: power iteration did not converge, residual " +
                           std::to_string(resid));
}

}  // namespace bhc
