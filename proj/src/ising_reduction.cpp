#include "bhc/ising_reduction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bhc {

bool IsingInstance::fields_consistent() const {
  for (double l : lambda_star)
    if (l < 1.0) return false;
  return true;
}

IsingInstance reduce_general(const BipartiteGraph& g, double lambda_left,
                             double lambda_right) {
  if (g.max_deg_left() > 2)
    throw std::invalid_argument("reduce: requires max left degree <= 2");
  if (!(lambda_left > 0.0) || !(lambda_right > 0.0))
    throw std::invalid_argument("reduce: fugacities must be positive");

  const int nr = g.n_right();
  // j_e: shared left vertices per right pair; k_v: pendant left vertices
  std::map<std::pair<int, int>, int> shared;
  std::vector<int> pendant(nr, 0);
  for (int u = 0; u < g.n_left(); ++u) {
    const auto& nbrs = g.adj_left(u);
    if (nbrs.size() == 1) ++pendant[nbrs[0]];
    if (nbrs.size() == 2) ++shared[{nbrs[0], nbrs[1]}];
  }

  const double log1pl = std::log1p(lambda_left);
  IsingInstance inst;
  inst.n_right_original = nr;
  inst.lambda_left = lambda_left;
  inst.lambda_right = lambda_right;

  // mutable working copies over all of R
  std::vector<double> field(nr);
  std::vector<std::vector<int>> adj(nr);  // indices into `edges`
  std::vector<IsingEdge> edges;
  std::vector<bool> edge_alive;
  for (const auto& [pr, j] : shared) {
    IsingEdge e{pr.first, pr.second, j, std::exp(0.5 * j * log1pl)};
    adj[e.u].push_back(static_cast<int>(edges.size()));
    adj[e.v].push_back(static_cast<int>(edges.size()));
    edges.push_back(e);
    edge_alive.push_back(true);
  }
  for (int v = 0; v < nr; ++v) {
    double exponent = pendant[v];
    for (int ei : adj[v]) exponent += 0.5 * edges[ei].shared;
    field[v] = std::exp(exponent * log1pl) / lambda_right;
  }

  std::vector<bool> alive(nr, true);
  std::vector<int> degree(nr);
  for (int v = 0; v < nr; ++v) degree[v] = static_cast<int>(adj[v].size());

  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < nr; ++v) {
      if (!alive[v] || degree[v] != 0) continue;
      inst.removal_log.push_back(
          {RemovalRecord::Rule::Isolated, v, -1, field[v], 0.0});
      alive[v] = false;
      changed = true;
    }
    for (int v = 0; v < nr; ++v) {
      if (!alive[v] || degree[v] != 1 || field[v] >= 1.0) continue;
      int ei = -1;
      for (int cand : adj[v])
        if (edge_alive[cand]) ei = cand;
      const IsingEdge& e = edges[ei];
      const int u = e.u == v ? e.v : e.u;
      // summing sigma_v out of the pair weight multiplies u's (-1)-weight
      // by (1 + beta* lambda*_v) / (beta* + lambda*_v)
      inst.removal_log.push_back(
          {RemovalRecord::Rule::Degree1Folded, v, u, field[v], e.beta_star});
      field[u] *= (1.0 + e.beta_star * field[v]) / (e.beta_star + field[v]);
      edge_alive[ei] = false;
      --degree[u];
      --degree[v];
      alive[v] = false;
      changed = true;
    }
  }

  for (int v = 0; v < nr; ++v) {
    if (!alive[v]) continue;
    inst.vertices.push_back(v);
    inst.lambda_star.push_back(field[v]);
  }
  for (size_t i = 0; i < edges.size(); ++i)
    if (edge_alive[i]) inst.edges.push_back(edges[i]);
  return inst;
}

IsingInstance reduce(const BipartiteGraph& g, double lambda) {
  return reduce_general(g, lambda, lambda);
}

ExactDistribution ising_gibbs_exact(const IsingInstance& inst) {
  const int k = static_cast<int>(inst.vertices.size());
  if (k > 20)
    throw std::runtime_error("ising_gibbs_exact: enumeration cap exceeded");
  std::vector<int> pos(inst.n_right_original, -1);
  for (int i = 0; i < k; ++i) pos[inst.vertices[i]] = i;

  const uint64_t n = uint64_t{1} << k;
  std::vector<double> lw(n, 0.0);
  double max_lw = -INFINITY;
  for (uint64_t m = 0; m < n; ++m) {
    double w = 0.0;
    for (int i = 0; i < k; ++i)
      if (!(m >> i & 1)) w += std::log(inst.lambda_star[i]);
    for (const auto& e : inst.edges) {
      const bool bu = m >> pos[e.u] & 1;
      const bool bv = m >> pos[e.v] & 1;
      if (bu == bv) w += std::log(e.beta_star);
    }
    lw[m] = w;
    max_lw = std::max(max_lw, w);
  }
  double z = 0.0;
  for (uint64_t m = 0; m < n; ++m) {
    lw[m] = std::exp(lw[m] - max_lw);
    z += lw[m];
  }
  ExactDistribution d;
  d.side = Side::R;
  d.n_left = 0;
  d.n_right = k;
  d.entries.reserve(n);
  for (uint64_t m = 0; m < n; ++m) d.entries.emplace_back(m, lw[m] / z);
  return d;
}

double verify_reduction(const BipartiteGraph& g, const Fugacities& f,
                        const IsingInstance& inst, const OracleOptions& opt) {
  const int nr = g.n_right();
  if (nr > 20)
    throw std::runtime_error("verify_reduction: enumeration cap exceeded on R");
  if (inst.n_right_original != nr)
    throw std::invalid_argument("verify_reduction: instance does not match graph");

  // survivors' joint law, rekeyed to original R indices
  ExactDistribution base = ising_gibbs_exact(inst);
  std::vector<std::pair<uint64_t, double>> cur;
  cur.reserve(base.entries.size());
  for (const auto& [m, p] : base.entries) {
    uint64_t key = 0;
    for (size_t i = 0; i < inst.vertices.size(); ++i)
      if (m >> i & 1) key |= uint64_t{1} << inst.vertices[i];
    cur.emplace_back(key, p);
  }

  // replay removals backwards, each adds one vertex with its conditional law
  for (auto it = inst.removal_log.rbegin(); it != inst.removal_log.rend();
       ++it) {
    std::vector<std::pair<uint64_t, double>> next;
    next.reserve(cur.size() * 2);
    const uint64_t vbit = uint64_t{1} << it->vertex;
    for (const auto& [key, p] : cur) {
      double p_plus;
      if (it->rule == RemovalRecord::Rule::Isolated) {
        p_plus = 1.0 / (1.0 + it->lambda_star);
      } else {
        const bool u_plus = key >> it->folded_into & 1;
        p_plus = u_plus ? it->beta_star / (it->beta_star + it->lambda_star)
                        : 1.0 / (1.0 + it->beta_star * it->lambda_star);
      }
      next.emplace_back(key | vbit, p * p_plus);
      next.emplace_back(key, p * (1.0 - p_plus));
    }
    cur = std::move(next);
  }

  std::sort(cur.begin(), cur.end());
  ExactDistribution reconstructed;
  reconstructed.side = Side::R;
  reconstructed.n_left = g.n_left();
  reconstructed.n_right = nr;
  reconstructed.entries = std::move(cur);

  ExactDistribution exact = dist_side(g, f, Side::R, opt);
  double dev = 0.0;
  for (uint64_t m = 0; m < (uint64_t{1} << nr); ++m)
    dev = std::max(dev,
                   std::fabs(reconstructed.prob(m) - exact.prob(m)));
  return dev;
}

}  // namespace bhc
