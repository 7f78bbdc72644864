#pragma once

#include <cstdint>
#include <vector>

#include "bhc/graph.hpp"

namespace bhc {

// (lambda on L, alpha on R) fugacity bundle
struct Fugacities {
  double lambda = 1.0;
  double alpha = 1.0;
};

enum class Side { L, R, Full };

// Partial assignment on L: spin[u] in {-1, 0, +1}, 0 = unpinned.
using Pinning = std::vector<int>;

// Exact normalized distribution over configurations of one side (or both).
// Keys are bitmasks of occupied vertices; for Side::Full the right mask is
// shifted left by n_left. Entries are sorted by key.
struct ExactDistribution {
  Side side = Side::L;
  int n_left = 0;
  int n_right = 0;
  std::vector<std::pair<uint64_t, double>> entries;

  double prob(uint64_t key) const;
};

struct InfluenceMatrix {
  std::vector<int> vertices;             // unpinned left vertices, ascending
  std::vector<std::vector<double>> m;    // square, diagonal 1
};

struct OracleOptions {
  int enum_cap = 20;  // max number of enumerated (unpinned left) vertices
};

// Z = sum over S subset L of lambda^|S| prod_{v in R} (1 + alpha 1[v free]).
// Enumerates L only; right spins factor out. Log-space accumulation keeps
// extreme fugacity tilts (lambda/theta) from overflowing mid-sum.
double partition_function(const BipartiteGraph& g, const Fugacities& f,
                          const OracleOptions& opt = {});
double log_partition_function(const BipartiteGraph& g, const Fugacities& f,
                              const OracleOptions& opt = {});

ExactDistribution dist_side(const BipartiteGraph& g, const Fugacities& f,
                            Side side, const OracleOptions& opt = {});

// Pr[u occupied] under nu = mu_L conditioned on the pinning.
double conditional_marginal(const BipartiteGraph& g, const Fugacities& f,
                            const Pinning& pinning, int u,
                            const OracleOptions& opt = {});

// Psi(i,j) = Pr[j | i] - Pr[j | not i] over unpinned left vertices;
// rows with marginal in {0,1} are zeroed except for the diagonal 1.
InfluenceMatrix influence_matrix(const BipartiteGraph& g, const Fugacities& f,
                                 const Pinning& pinning,
                                 const OracleOptions& opt = {});

// Largest eigenvalue by shifted power iteration (the influence matrix is
// similar to a symmetric PSD matrix, so the spectrum is real).
// Tolerance 1e-9, at most 1e5 iterations; throws on non-convergence with
// the residual in the message.
double max_eigenvalue(const InfluenceMatrix& m);

}  // namespace bhc
