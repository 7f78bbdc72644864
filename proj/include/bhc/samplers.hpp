#pragma once

#include <cstdint>
#include <vector>

#include "bhc/exact_oracle.hpp"
#include "bhc/graph.hpp"
#include "bhc/rng.hpp"

namespace bhc {

// Occupied = +1, unoccupied = -1 throughout. cnt[v] always equals the
// number of occupied left neighbors of v.
struct ChainState {
  std::vector<int8_t> spins_left;
  std::vector<int8_t> spins_right;  // present only for two-side chains
  std::vector<int> cnt;
  Rng rng;
  uint64_t step = 0;

  bool has_right() const { return !spins_right.empty(); }
};

ChainState make_all_minus_state(const BipartiteGraph& g, bool with_right,
                                uint64_t seed);

// |{v in Gamma_u : cnt[v] - 1[spins_left[u] = +1] = 0}|: right neighbors of
// u that are unblocked once u itself is discounted. O(deg(u)).
int free_count(const ChainState& s, const BipartiteGraph& g, int u);

// recomputes cnt from spins_left and compares; test support
bool cnt_invariant_holds(const ChainState& s, const BipartiteGraph& g);

// One-side Glauber on nu = mu_L with counter-based updates.
// Each step: one vertex pick, then one coin.
class GlauberNu {
 public:
  GlauberNu(const BipartiteGraph& g, const Fugacities& f);

  // lambda / (lambda + (1+alpha)^{free_count(s, u)})
  double update_probability(const ChainState& s, int u) const;

  void step(ChainState& s) const;

 private:
  friend class FieldDynamics;
  friend class BlockDynamics;
  const BipartiteGraph& g_;
  Fugacities f_;
  std::vector<int> flat_;  // CSR adjacency of L
  std::vector<int> off_;
  std::vector<double> pow1a_;  // (1+alpha)^k, k = 0..max_deg_left

  int fast_free_count(const ChainState& s, int u) const;
  void set_left_spin(ChainState& s, int u, int8_t spin) const;
};

// Two-side Glauber on mu; state must carry spins_right.
class GlauberMu {
 public:
  GlauberMu(const BipartiteGraph& g, const Fugacities& f);
  void step(ChainState& s) const;

 private:
  const BipartiteGraph& g_;
  Fugacities f_;
};

// Block dynamics P_B: resample one left vertex together with all of R.
// The left update reuses the GlauberNu rule (vertex pick + coin first, so
// the L-marginal transition couples with GlauberNu under a shared stream).
class BlockDynamics {
 public:
  BlockDynamics(const BipartiteGraph& g, const Fugacities& f);
  void step(ChainState& s) const;

 private:
  GlauberNu nu_;
  const BipartiteGraph& g_;
  Fugacities f_;
};

struct FieldDynamicsParams {
  double theta = 0.5;
  int T = 1;
  long m = 1;  // inner Glauber steps; ignored in exact mode
  enum class InnerMode { Glauber, Exact } inner_mode = InnerMode::Glauber;
};

// Field dynamics on nu, realized by tilting the left fugacity to
// lambda/theta (the sign-flipped chain FD^{1/theta}). Each outer iteration
// subsamples S from the current -1s, pins S to -1 and redraws the rest from
// the tilted conditional, by an inner Glauber chain started from all-(+1)
// or by exact enumeration. Finishes with complete_right.
class FieldDynamics {
 public:
  FieldDynamics(const BipartiteGraph& g, const Fugacities& f,
                const FieldDynamicsParams& p,
                const OracleOptions& opt = {});

  // full configuration; deterministic given seed
  ChainState run(uint64_t seed) const;

  // left configuration after T outer iterations (no right completion)
  ChainState run_left(uint64_t seed) const;

 private:
  const BipartiteGraph& g_;
  Fugacities f_;
  FieldDynamicsParams p_;
  GlauberNu inner_;                    // on the tilted fugacity
  std::vector<uint64_t> right_mask_;   // per left vertex, right nbrs as bits
  std::vector<double> pow_tilted_;     // (lambda/theta)^k
  std::vector<double> pow1a_;          // (1+alpha)^k

  void exact_inner_sample(ChainState& s, const std::vector<int>& free_left,
                          Rng& rng) const;
};

// Each v in R independently +1 w.p. (alpha/(1+alpha)) 1[cnt(v) = 0]; the
// joint law of (spins_left, result) is mu given the L-configuration.
ChainState complete_right(const BipartiteGraph& g, const Fugacities& f,
                          const std::vector<int8_t>& spins_left, Rng& rng);

// Parameter choices from the worst-case mixing analysis; T is
// astronomically large for realistic delta, so values are reported (in log
// space where needed), not run.
struct TheoreticalParams {
  double theta = 0.0;
  double T = 0.0;      // may be +inf in double
  double log_T = 0.0;  // natural log, always finite
  double m = 0.0;
  double C = 0.0;      // (1+lambda)^Delta
  bool theoretical = true;
  bool log_clamped = false;  // log(n log C / (eps^2/2)) < 1 clamped to 1
};

TheoreticalParams theoretical_parameters(const BipartiteGraph& g,
                                         const Fugacities& f, double delta,
                                         double eps);

}  // namespace bhc
