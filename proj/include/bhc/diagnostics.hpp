#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bhc/exact_oracle.hpp"
#include "bhc/graph.hpp"
#include "bhc/samplers.hpp"

namespace bhc {

// Half L1 distance; missing support entries count as probability 0.
// Requires the same support universe (side and dimensions).
double tv_distance(const ExactDistribution& p, const ExactDistribution& q);

// normalized empirical distribution from configuration counts
ExactDistribution make_empirical(Side side, int n_left, int n_right,
                                 const std::vector<std::pair<uint64_t, uint64_t>>& counts);

enum class ChainKind { Nu, Mu, Block, Field };

struct MixingCurve {
  std::vector<uint64_t> times;  // strictly increasing
  std::vector<double> tv;       // estimated TV to the exact target at each time
  uint64_t replicas = 0;
};

// Runs `replicas` independent chains from the all-(-1) start, snapshotting
// the L-configuration histogram at each checkpoint time, and reports TV to
// the exact nu. For ChainKind::Field a time unit is one outer iteration.
// jobs > 1 splits replicas across threads; per-replica seeds are derived
// from the replica index, so the result is independent of the thread count.
MixingCurve mixing_curve(ChainKind kind, const BipartiteGraph& g,
                         const Fugacities& f,
                         const std::vector<uint64_t>& times, uint64_t replicas,
                         uint64_t seed,
                         const FieldDynamicsParams* fd = nullptr, int jobs = 1,
                         const OracleOptions& opt = {});

// CSV with header "t,tv,replicas"
std::string mixing_curve_csv(const MixingCurve& c);

enum class PinningPolicy { None, AllUpToK };

struct SIPinningRecord {
  std::vector<int> pinned_vertices;
  std::vector<int> pinned_values;  // aligned, each -1/+1
  double max_eig = 0.0;
};

struct SIReport {
  bool applicable = false;  // (lambda, d, alpha) delta-unique?
  double delta = 0.0;
  int Delta = 0;            // effective degree bound, max(2, max left degree)
  double eta = 0.0;         // (Delta/d) (1+alpha)^Delta / delta
  double global_max = 0.0;
  SIPinningRecord worst;
  std::vector<SIPinningRecord> records;
  bool pass = false;  // global_max <= eta + 1e-9
};

// Exact influence-matrix eigenvalues under every admissible pinning with
// |Lambda| <= min(k, nL-2), compared against the spectral-independence
// bound eta. When the parameters are not delta-unique the bound does not
// apply and the report says so instead of failing.
SIReport si_check(const BipartiteGraph& g, const Fugacities& f, double delta,
                  PinningPolicy policy, int k = -1,
                  const OracleOptions& opt = {});

}  // namespace bhc
