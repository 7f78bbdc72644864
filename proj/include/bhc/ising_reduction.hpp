#pragma once

#include <vector>

#include "bhc/exact_oracle.hpp"
#include "bhc/graph.hpp"

namespace bhc {

struct IsingEdge {
  int u = 0, v = 0;        // original R indices, u < v
  int shared = 0;          // j_e = |Gamma_u cap Gamma_v|
  double beta_star = 1.0;  // (1+lambda)^{j_e/2}
};

struct RemovalRecord {
  enum class Rule { Isolated, Degree1Folded };
  Rule rule = Rule::Isolated;
  int vertex = -1;
  int folded_into = -1;      // neighbor for Degree1Folded
  double lambda_star = 0.0;  // field of `vertex` at removal time
  double beta_star = 0.0;    // coupling of the folded edge
};

// Ferromagnetic Ising model on the surviving subset of R:
// wt(sigma) = prod_{e monochromatic} beta*_e  prod_{sigma_v = -1} lambda*_v,
// with sigma_v = +1 meaning v occupied in the hardcore model.
struct IsingInstance {
  std::vector<int> vertices;         // surviving original R indices, ascending
  std::vector<double> lambda_star;   // aligned with vertices
  std::vector<IsingEdge> edges;
  std::vector<RemovalRecord> removal_log;  // in removal order
  int n_right_original = 0;
  double lambda_left = 0.0;
  double lambda_right = 0.0;

  bool fields_consistent() const;  // all surviving lambda* >= 1
};

// Holographic reduction for max left degree <= 2. Isolated vertices of
// the derived graph H are removed unconditionally; degree-1 vertices with
// lambda* < 1 are folded into their neighbor
// (lambda*_u *= (1 + beta* lambda*_v) / (beta* + lambda*_v)), cascading
// until a fixpoint.
IsingInstance reduce(const BipartiteGraph& g, double lambda);

// Verified extension for different fugacities per side:
// beta_e = (1+lambda_L)^{j_e}, rho_u = (1+lambda_L)^{k_u} / lambda_R.
IsingInstance reduce_general(const BipartiteGraph& g, double lambda_left,
                             double lambda_right);

// Exact Gibbs distribution of the instance by enumeration (<= 20 vertices).
// Keys are bitmasks over instance vertex positions, bit set = +1.
ExactDistribution ising_gibbs_exact(const IsingInstance& inst);

// Reconstructs the removed vertices (isolated: independent two-state draw;
// folded: conditional on the neighbor from the pre-fold weights), compares
// the result against dist_side(g, f, R) and returns the max pointwise
// deviation.
double verify_reduction(const BipartiteGraph& g, const Fugacities& f,
                        const IsingInstance& inst,
                        const OracleOptions& opt = {});

}  // namespace bhc
