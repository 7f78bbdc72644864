#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bhc {

// Bipartite graph with 0-based indexing on each side separately; an edge is
// a (left, right) pair. Immutable after construction, safe to share
// read-only across threads.
class BipartiteGraph {
 public:
  BipartiteGraph(int n_left, int n_right,
                 std::vector<std::pair<int, int>> edges);

  int n_left() const { return n_left_; }
  int n_right() const { return n_right_; }
  int n_edges() const { return n_edges_; }
  int max_deg_left() const { return max_deg_left_; }

  const std::vector<int>& adj_left(int u) const { return adj_left_[u]; }
  const std::vector<int>& adj_right(int v) const { return adj_right_[v]; }

  int deg_left(int u) const { return static_cast<int>(adj_left_[u].size()); }
  int deg_right(int v) const { return static_cast<int>(adj_right_[v].size()); }

  // canonical form: "nL nR m" header, then edges sorted lexicographically
  std::string serialize() const;

 private:
  int n_left_ = 0;
  int n_right_ = 0;
  int n_edges_ = 0;
  int max_deg_left_ = 0;
  std::vector<std::vector<int>> adj_left_;
  std::vector<std::vector<int>> adj_right_;
};

// Parses the edge-list format: first non-comment line "nL nR m", then m
// lines "u v". Lines starting with '#' are ignored. Throws
// GraphParseError naming the offending line.
BipartiteGraph parse_graph(std::string_view text);

BipartiteGraph load_graph_file(const std::string& path);

// Every left vertex receives `deg` distinct uniformly chosen right
// neighbors; deterministic given seed.
BipartiteGraph random_left_regular(int n_left, int n_right, int deg,
                                   uint64_t seed);

struct GraphParseError : std::runtime_error {
  explicit GraphParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bhc
