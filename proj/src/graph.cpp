#include "bhc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bhc/rng.hpp"

namespace bhc {

BipartiteGraph::BipartiteGraph(int n_left, int n_right,
                               std::vector<std::pair<int, int>> edges)
    : n_left_(n_left), n_right_(n_right) {
  if (n_left < 0 || n_right < 0)
    throw std::invalid_argument("BipartiteGraph: negative side size");
  adj_left_.resize(n_left_);
  adj_right_.resize(n_right_);
  std::sort(edges.begin(), edges.end());
  for (size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u < 0 || u >= n_left_ || v < 0 || v >= n_right_)
      throw std::invalid_argument("BipartiteGraph: edge index out of range");
    if (i > 0 && edges[i] == edges[i - 1])
      throw std::invalid_argument("BipartiteGraph: duplicate edge");
    adj_left_[u].push_back(v);
    adj_right_[v].push_back(u);
  }
  n_edges_ = static_cast<int>(edges.size());
  for (const auto& nbrs : adj_left_)
    max_deg_left_ = std::max(max_deg_left_, static_cast<int>(nbrs.size()));
}

std::string BipartiteGraph::serialize() const {
  std::ostringstream out;
  out << n_left_ << ' ' << n_right_ << ' ' << n_edges_ << '\n';
  for (int u = 0; u < n_left_; ++u)
    for (int v : adj_left_[u]) out << u << ' ' << v << '\n';
  return out.str();
}

namespace {

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

BipartiteGraph parse_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool have_header = false;
  long n_left = 0, n_right = 0, n_edges = 0;
  std::vector<std::pair<int, int>> edges;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    if (is_blank(line)) continue;
    std::istringstream ls(line);
    if (!have_header) {
      std::string extra;
      if (!(ls >> n_left >> n_right >> n_edges) || (ls >> extra) ||
          n_left < 0 || n_right < 0 || n_edges < 0)
        throw GraphParseError("line " + std::to_string(line_no) +
                              ": malformed header, expected \"nL nR m\"");
      have_header = true;
      continue;
    }
    long u, v;
    std::string extra;
    if (!(ls >> u >> v) || (ls >> extra))
      throw GraphParseError("line " + std::to_string(line_no) +
                            ": malformed edge, expected \"u v\"");
    if (static_cast<long>(edges.size()) >= n_edges)
      throw GraphParseError("line " + std::to_string(line_no) +
                            ": more edges than declared in header");
    if (u < 0 || u >= n_left || v < 0 || v >= n_right)
      throw GraphParseError("line " + std::to_string(line_no) +
                            ": vertex index out of range");
    for (const auto& e : edges)
      if (e.first == u && e.second == v)
        throw GraphParseError("line " + std::to_string(line_no) +
                              ": duplicate edge " + std::to_string(u) + " " +
                              std::to_string(v));
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  if (!have_header) throw GraphParseError("missing header line \"nL nR m\"");
  if (static_cast<long>(edges.size()) != n_edges)
    throw GraphParseError("expected " + std::to_string(n_edges) +
                          " edges, found " + std::to_string(edges.size()));
  return BipartiteGraph(static_cast<int>(n_left), static_cast<int>(n_right),
                        std::move(edges));
}

BipartiteGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

BipartiteGraph random_left_regular(int n_left, int n_right, int deg,
                                   uint64_t seed) {
  if (deg < 0 || deg > n_right)
    throw std::invalid_argument("random_left_regular: need 0 <= deg <= n_right");
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(n_left) * deg);
  std::vector<int> pool(n_right);
  for (int u = 0; u < n_left; ++u) {
    // partial Fisher-Yates: first deg entries of pool become the neighbors
    for (int v = 0; v < n_right; ++v) pool[v] = v;
    for (int k = 0; k < deg; ++k) {
      int j = k + static_cast<int>(rng.next_below(n_right - k));
      std::swap(pool[k], pool[j]);
      edges.emplace_back(u, pool[k]);
    }
  }
  return BipartiteGraph(n_left, n_right, std::move(edges));
}

}  // namespace bhc
