#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qwalk {

struct Edge {
  std::size_t u;  // u < v
  std::size_t v;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph on nodes 0..n-1. Immutable after construction.
class Graph {
 public:
  explicit Graph(std::size_t n);
  // Throws ValidationError on self-loops, duplicates or out-of-range nodes.
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const std::size_t> degrees() const noexcept { return degrees_; }
  std::size_t degree(std::size_t i) const { return degrees_.at(i); }
  bool adjacent(std::size_t i, std::size_t j) const;

  // Packed adjacency row of node i, 64 nodes per word.
  std::span<const std::uint64_t> row(std::size_t i) const;

  Eigen::MatrixXd adjacency() const;

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degrees_;
  std::vector<std::uint64_t> bits_;
};

struct ErParams {
  std::size_t n = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
};

struct ErSample {
  Graph graph;
  std::size_t attempts = 1;
};

// G(n, p): every pair is an edge independently with probability p. When
// require_connected is set the whole graph is resampled from the same stream
// until it has a single component.
ErSample generate_er(const ErParams& params, bool require_connected = true,
                     std::size_t max_attempts = 1000);

// L = D - A, dense.
Eigen::MatrixXd laplacian(const Graph& g);

struct Components {
  std::size_t count = 0;
  std::vector<std::size_t> label;  // component id per node, ids in BFS order
  bool connected() const noexcept { return count == 1; }
};

Components connected_components(const Graph& g);

struct TwinPair {
  std::size_t i;
  std::size_t j;
  bool adjacent;
  double eigenvalue;  // Laplacian eigenvalue of the Faria vector e_i - e_j
};

struct TwinReport {
  std::vector<TwinPair> pairs;  // lexicographic (i, j) order
  std::size_t disjoint_count = 0;
};

// Pairs whose neighbourhoods agree outside {i, j}. disjoint_count is the
// greedy (lexicographic) count of node-disjoint pairs.
TwinReport find_twin_pairs(const Graph& g);

// M distinct trap nodes, stored sorted, sharing one capture strength.
class TrapConfig {
 public:
  TrapConfig() = default;
  TrapConfig(std::size_t n, std::vector<std::size_t> nodes, double capture_strength);

  std::span<const std::size_t> nodes() const noexcept { return nodes_; }
  std::size_t count() const noexcept { return nodes_.size(); }
  double capture_strength() const noexcept { return capture_strength_; }
  std::size_t graph_size() const noexcept { return n_; }
  bool contains(std::size_t node) const;
  std::vector<std::size_t> free_nodes() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> nodes_;
  double capture_strength_ = 0.0;
};

TrapConfig place_traps(const Graph& g, std::size_t m, double gamma, std::uint64_t seed);

// Edge list text format: "# n=<N> p=<p> seed=<seed>" then one "i j" per line.
void write_edge_list(std::ostream& out, const Graph& g, const ErParams& params);
Graph read_edge_list(std::istream& in, ErParams* header = nullptr);

}  // namespace qwalk
