#include "qwalk/graph.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "qwalk/error.hpp"
#include "qwalk/rng.hpp"

namespace qwalk {

Graph::Graph(std::size_t n)
    : n_(n), words_((n + 63) / 64), degrees_(n, 0), bits_(n * words_, 0) {}

Graph::Graph(std::size_t n, std::vector<Edge> edges) : Graph(n) {
  for (auto& e : edges) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.v >= n) {
      throw ValidationError(fmt::format("edge ({}, {}) out of range for n={}", e.u, e.v, n));
    }
    if (e.u == e.v) throw ValidationError(fmt::format("self-loop on node {}", e.u));
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw ValidationError(fmt::format("duplicate edge ({}, {})", dup->u, dup->v));
  }
  for (const auto& e : edges) {
    bits_[e.u * words_ + e.v / 64] |= std::uint64_t{1} << (e.v % 64);
    bits_[e.v * words_ + e.u / 64] |= std::uint64_t{1} << (e.u % 64);
    ++degrees_[e.u];
    ++degrees_[e.v];
  }
  edges_ = std::move(edges);
}

bool Graph::adjacent(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw ValidationError("node index out of range");
  return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
}

std::span<const std::uint64_t> Graph::row(std::size_t i) const {
  return {bits_.data() + i * words_, words_};
}

Eigen::MatrixXd Graph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_),
                                            static_cast<Eigen::Index>(n_));
  for (const auto& e : edges_) {
    a(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = 1.0;
    a(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = 1.0;
  }
  return a;
}

ErSample generate_er(const ErParams& params, bool require_connected,
                     std::size_t max_attempts) {
  if (params.n < 2) throw ValidationError(fmt::format("n must be >= 2, got {}", params.n));
  if (!(params.p >= 0.0 && params.p <= 1.0)) {
    throw ValidationError(fmt::format("p must lie in [0, 1], got {}", params.p));
  }
  if (max_attempts == 0) throw ValidationError("max_attempts must be positive");

  Rng rng(params.seed);
  const std::size_t n = params.n;
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(params.p * n * (n - 1) / 2) + 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.uniform() < params.p) edges.push_back({i, j});
      }
    }
    Graph g(n, std::move(edges));
    if (!require_connected || connected_components(g).connected()) {
      return {std::move(g), attempt};
    }
  }
  throw ConnectivityExhausted(fmt::format(
      "no connected G({}, {}) sample in {} attempts (seed {})", n, params.p, max_attempts,
      params.seed));
}

Eigen::MatrixXd laplacian(const Graph& g) {
  Eigen::MatrixXd l = -g.adjacency();
  for (std::size_t i = 0; i < g.size(); ++i) {
    l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        static_cast<double>(g.degree(i));
  }
  return l;
}

Components connected_components(const Graph& g) {
  constexpr auto kUnseen = static_cast<std::size_t>(-1);
  const std::size_t n = g.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  Components out;
  out.label.assign(n, kUnseen);
  std::queue<std::size_t> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    if (out.label[s] != kUnseen) continue;
    out.label[s] = out.count;
    frontier.push(s);
    while (!frontier.empty()) {
      const auto u = frontier.front();
      frontier.pop();
      for (auto v : adj[u]) {
        if (out.label[v] == kUnseen) {
          out.label[v] = out.count;
          frontier.push(v);
        }
      }
    }
    ++out.count;
  }
  return out;
}

TwinReport find_twin_pairs(const Graph& g) {
  const std::size_t n = g.size();
  TwinReport report;
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = g.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (g.degree(i) != g.degree(j)) continue;
      const auto rj = g.row(j);
      bool twins = true;
      for (std::size_t w = 0; w < ri.size() && twins; ++w) {
        std::uint64_t diff = ri[w] ^ rj[w];
        // i and j themselves are allowed to differ.
        if (w == i / 64) diff &= ~(std::uint64_t{1} << (i % 64));
        if (w == j / 64) diff &= ~(std::uint64_t{1} << (j % 64));
        twins = diff == 0;
      }
      if (!twins) continue;
      const bool adjacent = g.adjacent(i, j);
      const auto z = static_cast<double>(g.degree(i));
      report.pairs.push_back({i, j, adjacent, adjacent ? z + 1.0 : z});
      if (!used[i] && !used[j]) {
        used[i] = used[j] = true;
        ++report.disjoint_count;
      }
    }
  }
  return report;
}

TrapConfig::TrapConfig(std::size_t n, std::vector<std::size_t> nodes, double capture_strength)
    : n_(n), nodes_(std::move(nodes)), capture_strength_(capture_strength) {
  if (!(capture_strength >= 0.0)) {
    throw ValidationError(fmt::format("capture strength must be >= 0, got {}", capture_strength));
  }
  if (nodes_.size() >= n && n > 0) {
    throw TooManyTraps(fmt::format("m={} traps on n={} nodes; need m < n", nodes_.size(), n));
  }
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw ValidationError("trap nodes must be distinct");
  }
  if (!nodes_.empty() && nodes_.back() >= n) {
    throw ValidationError(fmt::format("trap node {} out of range for n={}", nodes_.back(), n));
  }
}

bool TrapConfig::contains(std::size_t node) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), node);
}

std::vector<std::size_t> TrapConfig::free_nodes() const {
  std::vector<std::size_t> out;
  out.reserve(n_ - nodes_.size());
  for (std::size_t i = 0; i < n_; ++i) {
    if (!contains(i)) out.push_back(i);
  }
  return out;
}

TrapConfig place_traps(const Graph& g, std::size_t m, double gamma, std::uint64_t seed) {
  const std::size_t n = g.size();
  if (m >= n) throw TooManyTraps(fmt::format("m={} traps on n={} nodes; need m < n", m, n));
  // Partial Fisher-Yates.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t k = 0; k < m; ++k) {
    const auto r = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(perm[k], perm[r]);
  }
  perm.resize(m);
  return TrapConfig(n, std::move(perm), gamma);
}

void write_edge_list(std::ostream& out, const Graph& g, const ErParams& params) {
  out << fmt::format("# n={} p={} seed={}\n", g.size(), params.p, params.seed);
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

Graph read_edge_list(std::istream& in, ErParams* header) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("edge list: missing header");
  ErParams params;
  {
    std::istringstream hs(line);
    std::string hash, nf, pf, sf;
    hs >> hash >> nf >> pf >> sf;
    if (hash != "#" || nf.rfind("n=", 0) != 0 || pf.rfind("p=", 0) != 0 ||
        sf.rfind("seed=", 0) != 0) {
      throw ValidationError("edge list: malformed header '" + line + "'");
    }
    try {
      params.n = std::stoull(nf.substr(2));
      params.p = std::stod(pf.substr(2));
      params.seed = std::stoull(sf.substr(5));
    } catch (const std::exception&) {
      throw ValidationError("edge list: malformed header '" + line + "'");
    }
  }
  std::vector<Edge> edges;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    std::string rest;
    if (!(ls >> u >> v) || u < 0 || v < 0 || (ls >> rest)) {
      throw ValidationError(fmt::format("edge list line {}: expected 'i j'", lineno));
    }
    edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  }
  if (header != nullptr) *header = params;
  return Graph(params.n, std::move(edges));
}

}  // namespace qwalk
