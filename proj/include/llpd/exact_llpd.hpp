#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "llpd/dendrogram.hpp"
#include "llpd/neighbor_graph.hpp"
#include "llpd/point_cloud.hpp"
#include "llpd/union_find.hpp"

namespace llpd {

// Complete graph on a point cloud; oracle-sized inputs only.
inline NeighborGraph complete_graph(const PointCloud& points) {
  const int n = points.n();
  NeighborGraph g;
  g.n = n;
  g.k_euc = n - 1;
  g.edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      g.edges.push_back(
          Edge{i, j, std::sqrt(detail::sqdist(points.coords, i, j))});
  return g;
}

// Minimum spanning forest of the graph (Kruskal). Throws if disconnected
// and `require_connected`.
inline std::vector<Edge> minimum_spanning_tree(const NeighborGraph& graph,
                                               bool require_connected = true) {
  std::vector<Edge> edges = graph.edges;
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.w < b.w || (a.w == b.w && std::tie(a.i, a.j) < std::tie(b.i, b.j));
  });
  UnionFind uf(graph.n);
  std::vector<Edge> mst;
  mst.reserve(graph.n - 1);
  for (const auto& e : edges) {
    if (uf.find(e.i) != uf.find(e.j)) {
      uf.unite(e.i, e.j);
      mst.push_back(e);
      if (static_cast<int>(mst.size()) == graph.n - 1) break;
    }
  }
  if (require_connected && static_cast<int>(mst.size()) != graph.n - 1)
    throw std::runtime_error("graph is disconnected");
  return mst;
}

// Exact minimax path distances: maximum edge along the unique MST path,
// found by a traversal from every root. O(n^2); for tests and small inputs.
inline Eigen::MatrixXd exact_llpd_matrix(const NeighborGraph& graph) {
  const int n = graph.n;
  const auto mst = minimum_spanning_tree(graph);

  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& e : mst) {
    adj[e.i].emplace_back(e.j, e.w);
    adj[e.j].emplace_back(e.i, e.w);
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> stack;
  for (int root = 0; root < n; ++root) {
    stack.assign(1, root);
    std::vector<char> seen(n, 0);
    seen[root] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const auto& [v, w] : adj[u]) {
        if (seen[v]) continue;
        seen[v] = 1;
        D(root, v) = std::max(D(root, u), w);
        stack.push_back(v);
      }
    }
  }
  return D;
}

// Full single-linkage dendrogram on the complete graph, pruned at the
// ladder scales: the partition at scale s is the set of connected
// components of MST edges of weight <= t_s. Equivalence oracle for the
// multiscale construction.
inline MultiscaleDendrogram single_linkage_prune(const PointCloud& points,
                                                 const ScaleLadder& ladder) {
  const int n = points.n();
  MultiscaleDendrogram dd;
  dd.n = n;
  dd.ladder = ladder;
  const int m = ladder.count();
  dd.comp.assign(m, std::vector<int>(n, 0));
  dd.sizes.resize(m);
  if (n == 1) {
    for (int s = 0; s < m; ++s) dd.sizes[s] = {1};
    dd.parent.assign(m - 1, std::vector<int>(1, 0));
    return dd;
  }
  auto mst = minimum_spanning_tree(complete_graph(points));
  std::sort(mst.begin(), mst.end(),
            [](const Edge& a, const Edge& b) { return a.w < b.w; });
  UnionFind uf(n);
  std::size_t ei = 0;
  for (int s = 0; s < m; ++s) {
    const double cap = ladder.t(s) * (1 + 1e-12);
    while (ei < mst.size() && mst[ei].w <= cap) {
      uf.unite(mst[ei].i, mst[ei].j);
      ++ei;
    }
    std::vector<int> remap(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
      const int r = uf.find(i);
      if (remap[r] < 0) remap[r] = next++;
      dd.comp[s][i] = remap[r];
    }
    dd.sizes[s].assign(next, 0);
    for (int i = 0; i < n; ++i) ++dd.sizes[s][dd.comp[s][i]];
  }
  dd.parent.assign(m - 1, {});
  for (int s = 0; s + 1 < m; ++s) {
    dd.parent[s].assign(dd.sizes[s].size(), -1);
    for (int i = 0; i < n; ++i) dd.parent[s][dd.comp[s][i]] = dd.comp[s + 1][i];
  }
  return dd;
}

// True if two partitions of [0, n) have identical blocks (ids may differ).
inline bool same_partition(const std::vector<int>& a,
                           const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  const int n = static_cast<int>(a.size());
  std::vector<int> fwd, bwd;
  const int na = *std::max_element(a.begin(), a.end()) + 1;
  const int nb = *std::max_element(b.begin(), b.end()) + 1;
  fwd.assign(na, -1);
  bwd.assign(nb, -1);
  for (int i = 0; i < n; ++i) {
    if (fwd[a[i]] < 0) fwd[a[i]] = b[i];
    if (bwd[b[i]] < 0) bwd[b[i]] = a[i];
    if (fwd[a[i]] != b[i] || bwd[b[i]] != a[i]) return false;
  }
  return true;
}

}  // namespace llpd
