#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "llpd/parallel.hpp"
#include "llpd/scale_ladder.hpp"
#include "llpd/union_find.hpp"

namespace llpd {

// Connected components of the thresholded graphs G(t_1) ... G(t_m),
// with component ids per node per scale and parent links between
// consecutive scales. Component ids are dense, assigned in first-seen
// node order within each scale.
struct MultiscaleDendrogram {
  int n = 0;
  ScaleLadder ladder;
  // comp[s][i]: component of node i at scale s.
  std::vector<std::vector<int>> comp;
  // sizes[s][c]: node count of component c at scale s.
  std::vector<std::vector<int>> sizes;
  // parent[s][c]: component at scale s+1 containing component c of scale s.
  std::vector<std::vector<int>> parent;

  int num_scales() const { return static_cast<int>(comp.size()); }
  int num_components(int s) const { return static_cast<int>(sizes[s].size()); }
  bool fully_merged() const { return num_components(num_scales() - 1) == 1; }

  // Smallest scale with a single component; requires fully_merged().
  double merge_scale() const {
    for (int s = 0; s < num_scales(); ++s)
      if (num_components(s) == 1) return ladder.t(s);
    throw std::runtime_error("dendrogram never reaches a single component");
  }
};

// The row-sorted component matrix: permutation pi and per-scale contiguous
// runs, supporting O(m + k) LLPD nearest-neighbor queries.
struct SortedComponentMatrix {
  int n = 0;
  std::vector<int> order;      // row -> point (pi)
  std::vector<int> row_of;     // point -> row
  // row_run[s][row]: run index at scale s; runs[s][r] = [begin, end).
  std::vector<std::vector<int>> row_run;
  std::vector<std::vector<std::pair<int, int>>> runs;

  int run_size(int s, int row) const {
    const auto& r = runs[s][row_run[s][row]];
    return r.second - r.first;
  }
};

struct LlpdIndex {
  MultiscaleDendrogram dendrogram;
  SortedComponentMatrix sorted;
};

// Algorithm: bin edges into the ladder's closed intervals (an edge of
// weight exactly t_s belongs to scale s), union them scale by scale, then
// sort rows hierarchically from the coarsest scale down.
inline LlpdIndex build_dendrogram(const NeighborGraph& graph,
                                  const ScaleLadder& ladder) {
  const int n = graph.n;
  const int m = ladder.count();
  std::vector<Edge> edges = graph.edges;
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.w < b.w; });

  MultiscaleDendrogram dd;
  dd.n = n;
  dd.ladder = ladder;
  dd.comp.assign(m, std::vector<int>(n, -1));
  dd.sizes.resize(m);

  UnionFind uf(n);
  std::size_t ei = 0;
  for (int s = 0; s < m; ++s) {
    const double cap = ladder.t(s) * (1 + 1e-12);
    while (ei < edges.size() && edges[ei].w <= cap) {
      uf.unite(edges[ei].i, edges[ei].j);
      ++ei;
    }
    auto& cs = dd.comp[s];
    std::vector<int> remap(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
      const int r = uf.find(i);
      if (remap[r] < 0) remap[r] = next++;
      cs[i] = remap[r];
    }
    dd.sizes[s].assign(next, 0);
    for (int i = 0; i < n; ++i) ++dd.sizes[s][cs[i]];
  }
  if (ei < edges.size())
    throw std::runtime_error("ladder top below maximum edge weight");
  if (!dd.fully_merged())
    throw std::runtime_error(
        "graph disconnected at the top scale; run ensure_connected first");

  dd.parent.assign(m - 1, {});
  for (int s = 0; s + 1 < m; ++s) {
    dd.parent[s].assign(dd.sizes[s].size(), -1);
    for (int i = 0; i < n; ++i) dd.parent[s][dd.comp[s][i]] = dd.comp[s + 1][i];
  }

  // Hierarchical row sort: lexicographic from the coarsest scale to the
  // finest, with the point index as the final tie-break.
  SortedComponentMatrix sc;
  sc.n = n;
  sc.order.resize(n);
  std::iota(sc.order.begin(), sc.order.end(), 0);
  std::sort(sc.order.begin(), sc.order.end(), [&](int a, int b) {
    for (int s = m - 1; s >= 0; --s) {
      if (dd.comp[s][a] != dd.comp[s][b]) return dd.comp[s][a] < dd.comp[s][b];
    }
    return a < b;
  });
  sc.row_of.resize(n);
  for (int r = 0; r < n; ++r) sc.row_of[sc.order[r]] = r;

  sc.row_run.assign(m, std::vector<int>(n));
  sc.runs.assign(m, {});
  for (int s = 0; s < m; ++s) {
    auto& runs = sc.runs[s];
    int begin = 0;
    for (int r = 1; r <= n; ++r) {
      if (r == n || dd.comp[s][sc.order[r]] != dd.comp[s][sc.order[begin]]) {
        const int run_id = static_cast<int>(runs.size());
        runs.emplace_back(begin, r);
        for (int q = begin; q < r; ++q) sc.row_run[s][q] = run_id;
        begin = r;
      }
    }
  }
  return LlpdIndex{std::move(dd), std::move(sc)};
}

// Scale at which i and j first share a component; t_1 on the diagonal
// (the Algorithm-3 self-distance convention).
inline double approx_llpd(const LlpdIndex& index, int i, int j) {
  const auto& dd = index.dendrogram;
  if (i < 0 || j < 0 || i >= dd.n || j >= dd.n)
    throw std::out_of_range("point index out of range");
  if (i == j) return dd.ladder.bottom();
  for (int s = 0; s < dd.num_scales(); ++s)
    if (dd.comp[s][i] == dd.comp[s][j]) return dd.ladder.t(s);
  throw std::runtime_error("points never merge; graph was disconnected");
}

struct LlpdNeighbor {
  int point;
  double dist;
};

// Approximate LLPD nearest neighbors of one point via the two-cursor run
// sweep. Among equidistant candidates the sample is the one adjacent in
// row order, upward first. Cost O(m + k).
inline std::vector<LlpdNeighbor> llpd_knn_point(const LlpdIndex& index,
                                                int point, int k) {
  const auto& dd = index.dendrogram;
  const auto& sc = index.sorted;
  const int n = dd.n;
  std::vector<LlpdNeighbor> out;
  out.reserve(k);
  const int row = sc.row_of[point];
  int up = row, down = row;
  for (int s = 0; s < dd.num_scales() && static_cast<int>(out.size()) < k;
       ++s) {
    const auto run = sc.runs[s][sc.row_run[s][row]];
    const double t = dd.ladder.t(s);
    while (up > run.first && static_cast<int>(out.size()) < k) {
      --up;
      out.push_back({sc.order[up], t});
    }
    while (down + 1 < run.second && static_cast<int>(out.size()) < k) {
      ++down;
      out.push_back({sc.order[down], t});
    }
  }
  return out;
}

// Neighbor table for every point. kLLPD >= n degrades to all n-1 neighbors
// with a warning.
inline std::vector<std::vector<LlpdNeighbor>> llpd_knn(const LlpdIndex& index,
                                                       int k_llpd) {
  if (k_llpd < 1) throw std::invalid_argument("kLLPD must be >= 1");
  const int n = index.dendrogram.n;
  int k = k_llpd;
  if (k >= n) {
    std::cerr << "warning: kLLPD=" << k_llpd << " >= n=" << n
              << ", returning all n-1 neighbors\n";
    k = n - 1;
  }
  std::vector<std::vector<LlpdNeighbor>> table(n);
  parallel_for(n, [&](int i) { table[i] = llpd_knn_point(index, i, k); });
  return table;
}

// Distance to the k-th LLPD nearest neighbor of every point: the first
// scale whose run already holds k+1 rows. This equals the k-th entry the
// Algorithm-3 sweep would report, at O(m) per point.
inline std::vector<double> knn_llpd_radius(const LlpdIndex& index, int k) {
  const auto& dd = index.dendrogram;
  const auto& sc = index.sorted;
  const int n = dd.n;
  if (k < 1 || k >= n)
    throw std::invalid_argument("kNoise must be in [1, n)");
  std::vector<double> beta(n);
  parallel_for(n, [&](int i) {
    const int row = sc.row_of[i];
    for (int s = 0; s < dd.num_scales(); ++s) {
      if (sc.run_size(s, row) >= k + 1) {
        beta[i] = dd.ladder.t(s);
        return;
      }
    }
    beta[i] = dd.ladder.top();
  });
  return beta;
}

inline void save_dendrogram_json(const MultiscaleDendrogram& dd,
                                 const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.precision(17);
    out << "{\n  \"scales\": [";
    for (int s = 0; s < dd.num_scales(); ++s)
      out << (s ? "," : "") << dd.ladder.t(s);
    out << "],\n  \"components\": [\n";
    for (int s = 0; s < dd.num_scales(); ++s) {
      out << "    [";
      for (int i = 0; i < dd.n; ++i) out << (i ? "," : "") << dd.comp[s][i];
      out << "]" << (s + 1 < dd.num_scales() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
  }
  std::filesystem::rename(tmp, path);
}

inline void save_neighbor_table_csv(
    const std::vector<std::vector<LlpdNeighbor>>& table,
    const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.precision(17);
    for (std::size_t i = 0; i < table.size(); ++i)
      for (const auto& nb : table[i])
        out << i << ',' << nb.point << ',' << nb.dist << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace llpd
