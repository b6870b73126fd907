#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "llpd/parallel.hpp"
#include "llpd/point_cloud.hpp"
#include "llpd/union_find.hpp"

namespace llpd {

struct Edge {
  int i, j;   // i < j
  double w;   // Euclidean distance, > 0 unless points coincide
};

struct NeighborGraph {
  int n = 0;
  int k_euc = 0;
  std::vector<Edge> edges;  // unique, sorted by (i, j)

  double min_weight() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& e : edges) w = std::min(w, e.w);
    return w;
  }
  double max_weight() const {
    double w = 0;
    for (const auto& e : edges) w = std::max(w, e.w);
    return w;
  }
};

namespace detail {

// Neighbor candidates ordered by (squared distance, index); the index
// tie-break keeps brute-force and tree search byte-identical.
struct Cand {
  double d2;
  int idx;
  bool operator<(const Cand& o) const {
    return d2 < o.d2 || (d2 == o.d2 && idx < o.idx);
  }
};

inline double sqdist(const Eigen::MatrixXd& X, int a, int b) {
  double s = 0;
  for (int j = 0; j < X.cols(); ++j) {
    const double d = X(a, j) - X(b, j);
    s += d * d;
  }
  return s;
}

// Exact k nearest per point by direct scan.
inline void knn_brute_rows(const Eigen::MatrixXd& X, int k,
                           std::vector<std::vector<Cand>>& out) {
  const int n = static_cast<int>(X.rows());
  out.assign(n, {});
  parallel_for(n, [&](int i) {
    std::vector<Cand> heap;  // max-heap on (d2, idx)
    heap.reserve(k + 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      Cand c{sqdist(X, i, j), j};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end());
      } else if (c < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    std::sort_heap(heap.begin(), heap.end());
    out[i] = std::move(heap);
  });
}

// Exact k nearest via blocked Gram products; pays off for wide data.
inline void knn_brute_gram(const Eigen::MatrixXd& X, int k,
                           std::vector<std::vector<Cand>>& out) {
  const int n = static_cast<int>(X.rows());
  out.assign(n, {});
  Eigen::VectorXd sq = X.rowwise().squaredNorm();
  const int block = 1024;
  for (int lo = 0; lo < n; lo += block) {
    const int hi = std::min(n, lo + block);
    Eigen::MatrixXd G = X.middleRows(lo, hi - lo) * X.transpose();  // b x n
    parallel_for(hi - lo, [&](int r) {
      const int i = lo + r;
      std::vector<Cand> heap;
      heap.reserve(k + 1);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double d2 = sq[i] + sq[j] - 2.0 * G(r, j);
        if (d2 < 0) d2 = 0;
        Cand c{d2, j};
        if (static_cast<int>(heap.size()) < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      std::sort_heap(heap.begin(), heap.end());
      out[i] = std::move(heap);
    });
  }
}

// Median-split k-d tree with exact bounding-box pruning. The pruning test
// uses <= against the current worst (d2, idx) candidate, so equidistant
// neighbors are still explored and the index tie-break stays exact.
class KdTree {
 public:
  KdTree(const Eigen::MatrixXd& X) : X_(X), dim_(static_cast<int>(X.cols())) {
    const int n = static_cast<int>(X.rows());
    perm_.resize(n);
    for (int i = 0; i < n; ++i) perm_[i] = i;
    nodes_.reserve(2 * n / kLeafSize + 4);
    root_ = build(0, n);
  }

  void query(int target, int k, std::vector<Cand>& heap) const {
    heap.clear();
    heap.reserve(k + 1);
    search(root_, target, k, heap);
    std::sort_heap(heap.begin(), heap.end());
  }

 private:
  static constexpr int kLeafSize = 16;

  struct Node {
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range in perm_
    int axis = 0;
    double split = 0;
    std::vector<double> lo, hi;  // bounding box
  };

  int build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo.assign(dim_, std::numeric_limits<double>::infinity());
    node.hi.assign(dim_, -std::numeric_limits<double>::infinity());
    for (int t = begin; t < end; ++t)
      for (int j = 0; j < dim_; ++j) {
        const double v = X_(perm_[t], j);
        node.lo[j] = std::min(node.lo[j], v);
        node.hi[j] = std::max(node.hi[j], v);
      }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    double spread = -1;
    for (int j = 0; j < dim_; ++j)
      if (node.hi[j] - node.lo[j] > spread) {
        spread = node.hi[j] - node.lo[j];
        axis = j;
      }
    if (spread <= 0) return id;  // all points coincide

    const int mid = (begin + end) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid,
                     perm_.begin() + end, [&](int a, int b) {
                       return X_(a, axis) < X_(b, axis) ||
                              (X_(a, axis) == X_(b, axis) && a < b);
                     });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    nodes_[id].axis = axis;
    nodes_[id].split = X_(perm_[mid], axis);
    return id;
  }

  double box_dist2(const Node& node, int target) const {
    double s = 0;
    for (int j = 0; j < dim_; ++j) {
      const double v = X_(target, j);
      if (v < node.lo[j]) {
        const double d = node.lo[j] - v;
        s += d * d;
      } else if (v > node.hi[j]) {
        const double d = v - node.hi[j];
        s += d * d;
      }
    }
    return s;
  }

  void consider(int target, int j, int k, std::vector<Cand>& heap) const {
    if (j == target) return;
    Cand c{sqdist(X_, target, j), j};
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  void search(int id, int target, int k, std::vector<Cand>& heap) const {
    const Node& node = nodes_[id];
    // Equality must still be explored: a point at exactly the current worst
    // distance but with a smaller index outranks the worst candidate.
    if (static_cast<int>(heap.size()) == k &&
        box_dist2(node, target) > heap.front().d2)
      return;
    if (node.left < 0) {
      for (int t = node.begin; t < node.end; ++t)
        consider(target, perm_[t], k, heap);
      return;
    }
    const double v = X_(target, node.axis);
    const int first = v < node.split ? node.left : node.right;
    const int second = first == node.left ? node.right : node.left;
    search(first, target, k, heap);
    if (static_cast<int>(heap.size()) < k ||
        box_dist2(nodes_[second], target) <= heap.front().d2)
      search(second, target, k, heap);
  }

  const Eigen::MatrixXd& X_;
  int dim_;
  int root_;
  std::vector<int> perm_;
  std::vector<Node> nodes_;
};

inline void finish_edges(const std::vector<std::vector<Cand>>& nn, int k_used,
                         NeighborGraph& g) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(nn.size() * k_used);
  for (int i = 0; i < static_cast<int>(nn.size()); ++i)
    for (const auto& c : nn[i])
      pairs.emplace_back(std::min(i, c.idx), std::max(i, c.idx));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  g.edges.reserve(pairs.size());
  for (auto [a, b] : pairs) g.edges.push_back(Edge{a, b, 0.0});
}

}  // namespace detail

// Exact symmetric k-nearest-neighbor graph. Brute force below the size
// cutoff (and always for wide data, where axis pruning buys nothing);
// median-split k-d tree otherwise. Both paths produce the same edge set.
inline NeighborGraph build_knn_graph(const PointCloud& points, int k_euc) {
  points.validate();
  const int n = points.n();
  if (n < 2) throw std::invalid_argument("need at least 2 points");
  if (k_euc < 1) throw std::invalid_argument("kEuc must be >= 1");
  int k = k_euc;
  if (k >= n) {
    std::cerr << "warning: kEuc=" << k_euc << " >= n=" << n
              << ", building the complete graph\n";
    k = n - 1;
  }

  constexpr int kBruteCutoff = 2048;
  constexpr int kTreeMaxDim = 16;
  const Eigen::MatrixXd& X = points.coords;

  std::vector<std::vector<detail::Cand>> nn;
  if (n <= kBruteCutoff || points.dim() > kTreeMaxDim) {
    if (points.dim() >= 32)
      detail::knn_brute_gram(X, k, nn);
    else
      detail::knn_brute_rows(X, k, nn);
  } else {
    detail::KdTree tree(X);
    nn.assign(n, {});
    parallel_for(n, [&](int i) { tree.query(i, k, nn[i]); });
  }

  NeighborGraph g;
  g.n = n;
  g.k_euc = k_euc;
  detail::finish_edges(nn, k, g);
  for (auto& e : g.edges) e.w = std::sqrt(detail::sqdist(X, e.i, e.j));
  return g;
}

// Number of connected components; fills comp with the component id of each
// node (dense ids in first-seen order).
inline int connected_components(const NeighborGraph& g,
                                std::vector<int>& comp) {
  UnionFind uf(g.n);
  for (const auto& e : g.edges) uf.unite(e.i, e.j);
  comp.assign(g.n, -1);
  int next = 0;
  std::vector<int> remap(g.n, -1);
  for (int i = 0; i < g.n; ++i) {
    const int r = uf.find(i);
    if (remap[r] < 0) remap[r] = next++;
    comp[i] = remap[r];
  }
  return next;
}

// If the graph is disconnected, adds the c-1 shortest bridging edges found
// by a minimum-spanning-tree pass over all pairwise closest component
// pairs. Connected inputs are returned unchanged; the pass is idempotent.
inline NeighborGraph ensure_connected(const NeighborGraph& graph,
                                      const PointCloud& points) {
  std::vector<int> comp;
  const int c = connected_components(graph, comp);
  if (c <= 1) return graph;

  std::vector<std::vector<int>> members(c);
  for (int i = 0; i < graph.n; ++i) members[comp[i]].push_back(i);

  struct Bridge {
    double w;
    int a, b;      // component ids
    int pi, pj;    // point ids
    bool operator<(const Bridge& o) const {
      return w < o.w || (w == o.w && std::tie(pi, pj) < std::tie(o.pi, o.pj));
    }
  };
  std::vector<Bridge> bridges;
  bridges.reserve(static_cast<std::size_t>(c) * (c - 1) / 2);
  for (int a = 0; a < c; ++a)
    for (int b = a + 1; b < c; ++b) {
      Bridge best{std::numeric_limits<double>::infinity(), a, b, -1, -1};
      for (int p : members[a])
        for (int q : members[b]) {
          const double d2 = detail::sqdist(points.coords, p, q);
          const int pi = std::min(p, q), pj = std::max(p, q);
          if (d2 < best.w ||
              (d2 == best.w && std::tie(pi, pj) < std::tie(best.pi, best.pj))) {
            best.w = d2;
            best.pi = pi;
            best.pj = pj;
          }
        }
      best.w = std::sqrt(best.w);
      bridges.push_back(best);
    }
  std::sort(bridges.begin(), bridges.end());

  NeighborGraph out = graph;
  UnionFind uf(c);
  int added = 0;
  for (const auto& br : bridges) {
    if (uf.find(br.a) == uf.find(br.b)) continue;
    uf.unite(br.a, br.b);
    out.edges.push_back(Edge{br.pi, br.pj, br.w});
    if (++added == c - 1) break;
  }
  std::sort(out.edges.begin(), out.edges.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  return out;
}

// Debug export: rows (i, j, w).
inline void save_edges_csv(const NeighborGraph& g, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.precision(17);
    for (const auto& e : g.edges) out << e.i << ',' << e.j << ',' << e.w << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace llpd
