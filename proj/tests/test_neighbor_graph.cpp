#include <doctest.h>

#include <set>

#include "llpd/neighbor_graph.hpp"
#include "llpd/random.hpp"

using namespace llpd;

namespace {

PointCloud random_points(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud pc;
  pc.coords.resize(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) pc.coords(i, j) = rng.uniform();
  return pc;
}

std::set<std::pair<int, int>> edge_set(const NeighborGraph& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.edges) s.insert({e.i, e.j});
  return s;
}

// Reference kNN graph computed with no shortcuts at all.
NeighborGraph brute_reference(const PointCloud& pc, int k) {
  const int n = pc.n();
  std::set<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < n; ++j)
      if (j != i) d.push_back({detail::sqdist(pc.coords, i, j), j});
    std::sort(d.begin(), d.end());
    for (int t = 0; t < std::min(k, n - 1); ++t)
      pairs.insert({std::min(i, d[t].second), std::max(i, d[t].second)});
  }
  NeighborGraph g;
  g.n = n;
  g.k_euc = k;
  for (auto [a, b] : pairs)
    g.edges.push_back(Edge{a, b, std::sqrt(detail::sqdist(pc.coords, a, b))});
  return g;
}

}  // namespace

TEST_CASE("collinear forced edges") {
  PointCloud pc;
  pc.coords.resize(3, 1);
  pc.coords << 0, 1, 3;
  auto g = build_knn_graph(pc, 1);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].i == 0);
  CHECK(g.edges[0].j == 1);
  CHECK(g.edges[0].w == 1.0);
  CHECK(g.edges[1].i == 1);
  CHECK(g.edges[1].j == 2);
  CHECK(g.edges[1].w == 2.0);
}

TEST_CASE("kEuc = n-1 gives the complete graph") {
  auto pc = random_points(12, 3, 5);
  auto g = build_knn_graph(pc, 11);
  CHECK(g.edges.size() == 12 * 11 / 2);
}

TEST_CASE("kEuc >= n warns and degrades to the complete graph") {
  auto pc = random_points(6, 2, 1);
  auto g = build_knn_graph(pc, 10);
  CHECK(g.edges.size() == 6 * 5 / 2);
  CHECK_THROWS(build_knn_graph(pc, 0));
}

TEST_CASE("spatial index equals brute force edge for edge") {
  // Above the brute cutoff the k-d tree kicks in; compare against the
  // reference on an identical point set by constructing both ways.
  auto pc = random_points(2500, 3, 99);
  auto tree_graph = build_knn_graph(pc, 5);
  auto ref = brute_reference(pc, 5);
  CHECK(edge_set(tree_graph) == edge_set(ref));

  auto small = random_points(200, 3, 17);
  CHECK(edge_set(build_knn_graph(small, 5)) ==
        edge_set(brute_reference(small, 5)));
}

TEST_CASE("gram-product path equals the reference for wide data") {
  auto pc = random_points(120, 40, 3);
  CHECK(edge_set(build_knn_graph(pc, 4)) ==
        edge_set(brute_reference(pc, 4)));
}

TEST_CASE("duplicate points and exact ties break by index") {
  PointCloud pc;
  pc.coords.resize(4, 2);
  pc.coords << 0, 0,
               0, 0,
               1, 0,
               -1, 0;
  // Point 2 and 3 are equidistant from 0; k=2 must pick 1 (dup) then 2.
  auto g = build_knn_graph(pc, 2);
  auto s = edge_set(g);
  CHECK(s.count({0, 1}) == 1);
  CHECK(s.count({0, 2}) == 1);
}

TEST_CASE("monotonicity: larger kEuc gives a superset of edges") {
  auto pc = random_points(150, 2, 8);
  auto g3 = edge_set(build_knn_graph(pc, 3));
  auto g7 = edge_set(build_knn_graph(pc, 7));
  for (const auto& e : g3) CHECK(g7.count(e) == 1);
}

TEST_CASE("ensure_connected: identity on connected graphs") {
  auto pc = random_points(100, 2, 4);
  auto g = build_knn_graph(pc, 10);
  std::vector<int> comp;
  REQUIRE(connected_components(g, comp) == 1);
  auto g2 = ensure_connected(g, pc);
  CHECK(g2.edges.size() == g.edges.size());
}

TEST_CASE("ensure_connected: two singletons at distance 5") {
  PointCloud pc;
  pc.coords.resize(2, 1);
  pc.coords << 0, 5;
  NeighborGraph g;
  g.n = 2;
  g.k_euc = 1;
  auto fixed = ensure_connected(g, pc);
  REQUIRE(fixed.edges.size() == 1);
  CHECK(fixed.edges[0].w == 5.0);
}

TEST_CASE("ensure_connected: three blobs bridged by true closest pairs") {
  Rng rng(21);
  PointCloud pc;
  pc.coords.resize(30, 2);
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < 10; ++i) {
      pc.coords(10 * b + i, 0) = 100.0 * b + rng.uniform();
      pc.coords(10 * b + i, 1) = rng.uniform();
    }
  auto g = build_knn_graph(pc, 4);
  std::vector<int> comp;
  REQUIRE(connected_components(g, comp) == 3);
  auto fixed = ensure_connected(g, pc);
  std::vector<int> comp2;
  CHECK(connected_components(fixed, comp2) == 1);
  REQUIRE(fixed.edges.size() == g.edges.size() + 2);

  // Each added bridge is the exhaustive closest pair between the merged
  // component sets.
  auto before = edge_set(g);
  std::vector<Edge> added;
  for (const auto& e : fixed.edges)
    if (!before.count({e.i, e.j})) added.push_back(e);
  REQUIRE(added.size() == 2);
  for (const auto& e : added) {
    double best = 1e30;
    for (int p = 0; p < 30; ++p)
      for (int q = 0; q < 30; ++q)
        if (comp[p] == comp[e.i] && comp[q] == comp[e.j])
          best = std::min(best, detail::sqdist(pc.coords, p, q));
    CHECK(e.w == doctest::Approx(std::sqrt(best)));
  }

  // Idempotence.
  auto again = ensure_connected(fixed, pc);
  CHECK(again.edges.size() == fixed.edges.size());
}

TEST_CASE("symmetry: weights equal recomputed pairwise distances") {
  auto pc = random_points(80, 3, 12);
  auto g = build_knn_graph(pc, 6);
  for (const auto& e : g.edges) {
    CHECK(e.i < e.j);
    CHECK(e.w ==
          doctest::Approx(std::sqrt(detail::sqdist(pc.coords, e.i, e.j))));
  }
}
