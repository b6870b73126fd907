#include <doctest.h>

#include "llpd/denoise.hpp"
#include "llpd/exact_llpd.hpp"
#include "llpd/generators.hpp"
#include "llpd/neighbor_graph.hpp"
#include "llpd/random.hpp"

using namespace llpd;

namespace {

LlpdIndex make_index(const PointCloud& pc, int k_euc, int m) {
  auto g = ensure_connected(build_knn_graph(pc, k_euc), pc);
  return build_dendrogram(g, choose_scales(g, LadderMode::Exponential, m));
}

}  // namespace

TEST_CASE("duplicate pair has beta = t_1 at kNoise = 1") {
  PointCloud pc;
  pc.coords.resize(4, 2);
  pc.coords << 0, 0, 0, 0, 7, 7, 9, 9;
  auto index = make_index(pc, 1, 4);
  auto beta = knn_llpd_radius(index, 1);
  CHECK(beta[0] == index.dendrogram.ladder.bottom());
  CHECK(beta[1] == index.dendrogram.ladder.bottom());
  CHECK_THROWS(knn_llpd_radius(index, 4));
}

TEST_CASE("beta matches the exact oracle row within the ladder factor") {
  Rng rng(40);
  PointCloud pc;
  pc.coords.resize(40, 2);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 2; ++j) pc.coords(i, j) = rng.uniform();
  auto g = ensure_connected(build_knn_graph(pc, 39), pc);
  auto ladder = choose_scales_by_ratio(g, 1.05);
  auto index = build_dendrogram(g, ladder);
  auto beta = knn_llpd_radius(index, 5);
  auto exact = exact_llpd_matrix(g);
  for (int i = 0; i < 40; ++i) {
    std::vector<double> row;
    for (int j = 0; j < 40; ++j)
      if (j != i) row.push_back(exact(i, j));
    std::nth_element(row.begin(), row.begin() + 4, row.end());
    const double e = row[4];
    CHECK(beta[i] >= e * (1 - 1e-12));
    CHECK(beta[i] <= e * ladder.max_ratio() * (1 + 1e-12));
  }
}

TEST_CASE("beta is invariant under point order permutation") {
  Rng rng(41);
  PointCloud pc;
  pc.coords.resize(60, 2);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 2; ++j) pc.coords(i, j) = rng.uniform();
  auto beta = knn_llpd_radius(make_index(pc, 8, 8), 10);

  // Reverse the point order and recompute.
  PointCloud rev;
  rev.coords = pc.coords.colwise().reverse().eval();
  auto beta_rev = knn_llpd_radius(make_index(rev, 8, 8), 10);
  for (int i = 0; i < 60; ++i)
    CHECK(beta[i] == doctest::Approx(beta_rev[59 - i]).epsilon(1e-12));
}

TEST_CASE("select_theta: elbow at the jump") {
  CHECK(select_theta({1, 1, 1, 10, 10}) == 1.0);
}

TEST_CASE("select_theta: constant array keeps everything") {
  const std::vector<double> beta(10, 3.5);
  CHECK(select_theta(beta) == 3.5);
  CHECK_THROWS(select_theta({1.0, 2.0}));
}

TEST_CASE("theta at or above max beta keeps every point") {
  Rng rng(42);
  PointCloud pc;
  pc.coords.resize(50, 2);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 2; ++j) pc.coords(i, j) = rng.uniform();
  auto index = make_index(pc, 6, 6);
  auto rep = make_denoise_report(index, 5, 1e12);
  CHECK(rep.kept.size() == 50);
  CHECK(rep.removed.empty());
  CHECK_THROWS(make_denoise_report(index, 5, -1.0));
}

TEST_CASE("monotonicity in theta: kept sets are nested") {
  auto data = generate(GeneratorSpec::parse("nine-gaussians", 5, 1.0));
  auto index = make_index(data.points, 20, 20);
  auto rep_small = make_denoise_report(index, 20, 0.1);
  auto rep_large = make_denoise_report(index, 20, 0.3);
  std::set<int> large(rep_large.kept.begin(), rep_large.kept.end());
  for (int i : rep_small.kept) CHECK(large.count(i) == 1);
}

TEST_CASE("removing points never decreases survivor LLPD") {
  auto data = generate(GeneratorSpec::parse("nine-gaussians", 8, 1.0));
  auto full_graph = complete_graph(data.points);
  auto full = exact_llpd_matrix(full_graph);
  auto index = make_index(data.points, 20, 20);
  auto rep = make_denoise_report(index, 20);
  auto survivors = restrict_to(data, rep.kept);
  auto reduced = exact_llpd_matrix(complete_graph(survivors.points));
  for (std::size_t a = 0; a < rep.kept.size(); ++a)
    for (std::size_t b = a + 1; b < rep.kept.size(); ++b)
      CHECK(reduced(a, b) >= full(rep.kept[a], rep.kept[b]) - 1e-12);
}

TEST_CASE("four lines desk scale keeps the paper's fraction of points") {
  // Paper keeps 97361/116000 = 83.9%; the desk-scale instance must land
  // within +-5 percentage points at fixed seeds.
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    auto data = generate(GeneratorSpec::parse("four-lines", seed, 1.0 / 20));
    auto index = make_index(data.points, 20, 20);
    auto rep = make_denoise_report(index, 20);
    const double frac =
        static_cast<double>(rep.kept.size()) / data.points.n();
    CHECK(frac > 0.789);
    CHECK(frac < 0.889);
  }
}
