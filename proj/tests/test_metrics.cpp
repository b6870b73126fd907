#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "llpd/metrics.hpp"
#include "llpd/random.hpp"

using namespace llpd;

namespace {

// Brute-force maximum agreement over all permutations of the label set.
double brute_force_oa(const std::vector<int>& y, const std::vector<int>& yh,
                      int K) {
  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 1);
  long labeled = 0;
  for (int v : y)
    if (v != kNoiseLabel) ++labeled;
  long best = 0;
  do {
    long hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == kNoiseLabel) continue;
      if (yh[i] >= 1 && yh[i] <= K && perm[yh[i] - 1] == y[i]) ++hit;
    }
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(labeled);
}

}  // namespace

TEST_CASE("agreement: swapped labels align perfectly") {
  auto [oa, align] = agreement({1, 1, 2, 2}, {2, 2, 1, 1});
  CHECK(oa == 1.0);
}

TEST_CASE("agreement: alternating labels score one half") {
  auto [oa, align] = agreement({1, 1, 2, 2}, {1, 2, 1, 2});
  CHECK(oa == 0.5);
  CHECK(oa == brute_force_oa({1, 1, 2, 2}, {1, 2, 1, 2}, 2));
}

TEST_CASE("agreement: noise in truth is excluded, noise prediction is error") {
  auto [oa, align] = agreement({1, 1, 0, 2}, {1, 1, 2, 0});
  CHECK(oa == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS(agreement({0, 0}, {1, 1}));
  CHECK_THROWS(agreement({1, 2}, {1}));
}

TEST_CASE("hungarian equals factorial enumeration for K <= 6") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const int K = 2 + static_cast<int>(rng.below(5));
    const int n = 20 + static_cast<int>(rng.below(40));
    std::vector<int> y(n), yh(n);
    for (int i = 0; i < n; ++i) {
      y[i] = 1 + static_cast<int>(rng.below(K));
      yh[i] = 1 + static_cast<int>(rng.below(K));
    }
    // Guarantee every cluster appears.
    for (int k = 1; k <= K; ++k) y[k - 1] = k;
    auto [oa, align] = agreement(y, yh);
    CHECK(oa == doctest::Approx(brute_force_oa(y, yh, K)).epsilon(1e-12));
  }
}

TEST_CASE("average accuracy: unbalanced clusters weigh equally") {
  // Clusters sized 9 and 1; prediction correct on the big one only.
  std::vector<int> y(10, 1), yh(10, 1);
  y[9] = 2;
  auto rep = score_labels(y, yh);
  CHECK(rep.oa == doctest::Approx(0.9));
  CHECK(rep.aa == doctest::Approx(0.5));
}

TEST_CASE("average accuracy equals overall accuracy in the balanced case") {
  std::vector<int> y{1, 1, 2, 2}, yh{1, 2, 2, 1};
  auto rep = score_labels(y, yh);
  CHECK(rep.aa == doctest::Approx(rep.oa));
}

TEST_CASE("kappa: perfect labels, worked example, chance level") {
  CHECK(score_labels({1, 2, 1, 2}, {1, 2, 1, 2}).kappa == 1.0);

  auto rep = score_labels({1, 1, 2, 2}, {1, 1, 2, 1});
  CHECK(rep.oa == doctest::Approx(0.75));
  CHECK(rep.kappa == doctest::Approx(0.5));

  // Constant prediction on balanced binary truth is chance level.
  auto chance = score_labels({1, 1, 2, 2}, {1, 1, 1, 1});
  CHECK(chance.kappa == doctest::Approx(0.0));
}

TEST_CASE("kappa degenerate: all one label on both sides") {
  auto rep = score_labels({1, 1, 1}, {1, 1, 1});
  CHECK(rep.kappa == 1.0);
}

TEST_CASE("permutation invariance of all three statistics") {
  Rng rng(7);
  const int n = 60;
  std::vector<int> y(n), yh(n);
  for (int i = 0; i < n; ++i) {
    y[i] = 1 + static_cast<int>(rng.below(4));
    yh[i] = 1 + static_cast<int>(rng.below(4));
  }
  for (int k = 1; k <= 4; ++k) y[k - 1] = k;
  auto base = score_labels(y, yh);
  // Relabel predictions by the cycle 1->2->3->4->1.
  std::vector<int> yh2(n);
  for (int i = 0; i < n; ++i) yh2[i] = yh[i] % 4 + 1;
  auto cycled = score_labels(y, yh2);
  CHECK(base.oa == doctest::Approx(cycled.oa));
  CHECK(base.aa == doctest::Approx(cycled.aa));
  CHECK(base.kappa == doctest::Approx(cycled.kappa));
}

TEST_CASE("predicted label count differing from K pads the matrix") {
  // Three predicted labels against two true ones and vice versa.
  auto a = agreement({1, 1, 2, 2}, {1, 2, 3, 3});
  CHECK(a.first == doctest::Approx(0.75));
  auto b = agreement({1, 2, 3, 3}, {1, 1, 2, 2});
  CHECK(b.first == doctest::Approx(0.75));
}

TEST_CASE("balanced truth: optimal alignment reaches at least 1/K") {
  Rng rng(99);
  const int K = 5, n = 100;
  std::vector<int> y(n), yh(n);
  for (int i = 0; i < n; ++i) {
    y[i] = 1 + i % K;
    yh[i] = 1 + static_cast<int>(rng.below(K));
  }
  auto [oa, align] = agreement(y, yh);
  CHECK(oa >= 1.0 / K - 1e-12);
}
