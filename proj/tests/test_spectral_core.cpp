#include <doctest.h>

#include "llpd/eigensolver.hpp"
#include "llpd/laplacian.hpp"
#include "llpd/neighbor_graph.hpp"
#include "llpd/random.hpp"
#include "llpd/scale_ladder.hpp"
#include "llpd/spectral.hpp"

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

LlpdIndex make_index(const PointCloud& pc, int k_euc, int m) {
  auto g = ensure_connected(build_knn_graph(pc, k_euc), pc);
  return build_dendrogram(g, choose_scales(g, LadderMode::Exponential, m));
}

// Three points: a pair merging at t_1 and a third joining at t_2.
LlpdIndex three_point_index() {
  NeighborGraph g;
  g.n = 3;
  g.k_euc = 1;
  g.edges = {{0, 1, 1.0}, {1, 2, 2.0}};
  ScaleLadder ladder;
  ladder.thresholds = {1.0, 2.0};
  return build_dendrogram(g, ladder);
}

Eigen::MatrixXd dense_lsym(const Eigen::MatrixXd& W) {
  Eigen::VectorXd d = W.rowwise().sum();
  Eigen::VectorXd dm = d.cwiseInverse().cwiseSqrt();
  return Eigen::MatrixXd::Identity(W.rows(), W.cols()) -
         dm.asDiagonal() * W * dm.asDiagonal();
}

}  // namespace

TEST_CASE("three-point operator: dense W and degrees are as constructed") {
  auto index = three_point_index();
  const double sigma = 1.5;
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{sigma});
  const double f1 = std::exp(-1.0 / (sigma * sigma));
  const double f2 = std::exp(-4.0 / (sigma * sigma));

  Eigen::MatrixXd W = op.dense_weights();
  Eigen::MatrixXd expected(3, 3);
  expected << f1, f1, f2, f1, f1, f2, f2, f2, f1;
  CHECK((W - expected).cwiseAbs().maxCoeff() < 1e-15);

  // Degrees match row sums; compressed blocks are {0,1} and {2}.
  REQUIRE(op.num_blocks() == 2);
  Eigen::VectorXd row_sums = expected.rowwise().sum();
  CHECK(op.degrees()[index.dendrogram.comp[0][0]] ==
        doctest::Approx(row_sums[0]).epsilon(1e-14));
  CHECK(op.degrees()[index.dendrogram.comp[0][2]] ==
        doctest::Approx(row_sums[2]).epsilon(1e-14));
}

TEST_CASE("three-point matvec against the worked example") {
  auto index = three_point_index();
  const double sigma = 0.8;
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{sigma});
  const double f1 = std::exp(-1.0 / (sigma * sigma));
  const double f2 = std::exp(-4.0 / (sigma * sigma));
  const double a = 0.7, b = -1.3;

  Eigen::VectorXd x(3);
  x << a, a, b;
  Eigen::VectorXd y = fast_matvec(op, x);
  CHECK(y[0] == doctest::Approx(2 * a * f1 + b * f2).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(2 * a * f1 + b * f2).epsilon(1e-14));
  CHECK(y[2] == doctest::Approx(2 * a * f2 + b * f1).epsilon(1e-14));
}

TEST_CASE("matvec basics: zero maps to zero, ones map to degrees") {
  auto pc = random_points(150, 2, 19);
  auto index = make_index(pc, 8, 9);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{0.3});
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(op.num_blocks());
  CHECK(fast_matvec(op, zero).norm() == 0.0);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(150);
  Eigen::VectorXd deg = fast_matvec(op, ones);
  Eigen::MatrixXd W = op.dense_weights();
  CHECK((deg - W.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(deg.minCoeff() > 0);
  CHECK_THROWS(fast_matvec(op, Eigen::VectorXd::Zero(7)));
}

TEST_CASE("sigma to infinity: kernel values approach one, degrees approach n") {
  auto pc = random_points(60, 2, 23);
  auto index = make_index(pc, 6, 6);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{1e9});
  Eigen::VectorXd deg = op.degrees();
  for (int b = 0; b < op.num_blocks(); ++b)
    CHECK(deg[b] == doctest::Approx(60.0).epsilon(1e-9));
  CHECK_THROWS(build_operator(index.dendrogram, KernelConfig{0.0}));
}

TEST_CASE("fast matvec equals dense multiply on random instances") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const int n = 100 + 130 * static_cast<int>(seed);
    auto pc = random_points(n, 2, seed);
    auto index = make_index(pc, 10, 12);
    for (double sigma : {0.05, 0.3, 2.0}) {
      LlpdLaplacianOperator op(index.dendrogram, KernelConfig{sigma});
      Eigen::MatrixXd W = op.dense_weights();
      Rng rng(seed + 100);
      Eigen::VectorXd xb(op.num_blocks());
      for (int b = 0; b < op.num_blocks(); ++b) xb[b] = rng.uniform() - 0.5;
      Eigen::VectorXd x = op.expand(xb);
      Eigen::VectorXd fast = op.expand(op.weight_matvec(xb));
      CHECK((fast - W * x).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("weights share the kernel value of the merge scale, entrywise") {
  auto pc = random_points(80, 2, 31);
  auto index = make_index(pc, 6, 8);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{0.4});
  Eigen::MatrixXd W = op.dense_weights();
  KernelConfig f{0.4};
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 80; ++j) {
      const double expect =
          i == j ? f(index.dendrogram.ladder.bottom())
                 : f(approx_llpd(index, i, j));
      CHECK(W(i, j) == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("eigs equals dense eigendecomposition (n <= 300)") {
  for (std::uint64_t seed : {5ull, 6ull}) {
    auto pc = random_points(250, 2, seed);
    auto index = make_index(pc, 8, 10);
    for (double sigma : {0.08, 0.5}) {
      LlpdLaplacianOperator op(index.dendrogram, KernelConfig{sigma});
      auto res = eigs(op, 10);
      Eigen::MatrixXd L = dense_lsym(op.dense_weights());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
      for (int c = 0; c < 10; ++c)
        CHECK(std::abs(res.values[c] - es.eigenvalues()[c]) <= 1e-8);
      // Residuals in the full point space.
      for (int c = 0; c < 10; ++c) {
        Eigen::VectorXd v = res.vectors.col(c);
        CHECK((L * v - res.values[c] * v).norm() <= 1e-7);
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("zero-eigenvalue multiplicity counts kernel-disconnected blocks") {
  // Two far-apart blobs: at tiny sigma the cross-kernel underflows.
  PointCloud pc;
  pc.coords.resize(20, 2);
  Rng rng(77);
  for (int i = 0; i < 10; ++i) {
    pc.coords(i, 0) = rng.uniform();
    pc.coords(i, 1) = rng.uniform();
    pc.coords(10 + i, 0) = 100 + rng.uniform();
    pc.coords(10 + i, 1) = rng.uniform();
  }
  auto index = make_index(pc, 3, 5);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{2.0});
  auto res = eigs(op, 3);
  CHECK(std::abs(res.values[0]) <= 1e-10);
  CHECK(std::abs(res.values[1]) <= 1e-10);
  CHECK(res.values[2] > 0.1);
}

TEST_CASE("spectrum bounds: all eigenvalues within [0, 2]") {
  auto pc = random_points(120, 3, 3);
  auto index = make_index(pc, 6, 7);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{0.6});
  auto res = eigs(op, 20);
  CHECK(res.values.minCoeff() >= -1e-10);
  Eigen::MatrixXd L = dense_lsym(op.dense_weights());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-12);
  CHECK(std::abs(res.values[0]) <= 1e-10);  // lambda_1 = 0
}

TEST_CASE("sweep: single sigma column equals a direct eigs call") {
  auto pc = random_points(90, 2, 8);
  auto index = make_index(pc, 6, 6);
  auto sweep = sigma_sweep(index.dendrogram, {0.4}, 6);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{0.4});
  auto res = eigs(op, 6);
  for (int c = 0; c < 6; ++c)
    CHECK(sweep.eigenvalues(0, c) == doctest::Approx(res.values[c]).epsilon(1e-9));
}

TEST_CASE("sweep curves move continuously in sigma") {
  auto pc = random_points(100, 2, 15);
  auto index = make_index(pc, 8, 8);
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(0.05 + 0.05 * i);
  auto sweep = sigma_sweep(index.dendrogram, grid, 8);
  // Adjacent-sigma eigenvalue change is bounded by the perturbation of the
  // dense normalized kernel matrices (Weyl's inequality).
  for (std::size_t si = 1; si < grid.size(); ++si) {
    LlpdLaplacianOperator a(index.dendrogram, KernelConfig{grid[si - 1]});
    LlpdLaplacianOperator b(index.dendrogram, KernelConfig{grid[si]});
    const double opnorm =
        (dense_lsym(a.dense_weights()) - dense_lsym(b.dense_weights()))
            .cwiseAbs()
            .rowwise()
            .sum()
            .maxCoeff();  // infinity norm bounds the spectral norm
    for (int c = 0; c < 8; ++c)
      CHECK(std::abs(sweep.eigenvalues(si, c) - sweep.eigenvalues(si - 1, c)) <=
            opnorm + 1e-9);
  }
}

TEST_CASE("estimate_K_sigma: two separated singleton blocks give K = 2") {
  PointCloud pc;
  pc.coords.resize(4, 1);
  pc.coords << 0, 0.1, 10, 10.1;
  auto index = make_index(pc, 1, 4);
  std::vector<double> grid{0.05, 0.2, 1.0};
  auto sweep = sigma_sweep(index.dendrogram, grid, 3);
  auto sel = estimate_K_sigma(sweep);
  CHECK(sel.K_hat == 2);
}

TEST_CASE("estimate_K_sigma is invariant under sigma grid order") {
  auto pc = random_points(80, 2, 44);
  auto index = make_index(pc, 6, 8);
  std::vector<double> grid{0.05, 0.1, 0.2, 0.4};
  auto sel = estimate_K_sigma(sigma_sweep(index.dendrogram, grid, 8));
  // Evaluating the grid in pieces and merging finds the same maximum.
  auto s1 = sigma_sweep(index.dendrogram, {0.05, 0.2}, 8);
  auto s2 = sigma_sweep(index.dendrogram, {0.1, 0.4}, 8);
  double best = -1;
  int best_k = 0;
  for (const auto& sw : {s1, s2})
    for (int i = 1; i < 8; ++i)
      for (int si = 0; si < 2; ++si) {
        const double gap = sw.eigenvalues(si, i) - sw.eigenvalues(si, i - 1);
        if (gap > best) {
          best = gap;
          best_k = i;
        }
      }
  CHECK(sel.K_hat == best_k);
  CHECK(sel.gap == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("embedding: K=1 on a connected graph gives identical rows") {
  auto pc = random_points(50, 2, 6);
  auto index = make_index(pc, 5, 6);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{5.0});
  auto res = eigs(op, 2);
  auto emb = embed(res.vectors, 1);
  for (int i = 1; i < 50; ++i)
    CHECK(emb.rows(i, 0) == doctest::Approx(emb.rows(0, 0)));
}

TEST_CASE("embedding: block-diagonal ideal case gives orthogonal rows") {
  PointCloud pc;
  pc.coords.resize(20, 2);
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    pc.coords(i, 0) = rng.uniform();
    pc.coords(i, 1) = rng.uniform();
    pc.coords(10 + i, 0) = 1000 + rng.uniform();
    pc.coords(10 + i, 1) = rng.uniform();
  }
  auto index = make_index(pc, 3, 5);
  LlpdLaplacianOperator op(index.dendrogram, KernelConfig{3.0});
  auto res = eigs(op, 2);
  auto emb = embed(res.vectors, 2);
  CHECK(std::abs(emb.rows.row(0).dot(emb.rows.row(15))) < 1e-6);
  CHECK(emb.rows.row(0).dot(emb.rows.row(5)) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("kmeans: separated blobs are perfectly partitioned by both methods") {
  Eigen::MatrixXd X(40, 4);
  Rng rng(11);
  for (int b = 0; b < 4; ++b)
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 4; ++j)
        X(10 * b + i, j) = (j == b ? 20.0 : 0.0) + rng.uniform();
    }
  for (auto method : {LabelMethod::KMeans, LabelMethod::Distances}) {
    SpectralEmbedding emb;
    emb.rows = X;
    auto labels = cluster_embedding(emb, 4, method, 1);
    for (int b = 0; b < 4; ++b)
      for (int i = 1; i < 10; ++i)
        CHECK(labels[10 * b + i] == labels[10 * b]);
    std::set<int> distinct(labels.begin(), labels.end());
    CHECK(distinct.size() == 4);
  }
}

TEST_CASE("kmeans: K=1 labels everything identically") {
  auto pc = random_points(30, 2, 2);
  auto labels = kmeans_baseline(pc, 1, 0);
  for (int l : labels) CHECK(l == 1);
}

TEST_CASE("kmeans objective is non-increasing across Lloyd iterations") {
  // Indirect check: the final assignment is a local optimum, so one more
  // Lloyd step cannot improve the within-cluster sum of squares.
  auto pc = random_points(200, 2, 64);
  auto labels = kmeans_baseline(pc, 5, 3);
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(5, 2);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < 200; ++i) {
    centers.row(labels[i] - 1) += pc.coords.row(i);
    count[labels[i] - 1] += 1;
  }
  for (int k = 0; k < 5; ++k) centers.row(k) /= count[k];
  double before = 0, after = 0;
  for (int i = 0; i < 200; ++i) {
    before += (pc.coords.row(i) - centers.row(labels[i] - 1)).squaredNorm();
    double best = 1e30;
    for (int k = 0; k < 5; ++k)
      best = std::min(best,
                      (pc.coords.row(i) - centers.row(k)).squaredNorm());
    after += best;
  }
  CHECK(after <= before + 1e-12);
}
