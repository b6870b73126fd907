#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "llpd/denoise.hpp"
#include "llpd/dendrogram.hpp"
#include "llpd/eigensolver.hpp"
#include "llpd/laplacian.hpp"
#include "llpd/metrics.hpp"
#include "llpd/neighbor_graph.hpp"
#include "llpd/parallel.hpp"
#include "llpd/point_cloud.hpp"
#include "llpd/random.hpp"

namespace llpd {

enum class LabelMethod { KMeans, Distances };

struct SigmaSweep {
  std::vector<double> sigmas;            // ascending
  Eigen::MatrixXd eigenvalues;           // num_sigmas x kmax, ascending rows
  std::vector<Eigen::MatrixXd> vectors;  // per sigma, n x kmax
};

struct SweepSelection {
  int K_hat = 1;
  double sigma_hat = 0;
  int sigma_index = 0;
  double gap = 0;
};

// Eigenvalue curves over the sigma grid. Sweep points are independent and
// run concurrently over the shared immutable dendrogram.
inline SigmaSweep sigma_sweep(const MultiscaleDendrogram& dd,
                              const std::vector<double>& sigma_grid, int kmax,
                              double tol = 1e-8) {
  if (sigma_grid.empty()) throw std::invalid_argument("empty sigma grid");
  for (std::size_t i = 1; i < sigma_grid.size(); ++i)
    if (sigma_grid[i] <= sigma_grid[i - 1])
      throw std::invalid_argument("sigma grid must be ascending");

  SigmaSweep sweep;
  sweep.sigmas = sigma_grid;
  const int ns = static_cast<int>(sigma_grid.size());
  sweep.eigenvalues.resize(ns, kmax);
  sweep.vectors.resize(ns);

  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(ns, [&](int si) {
    try {
      LlpdLaplacianOperator op(dd, KernelConfig{sigma_grid[si]});
      EigsOptions opt;
      opt.tol = tol;
      const int k = std::min(kmax, op.num_points());
      EigsResult res = eigs(op, k, opt);
      for (int c = 0; c < kmax; ++c)
        sweep.eigenvalues(si, c) = c < k ? res.values[c] : 1.0;
      sweep.vectors[si] = res.vectors;
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return sweep;
}

// K_hat = argmax_i max_sigma (lambda_{i+1} - lambda_i), sigma_hat the
// maximizing sigma for that i; ties break toward smaller i, then smaller
// sigma, making the estimate independent of grid order.
inline SweepSelection estimate_K_sigma(const SigmaSweep& sweep) {
  const int kmax = static_cast<int>(sweep.eigenvalues.cols());
  if (kmax < 2) throw std::invalid_argument("need at least 2 eigenvalues");
  SweepSelection sel;
  sel.gap = -1;
  for (int i = 1; i <= kmax - 1; ++i) {
    for (int si = 0; si < static_cast<int>(sweep.sigmas.size()); ++si) {
      const double gap =
          sweep.eigenvalues(si, i) - sweep.eigenvalues(si, i - 1);
      if (gap > sel.gap) {
        sel.gap = gap;
        sel.K_hat = i;
        sel.sigma_index = si;
        sel.sigma_hat = sweep.sigmas[si];
      }
    }
  }
  return sel;
}

struct SpectralEmbedding {
  Eigen::MatrixXd rows;  // n x K, unit-norm rows
  int zero_rows = 0;     // rows that had zero norm before normalization
};

inline SpectralEmbedding embed(const Eigen::MatrixXd& vectors, int K) {
  if (K < 1 || K > vectors.cols())
    throw std::invalid_argument("K exceeds available eigenvectors");
  SpectralEmbedding emb;
  emb.rows = vectors.leftCols(K);
  for (int i = 0; i < emb.rows.rows(); ++i) {
    const double norm = emb.rows.row(i).norm();
    if (norm > 0) {
      emb.rows.row(i) /= norm;
    } else {
      emb.rows.row(i).setZero();
      emb.rows(i, 0) = 1.0;
      ++emb.zero_rows;
    }
  }
  return emb;
}

namespace detail {

inline std::vector<int> furthest_point_centers(const Eigen::MatrixXd& X,
                                               int K, int first) {
  const int n = static_cast<int>(X.rows());
  std::vector<int> centers{first};
  Eigen::VectorXd mind =
      (X.rowwise() - X.row(first)).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < K) {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (mind[i] > mind[best]) best = i;
    centers.push_back(best);
    mind = mind.cwiseMin(
        (X.rowwise() - X.row(best)).rowwise().squaredNorm());
  }
  return centers;
}

inline void assign_nearest(const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& centers,
                           std::vector<int>& labels) {
  const int n = static_cast<int>(X.rows());
  const int K = static_cast<int>(centers.rows());
  labels.resize(n);
  parallel_for(n, [&](int i) {
    int best = 0;
    double bd = (X.row(i) - centers.row(0)).squaredNorm();
    for (int k = 1; k < K; ++k) {
      const double d = (X.row(i) - centers.row(k)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    labels[i] = best;
  });
}

}  // namespace detail

// Lloyd's iterations with furthest-point initialization, best of
// `restarts` by within-cluster sum of squares. Labels are 1-based.
inline std::vector<int> kmeans(const Eigen::MatrixXd& X, int K,
                               std::uint64_t seed, int restarts = 10,
                               int max_iter = 100) {
  const int n = static_cast<int>(X.rows());
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (K >= n) {
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = std::min(i, K - 1) + 1;
    return labels;
  }
  std::vector<int> best_labels;
  double best_wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(r));
    const int first = static_cast<int>(rng.below(n));
    const auto init = detail::furthest_point_centers(X, K, first);
    Eigen::MatrixXd centers(K, X.cols());
    for (int k = 0; k < K; ++k) centers.row(k) = X.row(init[k]);

    std::vector<int> labels;
    for (int it = 0; it < max_iter; ++it) {
      detail::assign_nearest(X, centers, labels);
      Eigen::MatrixXd next = Eigen::MatrixXd::Zero(K, X.cols());
      std::vector<int> count(K, 0);
      for (int i = 0; i < n; ++i) {
        next.row(labels[i]) += X.row(i);
        ++count[labels[i]];
      }
      for (int k = 0; k < K; ++k) {
        if (count[k] > 0) {
          next.row(k) /= count[k];
        } else {
          // Re-seed an empty cluster at the point furthest from its center.
          int far = 0;
          double fd = -1;
          for (int i = 0; i < n; ++i) {
            const double d = (X.row(i) - centers.row(labels[i])).squaredNorm();
            if (d > fd) {
              fd = d;
              far = i;
            }
          }
          next.row(k) = X.row(far);
        }
      }
      if ((next - centers).norm() <= 1e-12 * (1 + centers.norm())) {
        centers = next;
        break;
      }
      centers = next;
    }
    detail::assign_nearest(X, centers, labels);
    double wcss = 0;
    for (int i = 0; i < n; ++i)
      wcss += (X.row(i) - centers.row(labels[i])).squaredNorm();
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_labels = labels;
    }
  }
  for (int& l : best_labels) ++l;
  return best_labels;
}

// Labels from a spectral embedding: K-means, or furthest-point K-centering
// with nearest-center assignment (valid under a perfect representation).
inline std::vector<int> cluster_embedding(const SpectralEmbedding& embedding,
                                          int K, LabelMethod method,
                                          std::uint64_t seed,
                                          int restarts = 10) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (method == LabelMethod::KMeans)
    return kmeans(embedding.rows, K, seed, restarts);
  const auto centers = detail::furthest_point_centers(embedding.rows, K, 0);
  Eigen::MatrixXd C(K, embedding.rows.cols());
  for (int k = 0; k < K; ++k) C.row(k) = embedding.rows.row(centers[k]);
  std::vector<int> labels;
  detail::assign_nearest(embedding.rows, C, labels);
  for (int& l : labels) ++l;
  return labels;
}

struct PipelineConfig {
  int k_euc = 20;
  int k_noise = 20;
  int num_scales = 20;
  LadderMode ladder_mode = LadderMode::Exponential;
  int sigma_count = 20;
  std::optional<double> sigma_min;
  std::optional<double> sigma_max;
  std::optional<double> theta;  // denoising override
  std::optional<int> K;         // skips eigengap estimation
  int kmax = 12;
  int restarts = 10;
  LabelMethod method = LabelMethod::KMeans;
  std::uint64_t seed = 0;
  double eig_tol = 1e-8;
  // Assign removed labeled points to the Euclidean-nearest surviving
  // cluster instead of marking them noise.
  bool extend_removed = false;
};

struct ClusterReport {
  int n = 0;            // input points
  int N = 0;            // survivors after denoising
  double theta = 0;
  int K_hat = 1;
  double sigma_hat = 0;
  double eigengap = 0;
  std::vector<double> sigma_grid;
  Eigen::MatrixXd eigenvalues;   // sweep curves
  std::vector<int> labels;       // per input point; 0 for removed points
  std::vector<int> kept;
  int embedding_zero_rows = 0;
  double lambda2_at_sigma_hat = 0;   // degenerate single-cluster flag
  std::optional<AccuracyReport> accuracy;  // survivors with ground truth
  std::map<std::string, double> timings_ms;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Default sigma grid: equally spaced from the finest scale to half the
// full-merge scale of the denoised dendrogram. Beyond that the kernel sees
// one blob and the trivial first eigengap dominates every curve.
inline std::vector<double> auto_sigma_grid(const MultiscaleDendrogram& dd,
                                           const PipelineConfig& cfg) {
  double lo = cfg.sigma_min.value_or(dd.ladder.bottom());
  double hi = cfg.sigma_max.value_or(dd.merge_scale() / 2);
  if (hi <= lo) hi = cfg.sigma_max.value_or(dd.ladder.top());
  if (hi <= lo) hi = lo * 2;
  std::vector<double> grid(cfg.sigma_count);
  if (cfg.sigma_count == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < cfg.sigma_count; ++i)
    grid[i] = lo + (hi - lo) * i / (cfg.sigma_count - 1);
  return grid;
}

inline void extend_labels_to_removed(const LabeledPointCloud& data,
                                     const std::vector<int>& kept,
                                     std::vector<int>& labels) {
  std::vector<char> is_kept(data.points.n(), 0);
  for (int i : kept) is_kept[i] = 1;
  for (int i = 0; i < data.points.n(); ++i) {
    if (is_kept[i] || labels[i] != kNoiseLabel) continue;
    double best = std::numeric_limits<double>::infinity();
    int best_label = kNoiseLabel;
    for (int j : kept) {
      if (labels[j] == kNoiseLabel) continue;
      const double d =
          (data.points.coords.row(i) - data.points.coords.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        best_label = labels[j];
      }
    }
    labels[i] = best_label;
  }
}

}  // namespace detail

// The full pipeline: kNN graph, scale ladder, multiscale dendrogram,
// kNN-LLPD denoising, rebuild on the survivors, sigma sweep, eigengap
// selection, spectral embedding, final labels.
inline ClusterReport llpd_spectral_clustering(const LabeledPointCloud& data,
                                              const PipelineConfig& cfg) {
  detail::Stopwatch watch;
  ClusterReport rep;
  rep.n = data.points.n();

  NeighborGraph graph = build_knn_graph(data.points, cfg.k_euc);
  graph = ensure_connected(graph, data.points);
  rep.timings_ms["graph"] = watch.lap();

  ScaleLadder ladder = choose_scales(graph, cfg.ladder_mode, cfg.num_scales);
  LlpdIndex index = build_dendrogram(graph, ladder);
  rep.timings_ms["dendrogram"] = watch.lap();

  DenoiseReport dn = make_denoise_report(index, cfg.k_noise, cfg.theta);
  rep.theta = dn.theta;
  rep.kept = dn.kept;
  rep.N = static_cast<int>(dn.kept.size());
  LabeledPointCloud survivors = restrict_to(data, dn.kept);
  rep.timings_ms["denoise"] = watch.lap();

  // LLPD is recomputed on the denoised data.
  NeighborGraph graph2 = build_knn_graph(survivors.points, cfg.k_euc);
  graph2 = ensure_connected(graph2, survivors.points);
  ScaleLadder ladder2 = choose_scales(graph2, cfg.ladder_mode, cfg.num_scales);
  LlpdIndex index2 = build_dendrogram(graph2, ladder2);
  rep.timings_ms["rebuild"] = watch.lap();

  rep.sigma_grid = detail::auto_sigma_grid(index2.dendrogram, cfg);
  SigmaSweep sweep =
      sigma_sweep(index2.dendrogram, rep.sigma_grid, cfg.kmax, cfg.eig_tol);
  rep.eigenvalues = sweep.eigenvalues;
  rep.timings_ms["sweep"] = watch.lap();

  SweepSelection sel = estimate_K_sigma(sweep);
  if (cfg.K) {
    rep.K_hat = *cfg.K;
    // Best sigma for the requested K.
    int best_si = 0;
    double best_gap = -1;
    for (int si = 0; si < static_cast<int>(sweep.sigmas.size()); ++si) {
      if (rep.K_hat >= cfg.kmax) break;
      const double gap = sweep.eigenvalues(si, rep.K_hat) -
                         sweep.eigenvalues(si, rep.K_hat - 1);
      if (gap > best_gap) {
        best_gap = gap;
        best_si = si;
      }
    }
    sel.sigma_index = best_si;
    sel.sigma_hat = sweep.sigmas[best_si];
    sel.gap = best_gap;
  } else {
    rep.K_hat = sel.K_hat;
  }
  rep.sigma_hat = sel.sigma_hat;
  rep.eigengap = sel.gap;
  rep.lambda2_at_sigma_hat = sweep.eigenvalues(sel.sigma_index, 1);
  if (rep.K_hat == 1)
    std::cerr << "warning: eigengap selects a single cluster (lambda_2 = "
              << rep.lambda2_at_sigma_hat << ")\n";

  SpectralEmbedding embedding =
      embed(sweep.vectors[sel.sigma_index], std::min(rep.K_hat, cfg.kmax));
  rep.embedding_zero_rows = embedding.zero_rows;
  std::vector<int> survivor_labels =
      cluster_embedding(embedding, rep.K_hat, cfg.method, cfg.seed,
                        cfg.restarts);
  rep.timings_ms["label"] = watch.lap();

  rep.labels.assign(rep.n, kNoiseLabel);
  for (std::size_t r = 0; r < dn.kept.size(); ++r)
    rep.labels[dn.kept[r]] = survivor_labels[r];
  if (cfg.extend_removed)
    detail::extend_labels_to_removed(data, dn.kept, rep.labels);

  if (data.num_clusters > 0) {
    // Table-2 convention: score on surviving ground-truth-labeled points.
    std::vector<int> y, y_hat;
    for (std::size_t r = 0; r < dn.kept.size(); ++r) {
      if (survivors.labels[r] == kNoiseLabel) continue;
      y.push_back(survivors.labels[r]);
      y_hat.push_back(survivor_labels[r]);
    }
    if (!y.empty()) rep.accuracy = score_labels(y, y_hat);
  }
  rep.timings_ms["score"] = watch.lap();
  return rep;
}

// Same pipeline with Euclidean distances in the kernel: dense weights on
// the LLPD-denoised survivors and a dense eigensolver. Dense n x n work
// caps the input size.
inline constexpr int kEuclideanDenseCutoff = 2048;

inline ClusterReport euclidean_spectral_clustering(
    const LabeledPointCloud& data, const PipelineConfig& cfg) {
  if (data.points.n() > kEuclideanDenseCutoff)
    throw std::invalid_argument(
        "euclidean spectral clustering is dense; n exceeds cutoff " +
        std::to_string(kEuclideanDenseCutoff));
  detail::Stopwatch watch;
  ClusterReport rep;
  rep.n = data.points.n();

  NeighborGraph graph = build_knn_graph(data.points, cfg.k_euc);
  graph = ensure_connected(graph, data.points);
  ScaleLadder ladder = choose_scales(graph, cfg.ladder_mode, cfg.num_scales);
  LlpdIndex index = build_dendrogram(graph, ladder);
  DenoiseReport dn = make_denoise_report(index, cfg.k_noise, cfg.theta);
  rep.theta = dn.theta;
  rep.kept = dn.kept;
  rep.N = static_cast<int>(dn.kept.size());
  LabeledPointCloud survivors = restrict_to(data, dn.kept);
  rep.timings_ms["denoise"] = watch.lap();

  const int N = survivors.points.n();
  Eigen::MatrixXd dist(N, N);
  for (int i = 0; i < N; ++i) {
    dist(i, i) = 0;
    for (int j = i + 1; j < N; ++j) {
      const double d =
          std::sqrt(detail::sqdist(survivors.points.coords, i, j));
      dist(i, j) = dist(j, i) = d;
    }
  }
  NeighborGraph graph2 = build_knn_graph(survivors.points, cfg.k_euc);
  const double lo = cfg.sigma_min.value_or(graph2.min_weight());
  const double hi = cfg.sigma_max.value_or(2 * graph2.max_weight());
  rep.sigma_grid.resize(cfg.sigma_count);
  for (int i = 0; i < cfg.sigma_count; ++i)
    rep.sigma_grid[i] =
        cfg.sigma_count == 1 ? lo : lo + (hi - lo) * i / (cfg.sigma_count - 1);

  const int kmax = std::min(cfg.kmax, N);
  rep.eigenvalues.resize(cfg.sigma_count, kmax);
  std::vector<Eigen::MatrixXd> vecs(cfg.sigma_count);
  parallel_for(cfg.sigma_count, [&](int si) {
    const double sg = rep.sigma_grid[si];
    Eigen::MatrixXd W = (-(dist.array() / sg).square()).exp();
    Eigen::VectorXd d = W.rowwise().sum();
    Eigen::VectorXd dm = d.cwiseInverse().cwiseSqrt();
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(N, N) -
                        dm.asDiagonal() * W * dm.asDiagonal();
    L = 0.5 * (L + L.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    rep.eigenvalues.row(si) = es.eigenvalues().head(kmax);
    vecs[si] = es.eigenvectors().leftCols(kmax);
  });
  rep.timings_ms["sweep"] = watch.lap();

  SigmaSweep sweep;
  sweep.sigmas = rep.sigma_grid;
  sweep.eigenvalues = rep.eigenvalues;
  SweepSelection sel = estimate_K_sigma(sweep);
  rep.K_hat = cfg.K.value_or(sel.K_hat);
  rep.sigma_hat = sel.sigma_hat;
  rep.eigengap = sel.gap;
  rep.lambda2_at_sigma_hat = rep.eigenvalues(sel.sigma_index, 1);

  SpectralEmbedding embedding =
      embed(vecs[sel.sigma_index], std::min(rep.K_hat, kmax));
  rep.embedding_zero_rows = embedding.zero_rows;
  std::vector<int> survivor_labels = cluster_embedding(
      embedding, rep.K_hat, cfg.method, cfg.seed, cfg.restarts);

  rep.labels.assign(rep.n, kNoiseLabel);
  for (std::size_t r = 0; r < dn.kept.size(); ++r)
    rep.labels[dn.kept[r]] = survivor_labels[r];

  if (data.num_clusters > 0) {
    std::vector<int> y, y_hat;
    for (std::size_t r = 0; r < dn.kept.size(); ++r) {
      if (survivors.labels[r] == kNoiseLabel) continue;
      y.push_back(survivors.labels[r]);
      y_hat.push_back(survivor_labels[r]);
    }
    if (!y.empty()) rep.accuracy = score_labels(y, y_hat);
  }
  rep.timings_ms["total"] = watch.lap();
  return rep;
}

// K-means on raw coordinates.
inline std::vector<int> kmeans_baseline(const PointCloud& points, int K,
                                        std::uint64_t seed, int restarts = 10) {
  return kmeans(points.coords, K, seed, restarts);
}

}  // namespace llpd
