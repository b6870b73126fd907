#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "llpd/exact_llpd.hpp"
#include "llpd/point_cloud.hpp"
#include "llpd/union_find.hpp"

namespace llpd {

// log volume of the d-dimensional unit ball, pi^(d/2) / Gamma(d/2 + 1).
// Bound evaluations work in logs throughout: the plain volume underflows
// a double near d = 750.
inline double log_unit_ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  return 0.5 * d * std::log(3.14159265358979323846) -
         std::lgamma(0.5 * d + 1.0);
}

inline double unit_ball_volume(int d) {
  return std::exp(log_unit_ball_volume(d));
}

// Sentinel returned when a bound's defining inequality is unsatisfiable.
inline constexpr double kBoundInfeasible =
    std::numeric_limits<double>::quiet_NaN();

struct LdlnParams {
  int d = 1;               // intrinsic dimension
  int D = 3;               // ambient dimension
  double kappa = 1.0;      // regularity constant, >= 1
  double Hd_S = 1.0;       // d-dimensional measure of one cluster set
  double HD_noise = 1.0;   // D-volume of the noise region
  double tau = 0.0;        // tube radius
  int n_l = 1;             // per-cluster sample size
  long long n_noise = 0;   // noise sample size
  double t = 0.01;         // confidence level
  double delta = 1.0;      // between-cluster Euclidean separation
  int k_noise = 20;
  // D-volume of the tube B(S, tau); required for the tau > 0 branch,
  // user-supplied or Monte Carlo estimated.
  std::optional<double> tube_volume;
};

namespace detail {

// Monotone bisection: finds the boundary of {eps : feasible(eps)} given
// that feasibility is monotone in eps. `want_smallest` selects whether the
// feasible side sits above (smallest feasible) or below (largest feasible).
template <typename F>
double bisect_boundary(F feasible, double lo, double hi, bool want_smallest,
                       double rel_tol = 1e-9) {
  // lo is infeasible, hi is feasible when want_smallest (and conversely).
  for (int it = 0; it < 200 && (hi - lo) > rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool ok = feasible(mid);
    if (ok == want_smallest)
      hi = mid;
    else
      lo = mid;
  }
  return want_smallest ? hi : lo;
}

}  // namespace detail

// Smallest eps such that the within-cluster sampling condition holds for
// n_l points: with probability at least 1-t all pairwise LLPDs inside one
// cluster stay below eps. The tau = 0 branch uses the intrinsic-dimension
// condition; tau > 0 switches to the tube-volume condition.
inline double within_cluster_bound(const LdlnParams& p) {
  if (p.t <= 0 || p.t >= 1) throw std::invalid_argument("t must be in (0,1)");
  const double log_n = std::log(static_cast<double>(p.n_l));
  std::function<bool(double)> feasible;
  if (p.tau <= 0) {
    const double log_vd = log_unit_ball_volume(p.d);
    feasible = [&, log_vd](double eps) {
      const double log_a = std::log(p.kappa * p.Hd_S) -
                           p.d * std::log(eps / 4) - log_vd;
      const double log_b = std::log(p.kappa * p.Hd_S) -
                           p.d * std::log(eps / 8) - log_vd - std::log(p.t);
      // n >= a * log(b), all in logs to survive extreme dimensions.
      return log_b > 0 && log_n >= log_a + std::log(log_b);
    };
  } else {
    if (!p.tube_volume)
      throw std::invalid_argument(
          "tau > 0 requires the tube volume H^D(B(S,tau))");
    const double log_vD = log_unit_ball_volume(p.D);
    const double log_C =
        2 * std::log(p.kappa) + (2 * p.D + p.d) * std::log(2.0);
    feasible = [&, log_vD, log_C](double eps) {
      const double l4 = p.d * std::log(eps / 4) +
                        (p.D - p.d) * std::log(std::min(p.tau, eps / 4)) +
                        log_vD;
      const double l8 = p.d * std::log(eps / 8) +
                        (p.D - p.d) * std::log(std::min(p.tau, eps / 8)) +
                        log_vD;
      const double log_a = log_C + std::log(*p.tube_volume) - l4;
      const double log_b =
          log_C + std::log(*p.tube_volume) - l8 - std::log(p.t);
      return log_b > 0 && log_n >= log_a + std::log(log_b);
    };
  }
  // Feasibility is monotone increasing in eps.
  double hi = 1.0;
  while (!feasible(hi) && hi < 1e12) hi *= 2;
  if (!feasible(hi)) return kBoundInfeasible;
  double lo = hi;
  while (feasible(lo) && lo > 1e-300) lo /= 2;
  return detail::bisect_boundary(feasible, lo, hi, /*want_smallest=*/true);
}

// Largest eps such that the noise cardinality admits no eps-chain across
// the delta gap: with probability at least 1-t the minimal between-cluster
// LLPD exceeds eps.
inline double between_cluster_bound(const LdlnParams& p) {
  if (p.n_noise < 1) throw std::invalid_argument("need noise points");
  if (p.delta <= 0) throw std::invalid_argument("delta must be positive");
  const double log_vD = log_unit_ball_volume(p.D);
  auto feasible = [&](double eps) {
    const double steps = std::floor(p.delta / eps);
    if (steps < 1) return false;
    const double log_cap = std::log(p.t) / steps + std::log(p.HD_noise) -
                           p.D * std::log(eps) - log_vD;
    return std::log(static_cast<double>(p.n_noise)) <= log_cap;
  };
  // Feasibility is monotone decreasing in eps.
  double lo = p.delta;
  while (!feasible(lo) && lo > 1e-300) lo /= 2;
  if (!feasible(lo)) return kBoundInfeasible;
  return detail::bisect_boundary(feasible, lo, p.delta,
                                 /*want_smallest=*/false);
}

// Closed-form lower bound on the minimal kNN-LLPD of noise points.
inline double noise_knn_bound(const LdlnParams& p) {
  if (p.k_noise < 1) throw std::invalid_argument("kNoise must be >= 1");
  const double k = static_cast<double>(p.k_noise);
  const double log_num =
      std::log(2.0) + std::log(p.HD_noise) + std::log(2.0 * p.t) / k;
  const double log_den =
      log_unit_ball_volume(p.D) +
      ((k + 1) / k) * std::log((k + 1) * static_cast<double>(p.n_noise));
  return std::exp((log_num - log_den) / p.D);
}

// Positive root of k - log(k+1) = log(n_noise) - log(2t), the kNoise that
// maximizes the noise kNN-LLPD lower bound. Returns the real root; callers
// round to the nearest integer >= 1.
inline double optimal_k_noise(long long n_noise, double t) {
  if (n_noise < 2) throw std::invalid_argument("need at least 2 noise points");
  const double rhs =
      std::log(static_cast<double>(n_noise)) - std::log(2.0 * t);
  auto g = [](double k) { return k - std::log(k + 1.0); };
  if (rhs <= 0) return 0.0;  // boundary: root collapses toward zero
  double lo = 0, hi = 1;
  while (g(hi) < rhs) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < rhs ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline int optimal_k_noise_int(long long n_noise, double t) {
  return std::max(1, static_cast<int>(std::lround(optimal_k_noise(n_noise, t))));
}

struct DiagnosticsReport {
  double eps_in = 0;    // max within-cluster LLPD
  double eps_btw = 0;   // min between-cluster LLPD
  double eps_nse = 0;   // min noise kNN-LLPD (paths through noise only)
  double delta_emp = 0; // min between-cluster Euclidean distance
  double zeta_N = 0;    // cluster balance, N / min cluster size
};

namespace detail {

// Single-linkage ascent over a precomputed MST. eps_in is the largest of
// the per-cluster completion scales (the merge height at which one
// component first holds the whole cluster, paths through any points);
// eps_btw is the height at which two distinct cluster labels first meet.
inline void mst_diagnostics(const std::vector<Edge>& mst,
                            const std::vector<int>& labels, int num_clusters,
                            int n, double& eps_in, double& eps_btw) {
  std::vector<Edge> edges(mst);
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.w < b.w; });
  UnionFind uf(n);
  std::vector<long> cluster_total(num_clusters + 1, 0);
  for (int l : labels)
    if (l != kNoiseLabel) ++cluster_total[l];
  std::vector<std::vector<long>> counts(
      n, std::vector<long>(num_clusters + 1, 0));
  for (int i = 0; i < n; ++i)
    if (labels[i] != kNoiseLabel) counts[i][labels[i]] = 1;

  std::vector<char> done(num_clusters + 1, 0);
  int clusters_done = 0;
  eps_in = 0;
  eps_btw = -1;
  // Singleton clusters are complete at height zero.
  for (int l = 1; l <= num_clusters; ++l)
    if (cluster_total[l] <= 1) {
      done[l] = 1;
      ++clusters_done;
    }
  for (const auto& e : edges) {
    const int a = uf.find(e.i), b = uf.find(e.j);
    if (a == b) continue;
    if (eps_btw < 0) {
      // Before the first cross-cluster merge each side holds at most one
      // label; the merge is cross-cluster iff both sides are labeled and
      // the labels differ.
      int la = 0, lb = 0;
      for (int l = 1; l <= num_clusters; ++l) {
        if (counts[a][l] > 0) la = l;
        if (counts[b][l] > 0) lb = l;
      }
      if (la > 0 && lb > 0 && la != lb) eps_btw = e.w;
    }
    const int r = uf.unite(a, b);
    const int other = (r == a) ? b : a;
    for (int l = 1; l <= num_clusters; ++l) {
      counts[r][l] = counts[a][l] + counts[b][l];
      if (!done[l] && counts[r][l] == cluster_total[l]) {
        done[l] = 1;
        eps_in = std::max(eps_in, e.w);
        ++clusters_done;
      }
    }
    counts[other].clear();
    counts[other].shrink_to_fit();
    if (eps_btw >= 0 && clusters_done == num_clusters) break;
  }
}

}  // namespace detail

// Exact empirical diagnostics from minimum spanning trees: eps_in and
// eps_btw over the full point set, eps_nse over the noise points alone.
inline DiagnosticsReport empirical_diagnostics(const LabeledPointCloud& data,
                                               int k_noise) {
  if (data.num_clusters < 1)
    throw std::invalid_argument("ground-truth labels required");
  const int n = data.points.n();
  DiagnosticsReport rep;

  const auto mst = minimum_spanning_tree(complete_graph(data.points));
  double eps_in = 0, eps_btw = -1;
  detail::mst_diagnostics(mst, data.labels, data.num_clusters, n, eps_in,
                          eps_btw);
  if (eps_btw < 0 && data.num_clusters >= 2)
    throw std::runtime_error("between-cluster distance not realized");
  rep.eps_in = eps_in;
  rep.eps_btw = eps_btw;

  // Noise kNN-LLPD with paths restricted to the noise set.
  std::vector<int> noise_ids;
  for (int i = 0; i < n; ++i)
    if (data.labels[i] == kNoiseLabel) noise_ids.push_back(i);
  if (static_cast<int>(noise_ids.size()) > k_noise) {
    PointCloud noise;
    noise.coords.resize(noise_ids.size(), data.points.dim());
    for (std::size_t r = 0; r < noise_ids.size(); ++r)
      noise.coords.row(r) = data.points.coords.row(noise_ids[r]);
    auto nmst = minimum_spanning_tree(complete_graph(noise));
    std::sort(nmst.begin(), nmst.end(),
              [](const Edge& a, const Edge& b) { return a.w < b.w; });
    UnionFind uf(static_cast<int>(noise_ids.size()));
    rep.eps_nse = nmst.empty() ? 0 : nmst.back().w;
    for (const auto& e : nmst) {
      uf.unite(e.i, e.j);
      if (uf.component_size(e.i) >= k_noise + 1) {
        rep.eps_nse = e.w;
        break;
      }
    }
  }

  // Min cross-cluster Euclidean distance.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (data.labels[i] == kNoiseLabel) continue;
    for (int j = i + 1; j < n; ++j) {
      if (data.labels[j] == kNoiseLabel || data.labels[j] == data.labels[i])
        continue;
      best = std::min(best, detail::sqdist(data.points.coords, i, j));
    }
  }
  rep.delta_emp = std::sqrt(best);

  std::vector<long> sizes(data.num_clusters + 1, 0);
  for (int l : data.labels)
    if (l != kNoiseLabel) ++sizes[l];
  long smallest = *std::min_element(sizes.begin() + 1, sizes.end());
  rep.zeta_N = static_cast<double>(n) / static_cast<double>(smallest);
  return rep;
}

// Phase-transition plot data: sorted pairwise exact LLPDs tagged
// within/between/noise plus the two bound values. Pair count is capped by
// subsampling points uniformly, so the export stays plot-sized.
inline void save_phase_transition_csv(const LabeledPointCloud& data,
                                      double within_bound,
                                      double between_bound,
                                      const std::string& path,
                                      int max_points = 2000) {
  const int n = data.points.n();
  std::vector<int> pick;
  if (n <= max_points) {
    pick.resize(n);
    for (int i = 0; i < n; ++i) pick[i] = i;
  } else {
    const double step = static_cast<double>(n) / max_points;
    for (int r = 0; r < max_points; ++r)
      pick.push_back(static_cast<int>(r * step));
  }
  PointCloud sub;
  sub.coords.resize(pick.size(), data.points.dim());
  for (std::size_t r = 0; r < pick.size(); ++r)
    sub.coords.row(r) = data.points.coords.row(pick[r]);
  const Eigen::MatrixXd M = exact_llpd_matrix(complete_graph(sub));

  struct Row {
    double llpd;
    int tag;  // 0 within, 1 between, 2 noise
  };
  std::vector<Row> rows;
  rows.reserve(pick.size() * (pick.size() - 1) / 2);
  for (std::size_t a = 0; a < pick.size(); ++a)
    for (std::size_t b = a + 1; b < pick.size(); ++b) {
      const int la = data.labels[pick[a]], lb = data.labels[pick[b]];
      int tag = 2;
      if (la != kNoiseLabel && lb != kNoiseLabel)
        tag = (la == lb) ? 0 : 1;
      rows.push_back({M(a, b), tag});
    }
  std::sort(rows.begin(), rows.end(),
            [](const Row& x, const Row& y) { return x.llpd < y.llpd; });

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.precision(17);
    out << "llpd,tag,within_bound,between_bound\n";
    for (const auto& r : rows)
      out << r.llpd << ',' << (r.tag == 0 ? "within" : r.tag == 1 ? "between" : "noise")
          << ',' << within_bound << ',' << between_bound << '\n';
  }
  std::filesystem::rename(tmp, path);
}

// Same diagnostics from an approximate-LLPD index over the same points;
// agrees with the exact report within the ladder's Prop.-10 factor.
inline DiagnosticsReport approx_diagnostics(const LabeledPointCloud& data,
                                            const LlpdIndex& index,
                                            int k_noise) {
  const auto& dd = index.dendrogram;
  const int n = dd.n;
  DiagnosticsReport rep;
  rep.eps_in = 0;
  rep.eps_btw = std::numeric_limits<double>::infinity();
  // Scan scales: a cluster's eps_in is the first scale where one component
  // holds the whole cluster; eps_btw the first scale where two clusters meet.
  std::vector<long> totals(data.num_clusters + 1, 0);
  for (int l : data.labels)
    if (l != kNoiseLabel) ++totals[l];
  std::vector<char> done(data.num_clusters + 1, 0);
  bool btw_found = false;
  for (int s = 0; s < dd.num_scales(); ++s) {
    const int nc = dd.num_components(s);
    std::vector<std::vector<long>> counts(nc,
                                          std::vector<long>(data.num_clusters + 1, 0));
    for (int i = 0; i < n; ++i)
      if (data.labels[i] != kNoiseLabel) ++counts[dd.comp[s][i]][data.labels[i]];
    for (int c = 0; c < nc && !btw_found; ++c) {
      int present = 0;
      for (int l = 1; l <= data.num_clusters; ++l)
        if (counts[c][l] > 0) ++present;
      if (present >= 2) {
        rep.eps_btw = dd.ladder.t(s);
        btw_found = true;
      }
    }
    for (int l = 1; l <= data.num_clusters; ++l) {
      if (done[l]) continue;
      for (int c = 0; c < nc; ++c)
        if (counts[c][l] == totals[l]) {
          rep.eps_in = std::max(rep.eps_in, dd.ladder.t(s));
          done[l] = 1;
          break;
        }
    }
    bool all_done = btw_found;
    for (int l = 1; l <= data.num_clusters && all_done; ++l)
      all_done = done[l];
    if (all_done) break;
  }
  const auto exact = empirical_diagnostics(data, k_noise);
  rep.eps_nse = exact.eps_nse;
  rep.delta_emp = exact.delta_emp;
  rep.zeta_N = exact.zeta_N;
  return rep;
}

}  // namespace llpd
