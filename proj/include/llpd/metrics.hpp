#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "llpd/point_cloud.hpp"

namespace llpd {

struct AccuracyReport {
  double oa = 0;     // overall accuracy under the optimal alignment
  double aa = 0;     // per-cluster accuracy, averaged uniformly
  double kappa = 0;  // chance-corrected agreement
  // alignment[p] = true label assigned to predicted label p+1 (1-based
  // labels, 0 entries for padded predicted labels).
  std::vector<int> alignment;
};

namespace detail {

// Hungarian algorithm (potentials form) for a square cost matrix;
// returns the column assigned to each row, minimizing total cost.
inline std::vector<int> hungarian_min(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, INF);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = INF;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

struct Contingency {
  // counts[t][p]: points with true label t+1 and predicted label p+1,
  // restricted to ground-truth-labeled points.
  std::vector<std::vector<long>> counts;
  long labeled = 0;
  int num_true = 0, num_pred = 0;
};

inline Contingency contingency(const std::vector<int>& y,
                               const std::vector<int>& y_hat) {
  if (y.size() != y_hat.size())
    throw std::invalid_argument("label vectors differ in length");
  int kt = 0, kp = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == kNoiseLabel) continue;
    kt = std::max(kt, y[i]);
    kp = std::max(kp, y_hat[i]);
  }
  Contingency c;
  c.num_true = kt;
  c.num_pred = kp;
  c.counts.assign(kt, std::vector<long>(kp, 0));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == kNoiseLabel) continue;
    ++c.labeled;
    if (y_hat[i] != kNoiseLabel) ++c.counts[y[i] - 1][y_hat[i] - 1];
    // A noise prediction on a labeled point matches nothing: an error.
  }
  if (c.labeled == 0) throw std::invalid_argument("no labeled points to score");
  return c;
}

}  // namespace detail

// Maximal agreement over label permutations (Hungarian on the padded
// contingency matrix). Noise entries in the ground truth are excluded from
// scoring; noise predictions on labeled points count as errors.
inline std::pair<double, std::vector<int>> agreement(
    const std::vector<int>& y, const std::vector<int>& y_hat) {
  const auto c = detail::contingency(y, y_hat);
  const int k = std::max(c.num_true, std::max(c.num_pred, 1));
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (int t = 0; t < c.num_true; ++t)
    for (int p = 0; p < c.num_pred; ++p)
      cost[t][p] = -static_cast<double>(c.counts[t][p]);
  const auto row_to_col = detail::hungarian_min(cost);

  long matched = 0;
  std::vector<int> alignment(k, 0);  // predicted -> true
  for (int t = 0; t < k; ++t) {
    const int p = row_to_col[t];
    alignment[p] = t + 1;
    if (t < c.num_true && p < c.num_pred) matched += c.counts[t][p];
  }
  return {static_cast<double>(matched) / static_cast<double>(c.labeled),
          alignment};
}

inline double average_accuracy(const std::vector<int>& y,
                               const std::vector<int>& y_hat,
                               const std::vector<int>& alignment) {
  const auto c = detail::contingency(y, y_hat);
  double total = 0;
  int clusters = 0;
  for (int t = 0; t < c.num_true; ++t) {
    long size = 0, hit = 0;
    for (int p = 0; p < c.num_pred; ++p) {
      size += c.counts[t][p];
      if (p < static_cast<int>(alignment.size()) && alignment[p] == t + 1)
        hit += c.counts[t][p];
    }
    // Points of cluster t predicted as noise still belong to the cluster.
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == t + 1 && y_hat[i] == kNoiseLabel) ++size;
    if (size == 0)
      throw std::invalid_argument("empty ground-truth cluster " +
                                  std::to_string(t + 1));
    total += static_cast<double>(hit) / static_cast<double>(size);
    ++clusters;
  }
  return total / clusters;
}

inline double cohens_kappa(const std::vector<int>& y,
                           const std::vector<int>& y_hat,
                           const std::vector<int>& alignment) {
  const auto c = detail::contingency(y, y_hat);
  const double n = static_cast<double>(c.labeled);
  long matched = 0;
  std::vector<long> row(c.num_true, 0), col_aligned(c.num_true, 0);
  for (int t = 0; t < c.num_true; ++t)
    for (int p = 0; p < c.num_pred; ++p) {
      row[t] += c.counts[t][p];
      if (p < static_cast<int>(alignment.size()) && alignment[p] == t + 1)
        matched += c.counts[t][p];
    }
  // Predicted-label marginals mapped through the alignment.
  for (int p = 0; p < c.num_pred; ++p) {
    const int t = p < static_cast<int>(alignment.size()) ? alignment[p] : 0;
    if (t >= 1 && t <= c.num_true)
      for (int tt = 0; tt < c.num_true; ++tt)
        col_aligned[t - 1] += c.counts[tt][p];
  }
  // True-label marginals count every labeled point, including those the
  // prediction marked as noise; noise predictions carry no aligned column.
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != kNoiseLabel && y_hat[i] == kNoiseLabel) ++row[y[i] - 1];

  double po = static_cast<double>(matched) / n;
  double pe = 0;
  for (int t = 0; t < c.num_true; ++t)
    pe += (static_cast<double>(row[t]) / n) *
          (static_cast<double>(col_aligned[t]) / n);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

inline AccuracyReport score_labels(const std::vector<int>& y,
                                   const std::vector<int>& y_hat) {
  AccuracyReport rep;
  auto [oa, alignment] = agreement(y, y_hat);
  rep.oa = oa;
  rep.alignment = alignment;
  rep.aa = average_accuracy(y, y_hat, alignment);
  rep.kappa = cohens_kappa(y, y_hat, alignment);
  return rep;
}

}  // namespace llpd
