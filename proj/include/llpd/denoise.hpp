#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "llpd/dendrogram.hpp"
#include "llpd/point_cloud.hpp"

namespace llpd {

struct DenoiseReport {
  std::vector<double> beta;  // per-point kNN-LLPD radius
  double theta = 0;
  int k_noise = 0;
  std::vector<int> kept;     // indices of surviving points, ascending
  std::vector<int> removed;
};

// Threshold at the elbow of the sorted beta curve. Because beta values are
// ladder scales, the curve is a staircase; a sharp phase transition shows
// up as a wide log-gap between occupied values with negligible mass inside.
// When such a gap exists (ratio >= 2, interior <= 1% of points, at least
// max(3, 0.2% n) points on each side) theta is the value at its lower edge.
// Shallow curves fall back to the knee: the point of largest deviation
// below the chord of the smoothed sorted curve.
inline double select_theta(const std::vector<double>& beta) {
  const int n = static_cast<int>(beta.size());
  if (n < 3) throw std::invalid_argument("need at least 3 beta values");
  std::vector<double> s(beta);
  std::sort(s.begin(), s.end());

  std::vector<double> vals;
  std::vector<int> counts;
  for (double v : s) {
    if (vals.empty() || v > vals.back()) {
      vals.push_back(v);
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }
  if (vals.size() == 1) {
    std::cerr << "warning: constant beta values; nothing will be removed\n";
    return vals[0];
  }

  const int budget = std::max(1, n / 100);
  const int floor_mass = std::max(3, static_cast<int>(std::lround(0.002 * n)));
  std::vector<int> cum(vals.size());
  int acc = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) cum[i] = (acc += counts[i]);

  double best_gap = 0;
  int best_i = -1;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    if (cum[i] < floor_mass || vals[i] <= 0) continue;
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      const int interior = cum[j - 1] - cum[i];
      if (interior > budget) break;
      if (n - cum[j - 1] < floor_mass) continue;
      const double gap = std::log(vals[j] / vals[i]);
      if (gap > best_gap) {
        best_gap = gap;
        best_i = static_cast<int>(i);
      }
    }
  }
  if (best_i >= 0 && best_gap >= std::log(2.0)) return vals[best_i];

  // Chord knee on the smoothed sorted curve.
  const int w = std::max(1, n / 100);
  std::vector<double> sm(n);
  if (w > 1) {
    double run = 0;
    int lo = 0, hi = 0;  // window [lo, hi)
    for (int i = 0; i < n; ++i) {
      const int want_lo = std::max(0, i - w / 2);
      const int want_hi = std::min(n, i + (w + 1) / 2);
      while (hi < want_hi) run += s[hi++];
      while (lo < want_lo) run -= s[lo++];
      sm[i] = run / (hi - lo);
    }
  } else {
    sm = s;
  }
  const double slope = (sm[n - 1] - sm[0]) / (n - 1);
  double best_dev = -std::numeric_limits<double>::infinity();
  int best = 0;
  for (int i = 0; i < n; ++i) {
    const double dev = (sm[0] + slope * i) - sm[i];
    if (dev > best_dev) {
      best_dev = dev;
      best = i;
    }
  }
  return s[best];
}

// Per-point beta and the threshold decision; removal itself is done by the
// caller so the rebuild can be composed (see pipeline).
inline DenoiseReport make_denoise_report(const LlpdIndex& index, int k_noise,
                                         std::optional<double> theta_override =
                                             std::nullopt) {
  DenoiseReport rep;
  rep.k_noise = k_noise;
  rep.beta = knn_llpd_radius(index, k_noise);
  rep.theta = theta_override ? *theta_override : select_theta(rep.beta);
  const double cap = rep.theta * (1 + 1e-12);
  for (int i = 0; i < static_cast<int>(rep.beta.size()); ++i) {
    if (rep.beta[i] <= cap)
      rep.kept.push_back(i);
    else
      rep.removed.push_back(i);
  }
  if (rep.kept.empty())
    throw std::runtime_error("denoising removed every point; theta too small");
  return rep;
}

inline LabeledPointCloud restrict_to(const LabeledPointCloud& data,
                                     const std::vector<int>& kept) {
  LabeledPointCloud out;
  out.points.coords.resize(kept.size(), data.points.dim());
  out.labels.resize(kept.size());
  out.num_clusters = data.num_clusters;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    out.points.coords.row(r) = data.points.coords.row(kept[r]);
    out.labels[r] = data.labels[kept[r]];
  }
  return out;
}

// Sorted-beta curve for plotting: rows (rank, beta).
inline void save_sorted_beta_csv(const std::vector<double>& beta,
                                 const std::string& path) {
  std::vector<double> s(beta);
  std::sort(s.begin(), s.end());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.precision(17);
    out << "rank,beta\n";
    for (std::size_t i = 0; i < s.size(); ++i) out << i << ',' << s[i] << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace llpd
