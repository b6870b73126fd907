#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "llpd/neighbor_graph.hpp"

namespace llpd {

enum class LadderMode { Exponential, Percentile };

struct ScaleLadder {
  std::vector<double> thresholds;  // strictly increasing
  LadderMode mode = LadderMode::Exponential;

  int count() const { return static_cast<int>(thresholds.size()); }
  double t(int s) const { return thresholds[s]; }
  double top() const { return thresholds.back(); }
  double bottom() const { return thresholds.front(); }

  // Largest ratio between consecutive scales, the Prop.-10 approximation
  // factor. 1 for a degenerate single-scale ladder.
  double max_ratio() const {
    double r = 1.0;
    for (std::size_t s = 1; s < thresholds.size(); ++s)
      r = std::max(r, thresholds[s] / thresholds[s - 1]);
    return r;
  }
};

// Exponential mode: t_s = t_min * r^(s-1) with r = (t_max/t_min)^(1/(m-1))
// over the positive edge-weight range; the top scale is pinned to the exact
// maximum so the coarsest graph always contains every edge. Percentile
// mode: t_s = the s*(100/m)-th percentile of edge weights (nearest rank).
inline ScaleLadder choose_scales(const NeighborGraph& graph, LadderMode mode,
                                 int m) {
  if (graph.edges.empty()) throw std::invalid_argument("graph has no edges");
  if (m < 2) throw std::invalid_argument("need at least 2 scales");

  double t_min = std::numeric_limits<double>::infinity();
  double t_max = 0;
  for (const auto& e : graph.edges) {
    if (e.w > 0) t_min = std::min(t_min, e.w);
    t_max = std::max(t_max, e.w);
  }
  if (!(t_max > 0))
    throw std::invalid_argument("all edges have zero weight");

  ScaleLadder ladder;
  ladder.mode = mode;
  if (t_max <= t_min * (1 + 1e-12)) {
    std::cerr << "warning: all edge weights equal; degenerate 1-scale ladder\n";
    ladder.thresholds = {t_max};
    return ladder;
  }
  if (mode == LadderMode::Exponential) {
    const double r = std::pow(t_max / t_min, 1.0 / (m - 1));
    ladder.thresholds.resize(m);
    for (int s = 0; s < m; ++s) ladder.thresholds[s] = t_min * std::pow(r, s);
    ladder.thresholds[m - 1] = t_max;
  } else {
    std::vector<double> w;
    w.reserve(graph.edges.size());
    for (const auto& e : graph.edges) w.push_back(e.w);
    std::sort(w.begin(), w.end());
    ladder.thresholds.reserve(m);
    for (int s = 1; s <= m; ++s) {
      const double q = static_cast<double>(s) / m;
      std::size_t idx = static_cast<std::size_t>(
          std::ceil(q * static_cast<double>(w.size()))) - 1;
      idx = std::min(idx, w.size() - 1);
      const double v = w[idx];
      if (ladder.thresholds.empty() || v > ladder.thresholds.back())
        ladder.thresholds.push_back(v);
    }
    if (ladder.thresholds.back() < t_max) ladder.thresholds.push_back(t_max);
  }
  return ladder;
}

// Exponential ladder whose consecutive-scale ratio is at most `ratio`;
// the scale count follows from the edge-weight range.
inline ScaleLadder choose_scales_by_ratio(const NeighborGraph& graph,
                                          double ratio) {
  if (ratio <= 1.0) throw std::invalid_argument("ratio must exceed 1");
  double t_min = std::numeric_limits<double>::infinity();
  double t_max = 0;
  for (const auto& e : graph.edges) {
    if (e.w > 0) t_min = std::min(t_min, e.w);
    t_max = std::max(t_max, e.w);
  }
  if (!(t_max > 0)) throw std::invalid_argument("all edges have zero weight");
  if (t_max <= t_min * (1 + 1e-12)) {
    ScaleLadder one;
    one.thresholds = {t_max};
    return one;
  }
  const int m = std::max(
      2, 1 + static_cast<int>(std::ceil(std::log(t_max / t_min) /
                                        std::log(ratio))));
  return choose_scales(graph, LadderMode::Exponential, m);
}

}  // namespace llpd
