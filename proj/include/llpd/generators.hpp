#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "llpd/point_cloud.hpp"
#include "llpd/random.hpp"

namespace llpd {

enum class DatasetKind { FourLines, NineGaussians, ConcentricSpheres, ParallelPlanes };

inline DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "four-lines") return DatasetKind::FourLines;
  if (s == "nine-gaussians") return DatasetKind::NineGaussians;
  if (s == "concentric-spheres") return DatasetKind::ConcentricSpheres;
  if (s == "parallel-planes") return DatasetKind::ParallelPlanes;
  throw std::invalid_argument("unknown dataset kind: " + s);
}

struct GeneratorSpec {
  DatasetKind kind = DatasetKind::NineGaussians;
  std::uint64_t seed = 0;
  // Joint multiplier on all per-cluster sizes and the noise count.
  double scale = 1.0;

  static GeneratorSpec parse(const std::string& kind, std::uint64_t seed,
                             double scale) {
    if (scale <= 0) throw std::invalid_argument("scale must be positive");
    return GeneratorSpec{dataset_kind_from_string(kind), seed, scale};
  }
};

namespace detail {

inline int scaled(int count, double mult) {
  const int c = static_cast<int>(std::lround(count * mult));
  if (c < 1)
    throw std::invalid_argument("scale multiplier leaves an empty cluster");
  return c;
}

// Four elongated horizontal segments separated by vertical gaps of
// delta = 0.9001 (the separation the full-size dataset uses), with uniform
// planar noise over the bounding box. Long segments span the box; short
// ones sit centered between them.
inline LabeledPointCloud gen_four_lines(const GeneratorSpec& spec) {
  constexpr double delta = 0.9001;
  const int n_long = scaled(40000, spec.scale);
  const int n_short = scaled(8000, spec.scale);
  const int n_noise = scaled(20000, spec.scale);
  struct Seg {
    double x0, x1, y;
    int count;
  };
  const Seg segs[4] = {{0.0, 4.0, 0.0, n_long},
                       {0.0, 4.0, 3 * delta, n_long},
                       {1.6, 2.4, delta, n_short},
                       {1.6, 2.4, 2 * delta, n_short}};
  const int total = 2 * n_long + 2 * n_short + n_noise;
  LabeledPointCloud out;
  out.points.coords.resize(total, 2);
  out.labels.resize(total);
  out.num_clusters = 4;
  int row = 0;
  for (int l = 0; l < 4; ++l) {
    Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(l));
    for (int i = 0; i < segs[l].count; ++i, ++row) {
      out.points.coords(row, 0) = rng.uniform(segs[l].x0, segs[l].x1);
      out.points.coords(row, 1) = segs[l].y;
      out.labels[row] = l + 1;
    }
  }
  Rng rng = Rng::stream(spec.seed, 4);
  for (int i = 0; i < n_noise; ++i, ++row) {
    out.points.coords(row, 0) = rng.uniform(0.0, 4.0);
    out.points.coords(row, 1) = rng.uniform(0.0, 3 * delta);
    out.labels[row] = kNoiseLabel;
  }
  return out;
}

// Nine isotropic Gaussians on a lightly perturbed 3x3 grid of spacing 1,
// five with covariance 0.01*I and four with 0.04*I, plus 50 uniform noise
// points over the surrounding box.
inline LabeledPointCloud gen_nine_gaussians(const GeneratorSpec& spec) {
  const int n_per = scaled(50, spec.scale);
  const int n_noise = scaled(50, spec.scale);
  // Fixed perturbations of the grid; magnitudes well below the spacing.
  constexpr double px[9] = {0.04, -0.06, 0.02, -0.03, 0.05, -0.02, 0.06, -0.04, 0.01};
  constexpr double py[9] = {-0.05, 0.03, 0.06, 0.02, -0.04, 0.05, -0.01, 0.04, -0.06};
  constexpr double sd[9] = {0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1};
  const int total = 9 * n_per + n_noise;
  LabeledPointCloud out;
  out.points.coords.resize(total, 2);
  out.labels.resize(total);
  out.num_clusters = 9;
  int row = 0;
  for (int l = 0; l < 9; ++l) {
    const double cx = static_cast<double>(l % 3) + px[l];
    const double cy = static_cast<double>(l / 3) + py[l];
    Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(l));
    for (int i = 0; i < n_per; ++i, ++row) {
      out.points.coords(row, 0) = cx + sd[l] * rng.normal();
      out.points.coords(row, 1) = cy + sd[l] * rng.normal();
      out.labels[row] = l + 1;
    }
  }
  Rng rng = Rng::stream(spec.seed, 9);
  for (int i = 0; i < n_noise; ++i, ++row) {
    out.points.coords(row, 0) = rng.uniform(-0.5, 2.5);
    out.points.coords(row, 1) = rng.uniform(-0.5, 2.5);
    out.labels[row] = kNoiseLabel;
  }
  return out;
}

// Three concentric 2-spheres of radii 1, 1.5, 2 (uniform, equal surface
// density) living in the first three coordinates of R^D, plus noise uniform
// in [-2,2]^D. D defaults to 1000.
inline LabeledPointCloud gen_concentric_spheres(const GeneratorSpec& spec,
                                                int ambient_dim = 1000) {
  const double radii[3] = {1.0, 1.5, 2.0};
  const int counts[3] = {scaled(250, spec.scale), scaled(563, spec.scale),
                         scaled(1000, spec.scale)};
  const int n_noise = scaled(2000, spec.scale);
  const int total = counts[0] + counts[1] + counts[2] + n_noise;
  LabeledPointCloud out;
  out.points.coords.setZero(total, ambient_dim);
  out.labels.resize(total);
  out.num_clusters = 3;
  int row = 0;
  for (int l = 0; l < 3; ++l) {
    Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(l));
    for (int i = 0; i < counts[l]; ++i, ++row) {
      double g[3], norm = 0.0;
      do {
        norm = 0.0;
        for (double& v : g) {
          v = rng.normal();
          norm += v * v;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (int j = 0; j < 3; ++j)
        out.points.coords(row, j) = radii[l] * g[j] / norm;
      out.labels[row] = l + 1;
    }
  }
  Rng rng = Rng::stream(spec.seed, 3);
  for (int i = 0; i < n_noise; ++i, ++row) {
    for (int j = 0; j < ambient_dim; ++j)
      out.points.coords(row, j) = rng.uniform(-2.0, 2.0);
    out.labels[row] = kNoiseLabel;
  }
  return out;
}

// Five axis-aligned 5-dimensional planes in [0,1]^25, offset in two of the
// last twenty coordinates (the remaining eighteen are a shared constant),
// plus uniform noise over the full cube. The five offset pairs are the four
// corners and the center of the offset square, and the in-plane side length
// shrinks as scale^(1/d) so that desk-scale instances keep the full-size
// within/between LLPD ordering.
inline LabeledPointCloud gen_parallel_planes(const GeneratorSpec& spec) {
  constexpr int D = 25, d = 5;
  const int n_per = scaled(1000, spec.scale);
  const int n_noise = scaled(200000, spec.scale);
  const double side = std::pow(spec.scale, 1.0 / d);
  const double offs[5][2] = {
      {0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}, {0.5, 0.5}};
  const int total = 5 * n_per + n_noise;
  LabeledPointCloud out;
  out.points.coords.resize(total, D);
  out.labels.resize(total);
  out.num_clusters = 5;
  int row = 0;
  for (int l = 0; l < 5; ++l) {
    Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(l));
    for (int i = 0; i < n_per; ++i, ++row) {
      for (int j = 0; j < d; ++j)
        out.points.coords(row, j) = rng.uniform(0.0, side);
      out.points.coords(row, d) = offs[l][0];
      out.points.coords(row, d + 1) = offs[l][1];
      for (int j = d + 2; j < D; ++j) out.points.coords(row, j) = 0.5;
      out.labels[row] = l + 1;
    }
  }
  Rng rng = Rng::stream(spec.seed, 5);
  for (int i = 0; i < n_noise; ++i, ++row) {
    for (int j = 0; j < D; ++j) out.points.coords(row, j) = rng.uniform(0.0, 1.0);
    out.labels[row] = kNoiseLabel;
  }
  return out;
}

}  // namespace detail

inline LabeledPointCloud generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case DatasetKind::FourLines:
      return detail::gen_four_lines(spec);
    case DatasetKind::NineGaussians:
      return detail::gen_nine_gaussians(spec);
    case DatasetKind::ConcentricSpheres:
      return detail::gen_concentric_spheres(spec);
    case DatasetKind::ParallelPlanes:
      return detail::gen_parallel_planes(spec);
  }
  throw std::invalid_argument("unknown dataset kind");
}

// The mixture of five uniform distributions on a rectangular prism used for
// the phase-transition study: four clusters on the parallel unit-length
// edges of [0,1]x[0,1/2]x[0,1/2] and one noise component filling the
// interior. Cluster separation is 0.5 and each component has `per` points.
inline LabeledPointCloud generate_prism(std::uint64_t seed, int per = 3000) {
  const double edge_y[4] = {0.0, 0.0, 0.5, 0.5};
  const double edge_z[4] = {0.0, 0.5, 0.0, 0.5};
  LabeledPointCloud out;
  out.points.coords.resize(5 * per, 3);
  out.labels.resize(5 * per);
  out.num_clusters = 4;
  int row = 0;
  for (int l = 0; l < 4; ++l) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(l));
    for (int i = 0; i < per; ++i, ++row) {
      out.points.coords(row, 0) = rng.uniform(0.0, 1.0);
      out.points.coords(row, 1) = edge_y[l];
      out.points.coords(row, 2) = edge_z[l];
      out.labels[row] = l + 1;
    }
  }
  Rng rng = Rng::stream(seed, 4);
  for (int i = 0; i < per; ++i, ++row) {
    out.points.coords(row, 0) = rng.uniform(0.0, 1.0);
    out.points.coords(row, 1) = rng.uniform(0.0, 0.5);
    out.points.coords(row, 2) = rng.uniform(0.0, 0.5);
    out.labels[row] = kNoiseLabel;
  }
  return out;
}

}  // namespace llpd
