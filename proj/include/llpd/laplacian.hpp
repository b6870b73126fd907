#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "llpd/dendrogram.hpp"

namespace llpd {

struct KernelConfig {
  double sigma = 1.0;
  double operator()(double x) const {
    const double r = x / sigma;
    return std::exp(-r * r);
  }
};

// Compressed symmetric-normalized Laplacian over the multiscale dendrogram.
// The weight matrix W_ij = f_sigma(merge scale of i, j) is block-constant on
// the finest-scale components, so everything is stored per block: the parent
// chain through the scales, per-scale kernel values, block sizes, and block
// degrees. Matvec cost is O(m * nu1).
class LlpdLaplacianOperator {
 public:
  LlpdLaplacianOperator(const MultiscaleDendrogram& dd, KernelConfig kernel)
      : dd_(&dd), kernel_(kernel) {
    if (kernel.sigma <= 0) throw std::invalid_argument("sigma must be > 0");
    if (!dd.fully_merged())
      throw std::invalid_argument("dendrogram must reach a single component");
    const int m = dd.num_scales();
    num_blocks_ = dd.num_components(0);
    kernel_values_.resize(m);
    for (int s = 0; s < m; ++s) kernel_values_[s] = kernel(dd.ladder.t(s));

    // Representative node per block gives the component chain alpha_b(s).
    chain_.assign(m, std::vector<int>(num_blocks_));
    std::vector<int> rep(num_blocks_, -1);
    for (int i = 0; i < dd.n; ++i)
      if (rep[dd.comp[0][i]] < 0) rep[dd.comp[0][i]] = i;
    for (int s = 0; s < m; ++s)
      for (int b = 0; b < num_blocks_; ++b) chain_[s][b] = dd.comp[s][rep[b]];

    block_sizes_.resize(num_blocks_);
    for (int b = 0; b < num_blocks_; ++b)
      block_sizes_[b] = static_cast<double>(dd.sizes[0][b]);

    degrees_ = weight_matvec(Eigen::VectorXd::Ones(num_blocks_));
    inv_sqrt_deg_ = degrees_.cwiseInverse().cwiseSqrt();
  }

  int num_blocks() const { return num_blocks_; }
  int num_points() const { return dd_->n; }
  const Eigen::VectorXd& degrees() const { return degrees_; }
  const std::vector<double>& block_sizes_vec() const { return block_sizes_raw(); }
  const MultiscaleDendrogram& dendrogram() const { return *dd_; }
  double kernel_at_scale(int s) const { return kernel_values_[s]; }

  // W x for a block-constant vector given in compressed form (one value per
  // finest component). Shell s of block b contributes f(t_s) times the sum
  // of x over the scale-s component minus the scale-(s-1) component.
  Eigen::VectorXd weight_matvec(const Eigen::VectorXd& x) const {
    if (x.size() != num_blocks_)
      throw std::invalid_argument("compressed vector has wrong length");
    const int m = dd_->num_scales();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(num_blocks_);
    Eigen::VectorXd prev(num_blocks_), cur(num_blocks_);
    std::vector<double> sums;
    for (int s = 0; s < m; ++s) {
      sums.assign(dd_->num_components(s), 0.0);
      for (int b = 0; b < num_blocks_; ++b)
        sums[chain_[s][b]] += block_sizes_[b] * x[b];
      for (int b = 0; b < num_blocks_; ++b) cur[b] = sums[chain_[s][b]];
      if (s == 0)
        y += kernel_values_[0] * cur;
      else
        y += kernel_values_[s] * (cur - prev);
      std::swap(prev, cur);
    }
    return y;
  }

  // L_SYM x = x - D^{-1/2} W D^{-1/2} x, compressed.
  Eigen::VectorXd laplacian_matvec(const Eigen::VectorXd& x) const {
    return x - inv_sqrt_deg_.asDiagonal() *
                   weight_matvec(inv_sqrt_deg_.asDiagonal() * x);
  }

  // The compressed Laplacian is symmetric under the size-weighted inner
  // product; conjugating by sqrt(block size) makes it plainly symmetric.
  // Eigenpairs of this operator are the block-constant eigenpairs of the
  // full L_SYM.
  Eigen::VectorXd symmetrized_matvec(const Eigen::VectorXd& u) const {
    Eigen::VectorXd x = u.array() / sqrt_sizes_array();
    Eigen::VectorXd y = laplacian_matvec(x);
    return (y.array() * sqrt_sizes_array()).matrix();
  }

  // Expands a compressed block vector to point order.
  Eigen::VectorXd expand(const Eigen::VectorXd& x) const {
    Eigen::VectorXd full(dd_->n);
    for (int i = 0; i < dd_->n; ++i) full[i] = x[dd_->comp[0][i]];
    return full;
  }

  // Dense reconstruction of W in point order; oracle use.
  Eigen::MatrixXd dense_weights() const {
    const int n = dd_->n;
    Eigen::MatrixXd W(n, n);
    for (int i = 0; i < n; ++i) {
      W(i, i) = kernel_values_[0];
      for (int j = i + 1; j < n; ++j) {
        double v = 0;
        for (int s = 0; s < dd_->num_scales(); ++s)
          if (dd_->comp[s][i] == dd_->comp[s][j]) {
            v = kernel_values_[s];
            break;
          }
        W(i, j) = W(j, i) = v;
      }
    }
    return W;
  }

  Eigen::ArrayXd sqrt_sizes() const { return sqrt_sizes_array(); }

 private:
  const std::vector<double>& block_sizes_raw() const { return block_sizes_; }
  Eigen::ArrayXd sqrt_sizes_array() const {
    Eigen::ArrayXd a(num_blocks_);
    for (int b = 0; b < num_blocks_; ++b) a[b] = std::sqrt(block_sizes_[b]);
    return a;
  }

  const MultiscaleDendrogram* dd_;
  KernelConfig kernel_;
  int num_blocks_ = 0;
  std::vector<double> kernel_values_;
  std::vector<std::vector<int>> chain_;  // chain_[s][b]: component at scale s
  std::vector<double> block_sizes_;
  Eigen::VectorXd degrees_;      // per block
  Eigen::VectorXd inv_sqrt_deg_;
};

inline LlpdLaplacianOperator build_operator(const MultiscaleDendrogram& dd,
                                            KernelConfig kernel) {
  return LlpdLaplacianOperator(dd, kernel);
}

// W x for a point-space vector that is constant on finest components.
inline Eigen::VectorXd fast_matvec(const LlpdLaplacianOperator& op,
                                   const Eigen::VectorXd& x) {
  if (x.size() == op.num_blocks()) return op.weight_matvec(x);
  if (x.size() != op.num_points())
    throw std::invalid_argument("vector length matches neither points nor blocks");
  const auto& dd = op.dendrogram();
  Eigen::VectorXd compressed(op.num_blocks());
  std::vector<char> seen(op.num_blocks(), 0);
  for (int i = 0; i < dd.n; ++i) {
    const int b = dd.comp[0][i];
    if (!seen[b]) {
      compressed[b] = x[i];
      seen[b] = 1;
    } else if (compressed[b] != x[i]) {
      throw std::invalid_argument("vector is not constant on finest blocks");
    }
  }
  return op.expand(op.weight_matvec(compressed));
}

}  // namespace llpd
