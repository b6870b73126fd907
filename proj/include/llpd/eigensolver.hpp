#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "llpd/laplacian.hpp"
#include "llpd/random.hpp"

namespace llpd {

struct EigsResult {
  Eigen::VectorXd values;   // ascending, k smallest of L_SYM
  Eigen::MatrixXd vectors;  // n x k, unit point-space norm
  int iterations = 0;       // matvec count
};

struct EigsOptions {
  double tol = 1e-10;  // residual per pair in the compressed operator
  // Below this compressed dimension the operator is assembled by matvecs
  // and solved densely; above it, deflated Lanczos with full
  // reorthogonalization.
  int dense_cutoff = 600;
  int max_krylov = 520;     // Krylov steps per round
  int max_rounds = 8;       // deflation restarts (degenerate eigenvalues)
  std::uint64_t seed = 0x11bd5eedull;
};

namespace detail {

// Dense eigendecomposition of the compressed operator, assembled one
// matvec per basis vector.
inline void compressed_dense_smallest(const LlpdLaplacianOperator& op, int k,
                                      Eigen::VectorXd& values,
                                      Eigen::MatrixXd& vectors) {
  const int nb = op.num_blocks();
  Eigen::MatrixXd B(nb, nb);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(nb);
  for (int c = 0; c < nb; ++c) {
    e[c] = 1.0;
    B.col(c) = op.symmetrized_matvec(e);
    e[c] = 0.0;
  }
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  values = es.eigenvalues().head(k);
  vectors = es.eigenvectors().leftCols(k);
}

// Lanczos with full reorthogonalization against both the Krylov basis and
// previously locked vectors. Restart rounds with fresh start vectors pick
// up remaining copies of degenerate eigenvalues, which a single Krylov
// space cannot contain.
inline void lanczos_smallest(const LlpdLaplacianOperator& op, int k,
                             const EigsOptions& opt, Eigen::VectorXd& values,
                             Eigen::MatrixXd& vectors, int& matvecs) {
  const int nb = op.num_blocks();
  const int m_cap = std::min(nb, opt.max_krylov);
  matvecs = 0;

  Eigen::MatrixXd locked(nb, 0);
  std::vector<double> locked_values;

  auto orth_against = [&](Eigen::VectorXd& w, const Eigen::MatrixXd& basis,
                          int cols) {
    if (cols == 0) return;
    w -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * w);
  };

  for (int round = 0; round < opt.max_rounds &&
                      static_cast<int>(locked_values.size()) < k;
       ++round) {
    Eigen::MatrixXd V(nb, m_cap);
    std::vector<double> alpha, beta;  // beta[j] couples v_j and v_{j+1}
    Rng rng(Rng::splitmix64(opt.seed + round));
    Eigen::VectorXd v(nb);
    for (int i = 0; i < nb; ++i) v[i] = rng.uniform() - 0.5;
    orth_against(v, locked, locked.cols());
    if (v.norm() < 1e-300) continue;
    v /= v.norm();
    V.col(0) = v;

    int m = 0;
    double next_beta = 0;
    // Extraction points: geometric schedule keeps the tridiagonal solves rare.
    int next_check = std::min(m_cap, std::max(2 * k + 10, 60));
    bool round_done = false;
    while (!round_done) {
      // Extend the factorization to next_check steps.
      for (; m < next_check; ++m) {
        Eigen::VectorXd w = op.symmetrized_matvec(V.col(m));
        ++matvecs;
        const double a = V.col(m).dot(w);
        alpha.push_back(a);
        w -= a * V.col(m);
        if (m > 0) w -= beta[m - 1] * V.col(m - 1);
        // Full reorthogonalization, twice, plus locked directions.
        orth_against(w, V, m + 1);
        orth_against(w, locked, locked.cols());
        orth_against(w, V, m + 1);
        next_beta = w.norm();
        if (next_beta < 1e-14) {
          beta.push_back(0);
          round_done = true;  // invariant subspace exhausted
          ++m;
          break;
        }
        beta.push_back(next_beta);
        if (m + 1 < m_cap) V.col(m + 1) = w / next_beta;
      }

      // Ritz extraction from the m x m tridiagonal.
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const double tail = beta.empty() ? 0.0 : beta.back();
      const int want = k - static_cast<int>(locked_values.size());
      // Converged prefix at the small end of the Ritz spectrum.
      int converged = 0;
      while (converged < m &&
             std::abs(tail * es.eigenvectors()(m - 1, converged)) <= opt.tol)
        ++converged;

      if (converged >= std::min(want, m) || m >= m_cap || round_done) {
        const int take = std::min(converged, want);
        for (int i = 0; i < take; ++i) {
          Eigen::VectorXd u = V.leftCols(m) * es.eigenvectors().col(i);
          for (int c = 0; c < locked.cols(); ++c)
            u -= locked.col(c).dot(u) * locked.col(c);
          const double norm = u.norm();
          if (norm < 1e-8) continue;  // duplicate of a locked direction
          locked.conservativeResize(nb, locked.cols() + 1);
          locked.col(locked.cols() - 1) = u / norm;
          locked_values.push_back(es.eigenvalues()[i]);
        }
        break;
      }
      next_check = std::min(m_cap, 2 * next_check);
    }
  }

  if (static_cast<int>(locked_values.size()) < k)
    throw std::runtime_error(
        "eigensolver did not converge: " +
        std::to_string(locked_values.size()) + " of " + std::to_string(k) +
        " pairs at tol " + std::to_string(opt.tol));

  // Locked pairs arrive sorted within rounds but not across them.
  std::vector<int> order(locked_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return locked_values[a] < locked_values[b];
  });
  values.resize(k);
  vectors.resize(nb, k);
  for (int i = 0; i < k; ++i) {
    values[i] = locked_values[order[i]];
    vectors.col(i) = locked.col(order[i]);
  }
}

}  // namespace detail

// k smallest eigenpairs of the full L_SYM. Eigenvectors with eigenvalue
// below 1 are block-constant and come from the compressed operator; the
// orthogonal complement of the block-constant subspace contributes
// eigenvalue exactly 1 with multiplicity n - nu1, realized by in-block
// difference vectors when those pairs are requested.
inline EigsResult eigs(const LlpdLaplacianOperator& op, int k,
                       const EigsOptions& opt = {}) {
  const int n = op.num_points();
  const int nb = op.num_blocks();
  if (k < 1 || k > n) throw std::invalid_argument("k must be in [1, n]");

  const int ks = std::min(k, nb);
  Eigen::VectorXd sub_values;
  Eigen::MatrixXd sub_vectors;
  int matvecs = 0;
  if (nb <= opt.dense_cutoff) {
    detail::compressed_dense_smallest(op, ks, sub_values, sub_vectors);
    matvecs = nb;
  } else {
    detail::lanczos_smallest(op, ks, opt, sub_values, sub_vectors, matvecs);
  }

  // Merge subspace eigenvalues with the complement's eigenvalue-1 block.
  const int complement = n - nb;
  struct Item {
    double value;
    int sub_idx;  // -1 for complement
  };
  std::vector<Item> items;
  for (int i = 0; i < sub_values.size(); ++i)
    items.push_back({sub_values[i], i});
  for (int c = 0; c < std::min(complement, k); ++c)
    items.push_back({1.0, -1});
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.value < b.value; });
  if (static_cast<int>(items.size()) < k)
    throw std::invalid_argument("k exceeds the operator dimension");

  EigsResult res;
  res.iterations = matvecs;
  res.values.resize(k);
  res.vectors.resize(n, k);

  // In-block difference vectors (Helmert-style) for complement pairs.
  const auto& dd = op.dendrogram();
  std::vector<std::vector<int>> block_members(nb);
  for (int i = 0; i < n; ++i) block_members[dd.comp[0][i]].push_back(i);
  int helm_block = 0, helm_step = 1;
  const Eigen::ArrayXd sqrt_sizes = op.sqrt_sizes();

  for (int c = 0; c < k; ++c) {
    res.values[c] = items[c].value;
    if (items[c].sub_idx >= 0) {
      Eigen::VectorXd compressed =
          (sub_vectors.col(items[c].sub_idx).array() / sqrt_sizes).matrix();
      res.vectors.col(c) = op.expand(compressed);
    } else {
      while (helm_block < nb &&
             helm_step >= static_cast<int>(block_members[helm_block].size())) {
        helm_block++;
        helm_step = 1;
      }
      if (helm_block >= nb)
        throw std::runtime_error("ran out of complement eigenvectors");
      const auto& mem = block_members[helm_block];
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (int t = 0; t < helm_step; ++t) v[mem[t]] = 1.0;
      v[mem[helm_step]] = -static_cast<double>(helm_step);
      v /= v.norm();
      res.vectors.col(c) = v;
      ++helm_step;
    }
  }
  return res;
}

}  // namespace llpd
