#pragma once

// Dense complex linear-algebra primitives beyond stock SVD/eigendecomposition:
// degeneracy-safe Takagi factorization of complex symmetric matrices, pivoted
// Gram-Schmidt orthonormalization, and matrix permanents.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gbm/types.hpp"

namespace gbm {

/// Congruence diagonalization A = U diag(d) U^T with U unitary and d real
/// nonnegative, sorted descending.
struct TakagiDecomposition {
  ComplexMatrix unitary;
  RealVector diag;
};

namespace detail {

// Rotates each column of u so its largest-magnitude entry is real positive
// (ties broken by lowest index). Returns the applied phases so callers can
// compensate a paired factor.
inline ComplexVector fix_column_phases(ComplexMatrix& u) {
  ComplexVector phases = ComplexVector::Ones(u.cols());
  for (Index c = 0; c < u.cols(); ++c) {
    Index imax = 0;
    double best = -1.0;
    for (Index r = 0; r < u.rows(); ++r) {
      double a = std::abs(u(r, c));
      if (a > best + 1e-300 && a > best * (1.0 + 1e-14)) {
        best = a;
        imax = r;
      }
    }
    if (best <= 0.0) continue;
    Complex ph = u(imax, c) / best;
    u.col(c) *= std::conj(ph);
    phases(c) = ph;
  }
  return phases;
}

// Groups consecutive entries of a descending vector into degeneracy blocks.
// Two neighbours belong to the same block when their gap is below
// rel_tol * max(|d|, 1e-300-guarded scale).
inline std::vector<std::pair<Index, Index>> group_degenerate(const RealVector& d, double rel_tol) {
  std::vector<std::pair<Index, Index>> groups;
  if (d.size() == 0) return groups;
  const double scale = std::max(std::abs(d(0)), std::abs(d(d.size() - 1)));
  const double thr = rel_tol * std::max(scale, 1e-300);
  Index start = 0;
  for (Index i = 1; i < d.size(); ++i) {
    if (std::abs(d(i - 1) - d(i)) > thr) {
      groups.emplace_back(start, i - start);
      start = i;
    }
  }
  groups.emplace_back(start, d.size() - start);
  return groups;
}

// Simultaneously diagonalizes two commuting real symmetric matrices with one
// real orthogonal Q. Diagonalizes x first, then refines inside eigenvalue
// clusters using y.
inline RealMatrix simultaneous_diagonalize(const RealMatrix& x, const RealMatrix& y,
                                           double cluster_tol = 1e-8) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(x);
  RealMatrix q = es.eigenvectors();
  RealVector lam = es.eigenvalues();
  Index n = x.rows();
  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && std::abs(lam(end) - lam(start)) <= cluster_tol) ++end;
    if (end - start > 1) {
      RealMatrix qb = q.middleCols(start, end - start);
      RealMatrix yb = qb.transpose() * y * qb;
      yb = 0.5 * (yb + yb.transpose());
      Eigen::SelfAdjointEigenSolver<RealMatrix> es2(yb);
      q.middleCols(start, end - start) = qb * es2.eigenvectors();
    }
    start = end;
  }
  return q;
}

// Factors a symmetric unitary g as g = D D^T. Re(g) and Im(g) commute, so a
// real orthogonal Q diagonalizes both; the eigenphases give D = Q e^{i theta/2}.
inline ComplexMatrix symmetric_unitary_sqrt(const ComplexMatrix& g) {
  ComplexMatrix gs = 0.5 * (g + g.transpose());
  RealMatrix x = gs.real();
  RealMatrix y = gs.imag();
  RealMatrix q = simultaneous_diagonalize(x, y);
  Index n = g.rows();
  ComplexVector half_phase(n);
  for (Index k = 0; k < n; ++k) {
    double xc = q.col(k).dot(x * q.col(k));
    double yc = q.col(k).dot(y * q.col(k));
    double theta = std::atan2(yc, xc);
    half_phase(k) = std::polar(1.0, 0.5 * theta);
  }
  return q.cast<Complex>() * half_phase.asDiagonal();
}

// Block-diagonal correction D with D_i D_i^T = G_i on each degeneracy block of
// the singular spectrum; identity off the blocks.
inline ComplexMatrix takagi_block_correction(const ComplexMatrix& g,
                                             const std::vector<std::pair<Index, Index>>& groups) {
  ComplexMatrix d = ComplexMatrix::Identity(g.rows(), g.cols());
  for (const auto& [start, len] : groups) {
    d.block(start, start, len, len) = symmetric_unitary_sqrt(g.block(start, start, len, len));
  }
  return d;
}

}  // namespace detail

/// Relative degeneracy-grouping threshold for singular values; values within
/// this fraction of the largest are treated as one block.
inline constexpr double kDegeneracyRelTol = 1e-8;

/// Takagi factorization of a complex symmetric matrix: A = U diag(d) U^T.
///
/// Degenerate singular values are handled by the block correction G = V^dag U*,
/// factored per block as G_i = D_i D_i^T with U <- U D. `tol` bounds the
/// accepted relative symmetry violation of the input.
inline TakagiDecomposition takagi(const ComplexMatrix& a, double tol = 1e-8) {
  require_square(a, "takagi input");
  require_finite(a, "takagi input");
  const double scale = a.norm();
  if ((a - a.transpose()).norm() > tol * std::max(1.0, scale))
    throw NotSymmetric("takagi input is not symmetric within tolerance");

  const ComplexMatrix as = 0.5 * (a + a.transpose());
  Eigen::JacobiSVD<ComplexMatrix> svd(as, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ComplexMatrix u = svd.matrixU();
  ComplexMatrix v = svd.matrixV();
  RealVector d = svd.singularValues();

  // Deterministic representative within each singular subspace.
  ComplexVector phases = detail::fix_column_phases(u);
  for (Index c = 0; c < v.cols(); ++c) v.col(c) *= std::conj(phases(c));

  auto groups = detail::group_degenerate(d, kDegeneracyRelTol);
  // Drop the zero block from the correction: those columns multiply d = 0 and
  // G need not be symmetric off the support.
  std::vector<std::pair<Index, Index>> support_groups;
  const double zero_thr = kDegeneracyRelTol * std::max(d.size() ? d(0) : 0.0, 1e-300);
  for (const auto& g : groups)
    if (d(g.first) > zero_thr) support_groups.push_back(g);

  ComplexMatrix g = v.adjoint() * u.conjugate();
  ComplexMatrix corr = detail::takagi_block_correction(g, support_groups);
  return TakagiDecomposition{u * corr, d};
}

/// Result of pivoted Gram-Schmidt: orthonormal columns, the coefficient matrix
/// with basis.col(k) = sum_j coeffs(k, j) * input[kept[j]], and the surviving
/// input indices.
struct GramSchmidtResult {
  ComplexMatrix basis;
  ComplexMatrix coeffs;
  std::vector<Index> kept;
};

/// Orthonormalizes a list of vectors in order, dropping those whose residual
/// norm falls below drop_tol. Uses modified Gram-Schmidt with one
/// re-orthogonalization pass.
inline GramSchmidtResult gram_schmidt_pivoted(const std::vector<ComplexVector>& vectors,
                                              double drop_tol) {
  if (vectors.empty()) throw EmptyInput("gram_schmidt_pivoted: no input vectors");
  const Index dim = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != dim) throw ShapeMismatch("gram_schmidt_pivoted: inconsistent vector lengths");

  std::vector<ComplexVector> basis;
  std::vector<ComplexVector> rows;  // coefficient rows over kept inputs
  std::vector<Index> kept;

  for (Index j = 0; j < Index(vectors.size()); ++j) {
    ComplexVector r = vectors[j];
    ComplexVector c = ComplexVector::Zero(Index(vectors.size()));
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < Index(basis.size()); ++i) {
        Complex proj = basis[i].dot(r);  // <basis_i, r>
        r -= proj * basis[i];
        c(i) += proj;
      }
    }
    const double rn = r.norm();
    if (rn < drop_tol) continue;
    // New basis vector: q = (v_j - sum_i c_i q_i)/rn, expressed over inputs.
    ComplexVector row = ComplexVector::Zero(Index(vectors.size()));
    row(Index(kept.size())) = 1.0 / rn;
    for (Index i = 0; i < Index(basis.size()); ++i) row -= (c(i) / rn) * rows[i];
    basis.push_back(r / rn);
    rows.push_back(row);
    kept.push_back(j);
  }

  GramSchmidtResult out;
  const Index m = Index(basis.size());
  out.basis.resize(dim, m);
  out.coeffs = ComplexMatrix::Zero(m, m);
  for (Index k = 0; k < m; ++k) {
    out.basis.col(k) = basis[size_t(k)];
    out.coeffs.row(k) = rows[size_t(k)].head(m).transpose();
  }
  out.kept = std::move(kept);
  return out;
}

/// Exact permanent by Ryser's inclusion-exclusion with Gray-code subset
/// updates, O(2^n n). Dimension capped at 16.
inline Complex permanent(const ComplexMatrix& a) {
  require_square(a, "permanent input");
  const Index n = a.rows();
  if (n > 16) throw TooLarge("permanent: dimension > 16");
  if (n == 0) return Complex(1.0, 0.0);

  std::vector<Complex> row_sums(size_t(n), Complex(0.0, 0.0));
  Complex total(0.0, 0.0);
  std::uint64_t gray = 0;
  const std::uint64_t count = std::uint64_t(1) << n;
  int popcount = 0;
  for (std::uint64_t k = 1; k < count; ++k) {
    std::uint64_t next = k ^ (k >> 1);
    std::uint64_t changed = next ^ gray;
    int j = 0;
    while (!((changed >> j) & 1)) ++j;
    if (next & changed) {
      for (Index i = 0; i < n; ++i) row_sums[size_t(i)] += a(i, j);
      ++popcount;
    } else {
      for (Index i = 0; i < n; ++i) row_sums[size_t(i)] -= a(i, j);
      --popcount;
    }
    gray = next;
    Complex prod(1.0, 0.0);
    for (Index i = 0; i < n; ++i) prod *= row_sums[size_t(i)];
    total += (popcount & 1) ? -prod : prod;
  }
  return (n & 1) ? -total : total;
}

}  // namespace gbm
