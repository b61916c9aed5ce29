#pragma once

// Hamiltonian-level reductions: Antoine-Takagi factorization, the propagator
// map from quadratic Hamiltonians to symplectic kernels, the generalized
// (tensor) Antoine-Takagi reduction with shared congruence factors, and the
// two-mode-squeezing block construction for JSA Hamiltonians.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gbm/linalg.hpp"
#include "gbm/symplectic.hpp"
#include "gbm/tensor.hpp"
#include "gbm/types.hpp"

namespace gbm {

/// Complex symmetric quadratic Hamiltonian with optional spectral grid labels.
struct SymmetricHamiltonian {
  ComplexMatrix H;
  std::vector<double> grid;

  Index dim() const { return H.rows(); }
};

inline void require_symmetric(const ComplexMatrix& h, double tol, const char* name) {
  require_square(h, name);
  require_finite(h, name);
  if ((h - h.transpose()).norm() > tol * std::max(1.0, h.norm()))
    throw NotSymmetric(std::string(name) + " is not symmetric within tolerance");
}

/// Congruence diagonalization H = U H^D U^T, H^D descending.
inline TakagiDecomposition antoine_takagi(const SymmetricHamiltonian& h, double tol = 1e-8) {
  require_symmetric(h.H, tol, "antoine_takagi input");
  return takagi(h.H, tol);
}

/// Kernel of exp{-i K H} for the quadratic Hamiltonian H:
/// C = U cosh(H^D) U^dag, S = -i U sinh(H^D) U^T.
inline SymplecticKernel propagate(const SymmetricHamiltonian& h, double tol = 1e-8) {
  TakagiDecomposition td = antoine_takagi(h, tol);
  const Index n = h.dim();
  RealVector ch(n), sh(n);
  for (Index i = 0; i < n; ++i) {
    ch(i) = std::cosh(td.diag(i));
    sh(i) = std::sinh(td.diag(i));
  }
  SymplecticKernel k;
  k.C = td.unitary * ch.asDiagonal() * td.unitary.adjoint();
  k.S = Complex(0.0, -1.0) * (td.unitary * sh.asDiagonal() * td.unitary.transpose());
  return k;
}

/// 4-way Hamiltonian tensor with pair-exchange symmetry
/// H(t,x,t',x') = H(t',x',t,x).
struct TensorHamiltonian {
  Index n_spectral = 0;
  Index n_spatial = 0;
  Tensor4 H;
};

inline double pair_exchange_residual(const Tensor4& h) {
  double worst = 0.0;
  const auto& d = h.dims();
  for (Index t = 0; t < d[0]; ++t)
    for (Index x = 0; x < d[1]; ++x)
      for (Index t2 = 0; t2 < d[2]; ++t2)
        for (Index x2 = 0; x2 < d[3]; ++x2)
          worst = std::max(worst, std::abs(h(t, x, t2, x2) - h(t2, x2, t, x)));
  return worst;
}

/// Flattens a tensor Hamiltonian omega-major into a symmetric matrix.
inline SymmetricHamiltonian flatten(const TensorHamiltonian& th) {
  const Index nt = th.n_spectral, ns = th.n_spatial;
  SymmetricHamiltonian h;
  h.H.resize(nt * ns, nt * ns);
  for (Index t = 0; t < nt; ++t)
    for (Index x = 0; x < ns; ++x)
      for (Index t2 = 0; t2 < nt; ++t2)
        for (Index x2 = 0; x2 < ns; ++x2) h.H(t * ns + x, t2 * ns + x2) = th.H(t, x, t2, x2);
  return h;
}

inline TensorHamiltonian fold_hamiltonian(const SymmetricHamiltonian& h, Index n_spectral,
                                          Index n_spatial) {
  if (h.dim() != n_spectral * n_spatial)
    throw ShapeMismatch("fold_hamiltonian: dim does not factor as n_spectral * n_spatial");
  TensorHamiltonian th{n_spectral, n_spatial,
                       Tensor4(n_spectral, n_spatial, n_spectral, n_spatial)};
  for (Index t = 0; t < n_spectral; ++t)
    for (Index x = 0; x < n_spatial; ++x)
      for (Index t2 = 0; t2 < n_spectral; ++t2)
        for (Index x2 = 0; x2 < n_spatial; ++x2)
          th.H(t, x, t2, x2) = h.H(t * n_spatial + x, t2 * n_spatial + x2);
  return th;
}

/// Generalized Antoine-Takagi reduction: shared factors per degree of freedom,
/// H = core x (U_t, U_s, U_t, U_s).
struct GATDecomposition {
  Index n_spectral = 0;
  Index n_spatial = 0;
  ComplexMatrix u_t;
  ComplexMatrix u_s;
  Tensor4 core;
  RealVector sigma_t;
  RealVector sigma_s;
};

namespace detail {

// Spatial-pair trace of the core, B(s,s') = sum_m core(s,m,s',m). On the
// singular support of a spatially structured congruence this is sigma * G
// with G the symmetric unitary phase mismatch of the shared factors.
inline ComplexMatrix spectral_pair_trace(const Tensor4& core) {
  ComplexMatrix b = ComplexMatrix::Zero(core.dim(0), core.dim(2));
  for (Index s = 0; s < core.dim(0); ++s)
    for (Index s2 = 0; s2 < core.dim(2); ++s2)
      for (Index m = 0; m < core.dim(1); ++m) b(s, s2) += core(s, m, s2, m);
  return b;
}

inline ComplexMatrix spatial_pair_trace(const Tensor4& core) {
  ComplexMatrix b = ComplexMatrix::Zero(core.dim(1), core.dim(3));
  for (Index y = 0; y < core.dim(1); ++y)
    for (Index y2 = 0; y2 < core.dim(3); ++y2)
      for (Index t = 0; t < core.dim(0); ++t) b(y, y2) += core(t, y, t, y2);
  return b;
}

// Phase canonicalization of one degenerate block of a shared congruence
// factor. Applies the Takagi square-root correction when the traced block is
// a symmetric unitary (up to the block's singular value); no-op otherwise.
inline bool congruence_phase_correction(const ComplexMatrix& pair_trace, Index start, Index len,
                                        double sigma, ComplexMatrix& correction) {
  if (sigma <= 0.0) return false;
  ComplexMatrix g = pair_trace.block(start, start, len, len) / sigma;
  const double unit_res = (g * g.adjoint() - ComplexMatrix::Identity(len, len)).norm();
  const double sym_res = (g - g.transpose()).norm();
  if (unit_res > 1e-6 * std::sqrt(double(len)) || sym_res > 1e-6 * std::sqrt(double(len)))
    return false;
  correction.block(start, start, len, len) = symmetric_unitary_sqrt(g);
  return true;
}

}  // namespace detail

/// HOSVD constrained to the congruence form of a pair-exchange-symmetric
/// tensor: the right factors equal the left factors, and degenerate blocks are
/// phase-corrected so the spatially trivial case reduces to Takagi's real
/// nonnegative diagonal.
inline GATDecomposition generalized_antoine_takagi(const TensorHamiltonian& th,
                                                   double tol = 1e-8) {
  const double scale = std::max(1.0, th.H.norm());
  if (pair_exchange_residual(th.H) > tol * scale)
    throw NotSymmetric("generalized_antoine_takagi: tensor lacks pair-exchange symmetry");

  GATDecomposition g;
  g.n_spectral = th.n_spectral;
  g.n_spatial = th.n_spatial;

  // Pair-exchange symmetry makes the mode-2/3 flattenings equal the mode-0/1
  // ones, so one SVD per degree of freedom yields all four factors.
  for (int k = 0; k < 2; ++k) {
    ComplexMatrix flat = n_mode_flatten(th.H, k);
    Eigen::JacobiSVD<ComplexMatrix> svd(flat, Eigen::ComputeFullU);
    ComplexMatrix u = svd.matrixU();
    detail::fix_column_phases(u);
    RealVector sig = RealVector::Zero(flat.rows());
    sig.head(svd.singularValues().size()) = svd.singularValues();
    if (k == 0) {
      g.u_t = u;
      g.sigma_t = sig;
    } else {
      g.u_s = u;
      g.sigma_s = sig;
    }
  }

  auto shared_factors = [&]() -> std::array<ComplexMatrix, 4> {
    return {g.u_t, g.u_s, g.u_t, g.u_s};
  };
  g.core = tensor_core(th.H, shared_factors());

  // Deterministic degenerate-group refinement, applied jointly to both paired
  // modes so the congruence form is preserved.
  for (int k = 0; k < 2; ++k) {
    ComplexMatrix& fac = (k == 0) ? g.u_t : g.u_s;
    const RealVector& sig = (k == 0) ? g.sigma_t : g.sigma_s;
    auto groups = detail::group_degenerate(sig, kDegeneracyRelTol);
    for (const auto& [start, len] : groups) {
      if (len < 2) continue;
      std::array<ComplexMatrix, 4> fs = shared_factors();
      Tensor4 core_tmp = g.core;
      detail::refine_degenerate_group(core_tmp, fs, k, start, len, sig(start) * sig(start));
      fac = fs[size_t(k)];
      g.core = tensor_core(th.H, shared_factors());
    }
  }

  // Congruence phase canonicalization per degenerate block of each factor.
  for (int k = 0; k < 2; ++k) {
    ComplexMatrix& fac = (k == 0) ? g.u_t : g.u_s;
    const RealVector& sig = (k == 0) ? g.sigma_t : g.sigma_s;
    ComplexMatrix trace =
        (k == 0) ? detail::spectral_pair_trace(g.core) : detail::spatial_pair_trace(g.core);
    ComplexMatrix corr = ComplexMatrix::Identity(fac.cols(), fac.cols());
    bool any = false;
    auto groups = detail::group_degenerate(sig, kDegeneracyRelTol);
    for (const auto& [start, len] : groups)
      any |= detail::congruence_phase_correction(trace, start, len, sig(start), corr);
    if (any) {
      fac = fac * corr;
      g.core = tensor_core(th.H, shared_factors());
    }
  }
  return g;
}

inline Tensor4 gat_reconstruct(const GATDecomposition& g) {
  return tensor_reconstruct(g.core, {g.u_t, g.u_s, g.u_t, g.u_s});
}

/// Joint-spectral-amplitude block Hamiltonian: F embeds as H = (0 F; F^T 0)
/// with the bisection splitting signal from idler frequencies.
struct JSABlockHamiltonian {
  ComplexMatrix F;
  std::vector<double> grid;

  Index n_signal() const { return F.rows(); }
  Index n_idler() const { return F.cols(); }
};

/// Embedding H = (0 F; F^T 0).
inline SymmetricHamiltonian jsa_embed(const JSABlockHamiltonian& j) {
  const Index ns = j.n_signal(), ni = j.n_idler();
  SymmetricHamiltonian h;
  h.H = ComplexMatrix::Zero(ns + ni, ns + ni);
  h.H.topRightCorner(ns, ni) = j.F;
  h.H.bottomLeftCorner(ni, ns) = j.F.transpose();
  h.grid = j.grid;
  return h;
}

/// Two-mode reduction of a JSA block Hamiltonian:
/// F = U_s F^D U_i^T (congruence-consistent SVD) and the reduced kernel
/// C = (cosh F^D (+) cosh F^D), S = antidiag(sinh F^D, sinh F^D).
struct TwoModeReduction {
  ComplexMatrix u_s;
  ComplexMatrix u_i;
  RealVector f_d;
  SymplecticKernel kernel;
};

inline TwoModeReduction two_mode_reduce(const JSABlockHamiltonian& j) {
  require_finite(j.F, "two_mode_reduce F_JSA");
  Eigen::JacobiSVD<ComplexMatrix> svd(j.F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  TwoModeReduction out;
  out.u_s = svd.matrixU();
  ComplexMatrix v = svd.matrixV();
  ComplexVector ph = detail::fix_column_phases(out.u_s);
  for (Index c = 0; c < v.cols(); ++c) v.col(c) *= std::conj(ph(c));
  out.u_i = v.conjugate();
  out.f_d = RealVector::Zero(j.F.cols());
  out.f_d.head(svd.singularValues().size()) = svd.singularValues();

  const Index n = out.f_d.size();
  SymplecticKernel k{ComplexMatrix::Zero(2 * n, 2 * n), ComplexMatrix::Zero(2 * n, 2 * n)};
  for (Index i = 0; i < n; ++i) {
    const double c = std::cosh(out.f_d(i)), s = std::sinh(out.f_d(i));
    k.C(i, i) = c;
    k.C(n + i, n + i) = c;
    k.S(i, n + i) = s;
    k.S(n + i, i) = s;
  }
  out.kernel = k;
  return out;
}

/// Checks the Appendix-F equivalence: two equal single-mode squeezers and a
/// two-mode squeezer differ by the passive unitary U with U U^T = X found by
/// Takagi factorization. Returns the conjugation residual.
inline double single_vs_two_mode_equiv(double r) {
  if (!std::isfinite(r)) throw NonFinite("single_vs_two_mode_equiv: r not finite");
  const double c = std::cosh(r), s = std::sinh(r);
  SymplecticKernel singles{ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  singles.C.diagonal().setConstant(c);
  singles.S.diagonal().setConstant(s);
  SymplecticKernel two{ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  two.C.diagonal().setConstant(c);
  two.S(0, 1) = s;
  two.S(1, 0) = s;

  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  ComplexMatrix u = takagi(x).unitary;
  SymplecticKernel conj = apply_passive(apply_passive(singles, u, PassiveSide::Output), u,
                                        PassiveSide::Input);
  return (conj.C - two.C).norm() + (conj.S - two.S).norm();
}

}  // namespace gbm
