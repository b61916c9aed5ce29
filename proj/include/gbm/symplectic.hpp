#pragma once

// Discretized Bogoliubov kernels (C, S), symplecticity validation, the
// four-step Bloch-Messiah reduction, and kernel algebra (compose, inverse,
// passive sandwiches).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbm/linalg.hpp"
#include "gbm/types.hpp"

namespace gbm {

/// Matrix pair (C, S) of a discretized Bogoliubov map b = C a + S a^dag.
/// Valid kernels satisfy the four symplecticity constraints
///   CC^dag - SS^dag = 1,  CS^T - SC^T = 0,
///   C^dag C - S^T S* = 1, C^dag S - S^T C* = 0.
struct SymplecticKernel {
  ComplexMatrix C;
  ComplexMatrix S;

  Index dim() const { return C.rows(); }

  static SymplecticKernel identity(Index n) {
    return {ComplexMatrix::Identity(n, n), ComplexMatrix::Zero(n, n)};
  }

  /// Diagonal squeezer: C = diag(cosh r), S = diag(sinh r).
  static SymplecticKernel squeezer(const RealVector& r) {
    const Index n = r.size();
    SymplecticKernel k{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
    for (Index i = 0; i < n; ++i) {
      k.C(i, i) = std::cosh(r(i));
      k.S(i, i) = std::sinh(r(i));
    }
    return k;
  }

  /// Pure passive kernel from a unitary.
  static SymplecticKernel passive(const ComplexMatrix& w) {
    return {w, ComplexMatrix::Zero(w.rows(), w.cols())};
  }
};

/// Frobenius residuals of the four symplecticity constraints, reported raw.
struct SymplecticReport {
  double cc_dag_minus_ss_dag;   // ||CC^dag - SS^dag - 1||_F
  double cs_t_minus_sc_t;       // ||CS^T - SC^T||_F
  double cdag_c_minus_st_s;     // ||C^dag C - S^T S* - 1||_F
  double cdag_s_minus_st_c;     // ||C^dag S - S^T C*||_F
  double scale;                 // max(1, ||C||_F^2 + ||S||_F^2)
  bool valid;

  double max_residual() const {
    return std::max(std::max(cc_dag_minus_ss_dag, cs_t_minus_sc_t),
                    std::max(cdag_c_minus_st_s, cdag_s_minus_st_c));
  }
};

inline constexpr double kDefaultSymplecticTol = 1e-8;

/// Evaluates the four constraint residuals; the kernel is declared valid iff
/// all residuals < tol * max(1, ||C||_F^2 + ||S||_F^2).
inline SymplecticReport validate_symplectic(const SymplecticKernel& k,
                                            double tol = kDefaultSymplecticTol) {
  if (k.C.rows() != k.C.cols() || k.S.rows() != k.S.cols() || k.C.rows() != k.S.rows())
    throw ShapeMismatch("validate_symplectic: C and S must be square with equal dims");
  const Index n = k.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  SymplecticReport r{};
  r.cc_dag_minus_ss_dag = (k.C * k.C.adjoint() - k.S * k.S.adjoint() - id).norm();
  r.cs_t_minus_sc_t = (k.C * k.S.transpose() - k.S * k.C.transpose()).norm();
  r.cdag_c_minus_st_s = (k.C.adjoint() * k.C - k.S.transpose() * k.S.conjugate() - id).norm();
  r.cdag_s_minus_st_c = (k.C.adjoint() * k.S - k.S.transpose() * k.C.conjugate()).norm();
  r.scale = std::max(1.0, k.C.squaredNorm() + k.S.squaredNorm());
  r.valid = r.max_residual() < tol * r.scale;
  return r;
}

/// Bloch-Messiah factors: C = U diag(c_diag) V^dag, S = U diag(s_diag) V^T
/// with c_diag >= 1 descending and c_diag^2 - s_diag^2 = 1.
struct BMDecomposition {
  ComplexMatrix U;
  ComplexMatrix V;
  RealVector c_diag;
  RealVector s_diag;
  Index squeezed_count = 0;
};

/// Relative cutoff below which s_diag entries are treated as unsqueezed.
inline constexpr double kSqueezedSupportRelTol = 1e-10;

/// Noise floor for s = sqrt(c^2 - 1): eigenvalue error of order machine
/// epsilon turns into sqrt(eps)-sized spurious squeezing, which must be
/// clamped to exact zero.
inline constexpr double kSqueezeNoiseFloor = 4e-8;

/// Four-step Bloch-Messiah reduction:
///  1. eigendecomposition of CC^dag gives U and C_D^2 (descending),
///  2. V_C = (C_D^{-1} U^dag C)^dag,
///  3. S_D from C_D^2 - 1 and V_S = (S_D^{-1} U^dag S)^dag on the squeezed
///     support,
///  4. Takagi of G = V_C^dag V_S* per degeneracy block gives D, and
///     U <- U (D (+) 1), V <- V_C (D (+) 1).
inline BMDecomposition bloch_messiah(const SymplecticKernel& k,
                                     double tol = kDefaultSymplecticTol) {
  SymplecticReport rep = validate_symplectic(k, tol);
  if (!rep.valid)
    throw NotSymplectic("bloch_messiah: kernel fails symplecticity, max residual " +
                        std::to_string(rep.max_residual()));
  const Index n = k.dim();

  // Step 1: U and C_D from the Hermitian product CC^dag.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(k.C * k.C.adjoint());
  if (es.info() != Eigen::Success) throw Error("bloch_messiah: eigendecomposition failed");
  RealVector evals = es.eigenvalues().reverse();
  ComplexMatrix u = es.eigenvectors().rowwise().reverse();
  detail::fix_column_phases(u);

  RealVector c_diag(n), s_diag(n);
  for (Index i = 0; i < n; ++i) {
    if (evals(i) < (1.0 - tol) * (1.0 - tol))
      throw DegenerateSupport("bloch_messiah: C_D entry below 1, kernel invalid");
    c_diag(i) = std::sqrt(std::max(evals(i), 1.0));
    s_diag(i) = std::sqrt(std::max(evals(i) - 1.0, 0.0));
  }

  // Step 2: right factor of C (exact for the full spectrum since C_D >= 1).
  ComplexMatrix v_c = (c_diag.cwiseInverse().asDiagonal() * u.adjoint() * k.C).adjoint();

  // Step 3: squeezed support and the right factor of S restricted to it.
  const double s_thr =
      std::max(kSqueezedSupportRelTol * std::max(1.0, s_diag.size() ? s_diag(0) : 0.0),
               kSqueezeNoiseFloor * std::max(1.0, c_diag.size() ? c_diag(0) : 1.0));
  Index d = 0;
  while (d < n && s_diag(d) > s_thr) ++d;
  for (Index i = d; i < n; ++i) s_diag(i) = 0.0;

  BMDecomposition out;
  out.c_diag = c_diag;
  out.s_diag = s_diag;
  out.squeezed_count = d;

  if (d == 0) {
    out.U = u;
    out.V = v_c;
    return out;
  }

  ComplexMatrix u_t = u.leftCols(d);
  RealVector s_t = s_diag.head(d);
  ComplexMatrix v_s = (s_t.cwiseInverse().asDiagonal() * u_t.adjoint() * k.S).adjoint();

  // Step 4: reconcile the two right factors on the squeezed support.
  ComplexMatrix g = v_c.leftCols(d).adjoint() * v_s.conjugate();
  auto groups = detail::group_degenerate(s_t, kDegeneracyRelTol);
  ComplexMatrix corr = detail::takagi_block_correction(g, groups);

  ComplexMatrix ext = ComplexMatrix::Identity(n, n);
  ext.topLeftCorner(d, d) = corr;
  out.U = u * ext;
  out.V = v_c * ext;
  return out;
}

/// Reconstruction residuals ||U C_D V^dag - C|| + ||U S_D V^T - S||.
inline double bm_reconstruction_residual(const SymplecticKernel& k, const BMDecomposition& bm) {
  const ComplexMatrix c_rec = bm.U * bm.c_diag.asDiagonal() * bm.V.adjoint();
  const ComplexMatrix s_rec = bm.U * bm.s_diag.asDiagonal() * bm.V.transpose();
  return (c_rec - k.C).norm() + (s_rec - k.S).norm();
}

/// Block product restricted to the (C, S) blocks; k2 acts first.
inline SymplecticKernel compose(const SymplecticKernel& k1, const SymplecticKernel& k2) {
  if (k1.dim() != k2.dim()) throw ShapeMismatch("compose: kernel dims differ");
  return {k1.C * k2.C + k1.S * k2.S.conjugate(), k1.C * k2.S + k1.S * k2.C.conjugate()};
}

/// Kernel inverse M^{-1} = -Omega M^T Omega, i.e. (C, S) -> (C^dag, -S^T).
inline SymplecticKernel inverse(const SymplecticKernel& k) {
  return {k.C.adjoint(), -k.S.transpose()};
}

enum class PassiveSide { Input, Output };

/// Sandwiches a passive unitary onto one side of the kernel:
/// output: C <- WC, S <- WS; input: C <- C W^dag, S <- S W^T.
inline SymplecticKernel apply_passive(const SymplecticKernel& k, const ComplexMatrix& w,
                                      PassiveSide side) {
  if (w.rows() != k.dim()) throw ShapeMismatch("apply_passive: unitary dim mismatch");
  require_unitary(w, 1e-10, "apply_passive W");
  if (side == PassiveSide::Output) return {w * k.C, w * k.S};
  return {k.C * w.adjoint(), k.S * w.transpose()};
}

/// Global quadrature phase rotation b -> e^{i phi} b on both sides; leaves C
/// unchanged and multiplies S by e^{2 i phi}. phi = pi/4 maps the propagator
/// convention S = -i U sinh(H^D) U^T onto the real-sinh convention.
inline SymplecticKernel rotate_global_phase(const SymplecticKernel& k, double phi) {
  const Complex ph = std::polar(1.0, 2.0 * phi);
  return {k.C, ph * k.S};
}

}  // namespace gbm
