#pragma once

// Physical-scenario analyses on top of the decompositions: quadrature
// covariance of kernel outputs on vacuum, squeezing seen through a lossy bus
// mode (Bloch-Messiah + Gram-Schmidt route vs GBM route), dichroic-mirror
// constructions, and GHZ trisection diagnostics.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gbm/hamiltonian.hpp"
#include "gbm/linalg.hpp"
#include "gbm/symplectic.hpp"
#include "gbm/tensor.hpp"
#include "gbm/types.hpp"

namespace gbm {

/// Real symmetric covariance of output quadratures (xxpp ordering), scaled so
/// vacuum gives sigma = identity.
struct QuadratureCovariance {
  RealMatrix sigma;

  Index modes() const { return sigma.rows() / 2; }
};

/// Real symplectic representation of a kernel in the quadrature basis,
/// T = Q M Q^dag with the unitary Q = (1 1; -i i)/sqrt(2) per mode.
inline RealMatrix quadrature_rep(const ComplexMatrix& c, const ComplexMatrix& s) {
  const Index n = c.rows(), m = c.cols();
  RealMatrix t(2 * n, 2 * m);
  t.topLeftCorner(n, m) = (c + s).real();
  t.topRightCorner(n, m) = (s - c).imag();
  t.bottomLeftCorner(n, m) = (c + s).imag();
  t.bottomRightCorner(n, m) = (c - s).real();
  return t;
}

/// Quadrature rep of a passive transformation w (rectangular allowed):
/// [[Re w, -Im w], [Im w, Re w]].
inline RealMatrix quadrature_rep_passive(const ComplexMatrix& w) {
  RealMatrix t(2 * w.rows(), 2 * w.cols());
  t.topLeftCorner(w.rows(), w.cols()) = w.real();
  t.topRightCorner(w.rows(), w.cols()) = -w.imag();
  t.bottomLeftCorner(w.rows(), w.cols()) = w.imag();
  t.bottomRightCorner(w.rows(), w.cols()) = w.real();
  return t;
}

/// sigma = T T^T for T = Q M Q^dag; vacuum input gives sigma = 1.
inline QuadratureCovariance covariance(const SymplecticKernel& k,
                                       double tol = kDefaultSymplecticTol) {
  SymplecticReport rep = validate_symplectic(k, tol);
  if (!rep.valid)
    throw NotSymplectic("covariance: kernel fails symplecticity, max residual " +
                        std::to_string(rep.max_residual()));
  RealMatrix t = quadrature_rep(k.C, k.S);
  QuadratureCovariance out;
  out.sigma = t * t.transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  return out;
}

/// Symplectic eigenvalues of a quadrature covariance (moduli of the
/// eigenvalues of Omega sigma), descending; all 1 for pure Gaussian states.
inline RealVector symplectic_eigenvalues(const QuadratureCovariance& cov) {
  const Index n = cov.modes();
  RealMatrix omega = RealMatrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = RealMatrix::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -RealMatrix::Identity(n, n);
  Eigen::ComplexEigenSolver<ComplexMatrix> es((omega * cov.sigma).cast<Complex>());
  std::vector<double> mods(size_t(2 * n));
  for (Index i = 0; i < 2 * n; ++i) mods[size_t(i)] = std::abs(es.eigenvalues()(i));
  std::sort(mods.begin(), mods.end(), std::greater<double>());
  RealVector out(n);
  for (Index i = 0; i < n; ++i) out(i) = mods[size_t(2 * i)];
  return out;
}

/// Dichroic mirror on a flattened (omega-major) spectral x spatial space:
/// identity on the signal (first) half of the spectrum, swap of the spatial
/// pair on the idler (second) half.
inline ComplexMatrix dichroic(Index n_spectral, Index n_spatial, Index x1 = 0, Index x2 = 1) {
  if (n_spectral % 2 != 0) throw OddSpectrum("dichroic: n_spectral must be even");
  if (n_spatial < 2 || x1 == x2 || x1 < 0 || x2 < 0 || x1 >= n_spatial || x2 >= n_spatial)
    throw BadDimension("dichroic: need two distinct spatial modes");
  const Index n = n_spectral * n_spatial;
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  for (Index w = 0; w < n_spectral; ++w)
    for (Index x = 0; x < n_spatial; ++x) {
      Index x_out = x;
      if (w >= n_spectral / 2) {
        if (x == x1)
          x_out = x2;
        else if (x == x2)
          x_out = x1;
      }
      d(w * n_spatial + x_out, w * n_spatial + x) = 1.0;
    }
  return d;
}

/// Places a matrix kernel on spatial mode `active` of an n_spatial-mode
/// tensor kernel; the other spatial modes pass through as identity.
inline TensorKernel embed_with_ancilla(const SymplecticKernel& k, Index n_spatial,
                                       Index active = 0) {
  if (n_spatial < 1 || active < 0 || active >= n_spatial)
    throw BadDimension("embed_with_ancilla: bad spatial layout");
  const Index nt = k.dim();
  TensorKernel tk{nt, n_spatial, Tensor4(nt, n_spatial, nt, n_spatial),
                  Tensor4(nt, n_spatial, nt, n_spatial)};
  for (Index w = 0; w < nt; ++w)
    for (Index w2 = 0; w2 < nt; ++w2) {
      tk.C(w, active, w2, active) = k.C(w, w2);
      tk.S(w, active, w2, active) = k.S(w, w2);
    }
  for (Index x = 0; x < n_spatial; ++x) {
    if (x == active) continue;
    for (Index w = 0; w < nt; ++w) tk.C(w, x, w, x) = 1.0;
  }
  return tk;
}

/// Sandwiches a passive unitary (flattened, omega-major) around a tensor
/// kernel on both output and input sides.
inline TensorKernel sandwich_passive(const TensorKernel& tk, const ComplexMatrix& w) {
  SymplecticKernel k = flatten(tk);
  k = apply_passive(apply_passive(k, w, PassiveSide::Output), w, PassiveSide::Input);
  return fold(k, tk.n_spectral, tk.n_spatial);
}

/// Outcome of the lossy-squeezing minimization. Both routes compute the
/// minimum quadrature variance over spectral modes on the bus; the optimal
/// mode and its orthogonal-symplectic completion come from the GBM route.
struct LossySqueezingResult {
  double min_variance_bm = 0.0;
  double min_variance_gbm = 0.0;
  double squeezing_db = 0.0;
  ComplexVector optimal_mode;          // spectral envelope on the bus
  RealMatrix symplectic_completion;    // 2 nt x 2 nt orthogonal symplectic
  std::string method = "gbm";
};

namespace detail {

// Minimum eigenvalue and eigenvector of the bus-restricted covariance block.
inline std::pair<double, ComplexVector> min_variance_mode(const RealMatrix& sigma_bus) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sigma_bus);
  const RealVector v = es.eigenvectors().col(0);
  const Index nt = sigma_bus.rows() / 2;
  ComplexVector mode(nt);
  for (Index i = 0; i < nt; ++i) mode(i) = Complex(v(i), v(nt + i));
  const double nrm = mode.norm();
  if (nrm > 0) mode /= nrm;
  return {es.eigenvalues()(0), mode};
}

}  // namespace detail

/// Minimum quadrature variance observable in spectral modes of one spatial
/// (bus) mode, computed along two independent routes:
///  (a) Bloch-Messiah, bus-restricted basis modes orthonormalized by pivoted
///      Gram-Schmidt, covariance assembled from the diagonal BM covariance;
///  (b) GBM core covariance rotated back to the physical spatial basis.
inline LossySqueezingResult lossy_squeezing(const TensorKernel& tk, Index bus,
                                            double tol = kDefaultSymplecticTol) {
  const Index nt = tk.n_spectral, ns = tk.n_spatial;
  if (bus < 0 || bus >= ns) throw BadDimension("lossy_squeezing: bus index out of range");

  // Route (a): BM + Gram-Schmidt.
  SymplecticKernel k = flatten(tk);
  BMDecomposition bm = bloch_messiah(k, tol);
  ComplexMatrix u_bus(nt, nt * ns);
  for (Index w = 0; w < nt; ++w) u_bus.row(w) = bm.U.row(w * ns + bus);
  std::vector<ComplexVector> cols;
  cols.reserve(size_t(nt * ns));
  for (Index c = 0; c < nt * ns; ++c) cols.push_back(u_bus.col(c));
  GramSchmidtResult gs = gram_schmidt_pivoted(cols, 1e-10);
  if (gs.kept.empty()) throw DegenerateBasis("lossy_squeezing: all bus modes dropped");

  SymplecticKernel bm_diag{ComplexMatrix(bm.c_diag.asDiagonal()),
                           ComplexMatrix(bm.s_diag.asDiagonal())};
  QuadratureCovariance cov_bm = covariance(bm_diag, tol);
  ComplexMatrix r = gs.basis.adjoint() * u_bus;  // overlap of GS modes with BM modes
  RealMatrix t_r = quadrature_rep_passive(r);
  RealMatrix sigma_bar = t_r * cov_bm.sigma * t_r.transpose();
  auto [min_a, mode_a_bar] = detail::min_variance_mode(sigma_bar);
  (void)mode_a_bar;

  // Route (b): GBM core covariance, spatial index rotated back to physical.
  GBMDecomposition g = gbm_reduce(tk, tol);
  SymplecticKernel core_k = flatten(TensorKernel{nt, ns, g.c_core, g.s_core});
  QuadratureCovariance cov_core = covariance(core_k, tol);
  ComplexMatrix w_s = ComplexMatrix::Zero(nt * ns, nt * ns);
  for (Index n = 0; n < nt; ++n)
    for (Index x = 0; x < ns; ++x)
      for (Index m = 0; m < ns; ++m) w_s(n * ns + x, n * ns + m) = g.u_s(x, m);
  RealMatrix t_s = quadrature_rep_passive(w_s);
  RealMatrix sigma_phys = t_s * cov_core.sigma * t_s.transpose();

  std::vector<Index> bus_rows;
  for (Index n = 0; n < nt; ++n) bus_rows.push_back(n * ns + bus);
  RealMatrix sigma_bus(2 * nt, 2 * nt);
  const Index ntot = nt * ns;
  for (Index i = 0; i < nt; ++i)
    for (Index j = 0; j < nt; ++j) {
      sigma_bus(i, j) = sigma_phys(bus_rows[size_t(i)], bus_rows[size_t(j)]);
      sigma_bus(i, nt + j) = sigma_phys(bus_rows[size_t(i)], ntot + bus_rows[size_t(j)]);
      sigma_bus(nt + i, j) = sigma_phys(ntot + bus_rows[size_t(i)], bus_rows[size_t(j)]);
      sigma_bus(nt + i, nt + j) =
          sigma_phys(ntot + bus_rows[size_t(i)], ntot + bus_rows[size_t(j)]);
    }
  auto [min_b, mode_b] = detail::min_variance_mode(sigma_bus);

  if (std::abs(min_a - min_b) > 1e-6 * std::max(1.0, std::abs(min_b)))
    throw Error("lossy_squeezing: BM and GBM routes disagree: " + std::to_string(min_a) +
                " vs " + std::to_string(min_b));

  LossySqueezingResult out;
  out.min_variance_bm = min_a;
  out.min_variance_gbm = min_b;
  out.squeezing_db = -10.0 * std::log10(std::max(min_b, 1e-300));
  // Physical spectral envelope of the optimal mode on the bus.
  out.optimal_mode = g.u_t * mode_b;

  // Complete the mode to an orthogonal symplectic basis change: unitary with
  // the optimal mode first, then its real symplectic representation.
  std::vector<ComplexVector> completion;
  completion.push_back(out.optimal_mode);
  for (Index i = 0; i < nt; ++i) completion.push_back(ComplexVector::Unit(nt, i));
  GramSchmidtResult comp = gram_schmidt_pivoted(completion, 1e-8);
  out.symplectic_completion = quadrature_rep_passive(comp.basis);
  out.method = "gbm";
  return out;
}

/// GHZ trisection diagnostics of a spectral Hamiltonian (Eq.-12-style):
/// congruence factors from the diagonal blocks, then per-block
/// off-diagonality, modewise-symmetry deviation, and the total parasitic
/// squeezing magnitude.
struct GHZReport {
  Eigen::Matrix3d offdiag_residual;   // ||offdiag(H'_ij)||_F per block
  double modewise_deviation = 0.0;    // max deviation from the symmetry conditions
  double parasitic_squeezing = 0.0;   // norm of all off-diagonal core elements
  double max_offdiag = 0.0;
};

inline GHZReport ghz_check(const SymmetricHamiltonian& h, double tol = 1e-8) {
  require_symmetric(h.H, tol, "ghz_check input");
  const Index n = h.dim();
  if (n % 3 != 0) throw BadTrisection("ghz_check: spectral dimension must be divisible by 3");
  const Index b = n / 3;

  std::array<ComplexMatrix, 3> u;
  for (int i = 0; i < 3; ++i)
    u[size_t(i)] = takagi(h.H.block(i * b, i * b, b, b), tol).unitary;

  std::array<std::array<ComplexMatrix, 3>, 3> blk;
  GHZReport rep;
  rep.offdiag_residual.setZero();
  double par2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      ComplexMatrix t = u[size_t(i)].adjoint() * h.H.block(i * b, j * b, b, b) *
                        u[size_t(j)].conjugate();
      blk[size_t(i)][size_t(j)] = t;
      ComplexMatrix off = t;
      off.diagonal().setZero();
      rep.offdiag_residual(i, j) = off.norm();
      rep.max_offdiag = std::max(rep.max_offdiag, off.norm());
      par2 += off.squaredNorm();
    }
  rep.parasitic_squeezing = std::sqrt(par2);

  // Modewise symmetry: diagonal blocks agree, off-diagonal blocks agree.
  // Congruence sign freedom of the Takagi factors is quotiented out by
  // comparing magnitudes.
  double dev = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      for (int i2 = 0; i2 < 3; ++i2)
        for (int j2 = 0; j2 < 3; ++j2) {
          if (i2 == j2 || (i2 == i && j2 == j)) continue;
          dev = std::max(dev, (blk[size_t(i)][size_t(j)].diagonal().cwiseAbs() -
                               blk[size_t(i2)][size_t(j2)].diagonal().cwiseAbs())
                                  .cwiseAbs()
                                  .maxCoeff());
        }
    }
  for (int i = 0; i < 3; ++i)
    for (int i2 = i + 1; i2 < 3; ++i2)
      dev = std::max(dev, (blk[size_t(i)][size_t(i)].diagonal().cwiseAbs() -
                           blk[size_t(i2)][size_t(i2)].diagonal().cwiseAbs())
                              .cwiseAbs()
                              .maxCoeff());
  rep.modewise_deviation = dev;
  return rep;
}

inline GHZReport ghz_check(const TensorHamiltonian& th, double tol = 1e-8) {
  if (th.n_spectral % 3 != 0)
    throw BadTrisection("ghz_check: spectral dimension must be divisible by 3");
  return ghz_check(flatten(th), tol);
}

enum class GHZBalanceVariant {
  AsPrinted,      // e^{6} constant factor, as in the footnote
  ExponentTypo    // e^{6 H^D_ij}, the dimensionally consistent reading
};

/// Required diagonal Hamiltonian value for vanishing local squeezing, from the
/// GHZ-balance footnote formula. Both readings of the ambiguous exponent are
/// provided; neither is presented as ground truth.
inline double ghz_balance(double hd_offdiag,
                          GHZBalanceVariant variant = GHZBalanceVariant::AsPrinted) {
  if (!std::isfinite(hd_offdiag)) throw NonFinite("ghz_balance: input not finite");
  const double e6h = std::exp(6.0 * hd_offdiag);
  const double num = (variant == GHZBalanceVariant::AsPrinted) ? e6h * (2.0 + std::exp(6.0))
                                                               : e6h * (2.0 + e6h);
  return hd_offdiag - 0.25 * std::log(num / (1.0 + 2.0 * e6h));
}

}  // namespace gbm
