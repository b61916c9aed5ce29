#include <catch2/catch_amalgamated.hpp>

#include "gbm/analysis.hpp"
#include "gbm/io.hpp"
#include "testutil.hpp"

using namespace gbm;

namespace {

// Bus-restricted minimum variance straight from the physical covariance, the
// brute-force oracle both lossy_squeezing routes must reproduce.
double min_variance_oracle(const TensorKernel& tk, Index bus) {
  QuadratureCovariance cov = covariance(flatten(tk));
  const Index nt = tk.n_spectral, ns = tk.n_spatial, n = nt * ns;
  RealMatrix sub(2 * nt, 2 * nt);
  for (Index i = 0; i < nt; ++i)
    for (Index j = 0; j < nt; ++j) {
      const Index bi = i * ns + bus, bj = j * ns + bus;
      sub(i, j) = cov.sigma(bi, bj);
      sub(i, nt + j) = cov.sigma(bi, n + bj);
      sub(nt + i, j) = cov.sigma(n + bi, bj);
      sub(nt + i, nt + j) = cov.sigma(n + bi, n + bj);
    }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sub);
  return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("covariance: identity kernel gives the vacuum") {
  auto cov = covariance(SymplecticKernel::identity(3));
  CHECK((cov.sigma - RealMatrix::Identity(6, 6)).norm() < 1e-14);
}

TEST_CASE("covariance: single-mode squeezer") {
  const double r = 0.6;
  RealVector rr(1);
  rr << r;
  auto cov = covariance(SymplecticKernel::squeezer(rr));
  CHECK(cov.sigma(0, 0) == Catch::Approx(std::exp(2 * r)).epsilon(1e-12));
  CHECK(cov.sigma(1, 1) == Catch::Approx(std::exp(-2 * r)).epsilon(1e-12));
  CHECK(std::abs(cov.sigma(0, 1)) < 1e-14);
}

TEST_CASE("covariance: two-mode squeezer against the direct 4x4 computation") {
  const double r = 0.8, c = std::cosh(r), s = std::sinh(r);
  SymplecticKernel k{ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  k.C.diagonal().setConstant(c);
  k.S(0, 1) = s;
  k.S(1, 0) = s;
  auto cov = covariance(k);
  // real kernel: T = [[C+S, 0], [0, C-S]] and sigma = T T^T
  RealMatrix cs = (k.C + k.S).real(), cm = (k.C - k.S).real();
  RealMatrix expect = RealMatrix::Zero(4, 4);
  expect.topLeftCorner(2, 2) = cs * cs.transpose();
  expect.bottomRightCorner(2, 2) = cm * cm.transpose();
  CHECK((cov.sigma - expect).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(cov.sigma);
  CHECK(es.eigenvalues()(0) == Catch::Approx(std::exp(-2 * r)).epsilon(1e-10));
  RealVector nu = symplectic_eigenvalues(cov);
  CHECK((nu - RealVector::Ones(2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("covariance: symplectic eigenvalues of any valid kernel output are 1") {
  test::Rng rng(101);
  for (int rep = 0; rep < 5; ++rep) {
    SymplecticKernel k = test::random_kernel(rng, 4, 2);
    auto cov = covariance(k);
    CHECK((cov.sigma - cov.sigma.transpose()).norm() < 1e-12);
    RealVector nu = symplectic_eigenvalues(cov);
    CHECK((nu - RealVector::Ones(4)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("covariance: invalid kernel rejected") {
  SymplecticKernel k{ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)};
  CHECK_THROWS_AS(covariance(k), NotSymplectic);
}

TEST_CASE("dichroic: unitary involution") {
  ComplexMatrix d = dichroic(4, 2);
  CHECK(unitarity_residual(d) < 1e-15);
  CHECK((d * d - ComplexMatrix::Identity(8, 8)).norm() < 1e-15);
}

TEST_CASE("dichroic: signal-half excitation unchanged, idler half swapped") {
  ComplexMatrix d = dichroic(4, 2);
  ComplexVector sig = ComplexVector::Zero(8);
  sig(0 * 2 + 0) = 1.0;  // omega = 0 (signal half), x = 0
  CHECK((d * sig - sig).norm() < 1e-15);
  ComplexVector idl = ComplexVector::Zero(8);
  idl(2 * 2 + 0) = 1.0;  // omega = 2 (idler half), x = 0
  ComplexVector swapped = ComplexVector::Zero(8);
  swapped(2 * 2 + 1) = 1.0;
  CHECK((d * idl - swapped).norm() < 1e-15);
}

TEST_CASE("dichroic: commutes with spectrally block-diagonal, spatially trivial ops") {
  test::Rng rng(103);
  const Index nt = 4, ns = 2;
  ComplexMatrix b = ComplexMatrix::Zero(nt, nt);
  b.topLeftCorner(2, 2) = test::random_complex_matrix(rng, 2, 2);
  b.bottomRightCorner(2, 2) = test::random_complex_matrix(rng, 2, 2);
  ComplexMatrix m = ComplexMatrix::Zero(nt * ns, nt * ns);
  for (Index w = 0; w < nt; ++w)
    for (Index w2 = 0; w2 < nt; ++w2)
      for (Index x = 0; x < ns; ++x) m(w * ns + x, w2 * ns + x) = b(w, w2);
  ComplexMatrix d = dichroic(nt, ns);
  CHECK((d * m - m * d).norm() < 1e-13);
}

TEST_CASE("dichroic: odd spectrum rejected") {
  CHECK_THROWS_AS(dichroic(3, 2), OddSpectrum);
}

TEST_CASE("gbm of the dichroic-sandwiched JSA kernel has two-mode-squeezing cores") {
  // Random JSA with distinct Schmidt values; embed, propagate, add an ancilla
  // spatial mode, sandwich with the dichroic mirror, reduce.
  test::Rng rng(107);
  const Index nb = 3;  // bins per spectral half
  ComplexMatrix f = test::random_complex_matrix(rng, nb, nb);
  JSABlockHamiltonian j{f, {}};
  auto tm = two_mode_reduce(j);
  SymplecticKernel prop = propagate(jsa_embed(j));
  TensorKernel tk = embed_with_ancilla(prop, 2);
  TensorKernel sandwiched = sandwich_passive(tk, dichroic(2 * nb, 2));
  auto g = gbm_reduce(sandwiched);

  // Spectral GBM modes come in degenerate pairs (2k, 2k+1) with slice norm
  // sinh(f_d(k)); the S core couples the pair members across the two spatial
  // modes and vanishes elsewhere (the block anti-diagonal two-mode form).
  RealVector sn = slice_norms(g.s_core, 0);
  for (Index k2 = 0; k2 < nb; ++k2) {
    const double s = std::sinh(tm.f_d(k2));
    CHECK(sn(2 * k2) == Catch::Approx(s).margin(1e-9));
    CHECK(sn(2 * k2 + 1) == Catch::Approx(s).margin(1e-9));
  }
  double leakage = 0.0;
  double offdiag_pair = 0.0;
  for (Index n = 0; n < 2 * nb; ++n)
    for (Index m = 0; m < 2; ++m)
      for (Index n2 = 0; n2 < 2 * nb; ++n2)
        for (Index m2 = 0; m2 < 2; ++m2) {
          const double a = std::abs(g.s_core(n, m, n2, m2));
          if (n / 2 != n2 / 2) {
            leakage = std::max(leakage, a);  // outside the pair blocks
          } else if (n == n2 || m == m2) {
            offdiag_pair = std::max(offdiag_pair, a);  // inside a pair block,
                                                       // off the anti-diagonal
          }
        }
  CHECK(leakage < 1e-9);
  CHECK(offdiag_pair < 1e-9);

  // Separability: the spatial factors are trivial and the spectral factor
  // splits into signal-supported and idler-supported columns.
  CHECK((g.u_s.cwiseAbs() - RealMatrix::Identity(2, 2)).norm() < 1e-9);
  CHECK((g.v_s.cwiseAbs() - RealMatrix::Identity(2, 2)).norm() < 1e-9);
  for (Index c = 0; c < 2 * nb; ++c) {
    const double w_sig = g.u_t.col(c).head(nb).norm();
    const double w_idl = g.u_t.col(c).tail(nb).norm();
    CHECK(std::min(w_sig, w_idl) < 1e-9);  // one spectral half only
  }
}

TEST_CASE("lossy_squeezing: decoupled bus recovers e^{-2r} on both routes") {
  const double r = 0.5;
  const Index nt = 4, ns = 2, bus = 0;
  RealVector rr = RealVector::Zero(nt * ns);
  rr(0 * ns + bus) = r;
  TensorKernel tk = fold(SymplecticKernel::squeezer(rr), nt, ns);
  auto res = lossy_squeezing(tk, bus);
  CHECK(res.min_variance_bm == Catch::Approx(std::exp(-2 * r)).margin(1e-10));
  CHECK(res.min_variance_gbm == Catch::Approx(std::exp(-2 * r)).margin(1e-10));
}

TEST_CASE("lossy_squeezing: 50:50 coupling into the loss mode") {
  const double r = 0.7;
  const Index nt = 3, ns = 2, bus = 0;
  RealVector rr = RealVector::Zero(nt * ns);
  rr(0) = r;
  SymplecticKernel k = SymplecticKernel::squeezer(rr);
  // balanced beamsplitter between the two spatial modes, all frequencies
  ComplexMatrix bs = ComplexMatrix::Zero(nt * ns, nt * ns);
  const double inv = 1.0 / std::sqrt(2.0);
  for (Index w = 0; w < nt; ++w) {
    bs(w * ns + 0, w * ns + 0) = inv;
    bs(w * ns + 0, w * ns + 1) = inv;
    bs(w * ns + 1, w * ns + 0) = inv;
    bs(w * ns + 1, w * ns + 1) = -inv;
  }
  TensorKernel tk = fold(apply_passive(k, bs, PassiveSide::Output), nt, ns);
  auto res = lossy_squeezing(tk, bus);
  CHECK(std::abs(res.min_variance_bm - res.min_variance_gbm) < 1e-9);
  CHECK(res.min_variance_gbm > std::exp(-2 * r) + 1e-3);
  CHECK(res.min_variance_gbm == Catch::Approx(min_variance_oracle(tk, bus)).margin(1e-9));
}

TEST_CASE("lossy_squeezing: routes agree on random two-spatial-mode kernels") {
  test::Rng rng(109);
  for (int rep = 0; rep < 4; ++rep) {
    TensorKernel tk = test::random_tensor_kernel(rng, 8, 2);
    auto res = lossy_squeezing(tk, 1);
    CHECK(std::abs(res.min_variance_bm - res.min_variance_gbm) < 1e-8);
    CHECK(res.min_variance_gbm == Catch::Approx(min_variance_oracle(tk, 1)).margin(1e-8));
    // reported optimal mode is a unit spectral envelope
    CHECK(res.optimal_mode.norm() == Catch::Approx(1.0).epsilon(1e-10));
    // completion is orthogonal and symplectic
    const RealMatrix& u = res.symplectic_completion;
    CHECK((u * u.transpose() - RealMatrix::Identity(u.rows(), u.rows())).norm() < 1e-9);
    RealMatrix omega = RealMatrix::Zero(u.rows(), u.rows());
    const Index half = u.rows() / 2;
    omega.topRightCorner(half, half) = RealMatrix::Identity(half, half);
    omega.bottomLeftCorner(half, half) = -RealMatrix::Identity(half, half);
    CHECK((u * omega * u.transpose() - omega).norm() < 1e-9);
  }
}

TEST_CASE("lossy_squeezing: bad bus index") {
  test::Rng rng(113);
  TensorKernel tk = test::random_tensor_kernel(rng, 2, 2);
  CHECK_THROWS_AS(lossy_squeezing(tk, 5), BadDimension);
}

namespace {

// GHZ fixture: three congruence-rotated blocks with prescribed diagonal and
// off-diagonal spectra.
SymmetricHamiltonian ghz_fixture(test::Rng& rng, const RealVector& h_diag,
                                 const RealVector& f_off,
                                 const ComplexMatrix* perturb_12 = nullptr) {
  const Index b = h_diag.size();
  std::array<ComplexMatrix, 3> q;
  for (auto& m : q) m = test::random_unitary(rng, b);
  SymmetricHamiltonian h;
  h.H = ComplexMatrix::Zero(3 * b, 3 * b);
  for (int i = 0; i < 3; ++i)
    h.H.block(i * b, i * b, b, b) =
        q[size_t(i)] * h_diag.asDiagonal() * q[size_t(i)].transpose();
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      ComplexMatrix d = f_off.asDiagonal().toDenseMatrix().cast<Complex>();
      if (perturb_12 && i == 0 && j == 1) d += *perturb_12;
      ComplexMatrix blk = q[size_t(i)] * d * q[size_t(j)].transpose();
      h.H.block(i * b, j * b, b, b) = blk;
      h.H.block(j * b, i * b, b, b) = blk.transpose();
    }
  return h;
}

}  // namespace

TEST_CASE("ghz_check: ideal symmetric Hamiltonian has vanishing residuals") {
  test::Rng rng(127);
  RealVector hd(2), fd(2);
  hd << 0.9, 0.4;
  fd << 0.6, 0.2;
  auto rep = ghz_check(ghz_fixture(rng, hd, fd));
  CHECK(rep.max_offdiag < 1e-10);
  CHECK(rep.modewise_deviation < 1e-10);
  CHECK(rep.parasitic_squeezing < 1e-10);
}

TEST_CASE("ghz_check: diagonal-spectrum perturbation is reported at its size") {
  test::Rng rng(131);
  RealVector hd(2), fd(2);
  hd << 0.9, 0.4;
  fd << 0.6, 0.2;
  for (double eps : {1e-3, 1e-2}) {
    ComplexMatrix p = ComplexMatrix::Zero(2, 2);
    p(0, 0) = eps;  // shifts the first off-diagonal Schmidt value of block 12
    auto rep = ghz_check(ghz_fixture(rng, hd, fd, &p));
    CHECK(rep.modewise_deviation > eps / 2);
    CHECK(rep.modewise_deviation < 2 * eps);
  }
}

TEST_CASE("ghz_check: off-diagonality perturbation is reported at its size") {
  test::Rng rng(137);
  RealVector hd(2), fd(2);
  hd << 0.9, 0.4;
  fd << 0.6, 0.2;
  for (double eps : {1e-3, 1e-2}) {
    ComplexMatrix p = ComplexMatrix::Zero(2, 2);
    p(0, 1) = eps;  // unit-norm off-diagonal injection into block 12
    auto rep = ghz_check(ghz_fixture(rng, hd, fd, &p));
    CHECK(rep.max_offdiag > eps / 2);
    CHECK(rep.max_offdiag < 2 * eps);
  }
}

TEST_CASE("ghz_check: random Hamiltonian gives positive residuals") {
  test::Rng rng(139);
  SymmetricHamiltonian h{test::random_symmetric(rng, 6), {}};
  auto rep = ghz_check(h);
  CHECK(rep.parasitic_squeezing > 1e-3);
  CHECK(rep.max_offdiag > 1e-3);
}

TEST_CASE("ghz_check: non-trisectable dimension rejected") {
  test::Rng rng(149);
  SymmetricHamiltonian h{test::random_symmetric(rng, 4), {}};
  CHECK_THROWS_AS(ghz_check(h), BadTrisection);
}

TEST_CASE("ghz_balance: value at zero for both readings") {
  // as printed: -(1/4) ln[(2 + e^6)/3]
  const double expect = -0.25 * std::log((2.0 + std::exp(6.0)) / 3.0);
  CHECK(ghz_balance(0.0, GHZBalanceVariant::AsPrinted) == Catch::Approx(expect).epsilon(1e-14));
  CHECK(ghz_balance(0.0, GHZBalanceVariant::ExponentTypo) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("ghz_balance: both variants evaluate at 0.5") {
  const double h = 0.5;
  const double printed = ghz_balance(h, GHZBalanceVariant::AsPrinted);
  const double typo = ghz_balance(h, GHZBalanceVariant::ExponentTypo);
  const double e6h = std::exp(6.0 * h);
  CHECK(printed ==
        Catch::Approx(h - 0.25 * std::log(e6h * (2.0 + std::exp(6.0)) / (1.0 + 2.0 * e6h))));
  CHECK(typo == Catch::Approx(h - 0.25 * std::log(e6h * (2.0 + e6h) / (1.0 + 2.0 * e6h))));
  CHECK(printed != typo);
}
