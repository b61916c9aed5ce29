#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>

#include "gbm/io.hpp"
#include "testutil.hpp"

using namespace gbm;

namespace {

const std::string tmpdir = GBM_TEST_TMPDIR;
const std::string cli = GBM_CLI_PATH;

std::string tmp_path(const std::string& name) { return tmpdir + "/" + name; }

int run_cli(const std::string& args) {
  const std::string cmd = cli + " " + args + " 2>> " + tmp_path("cli_stderr.log");
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Json load_json(const std::string& path) { return Json::parse(read_file_bytes(path)); }

Json strip_timing(Json j) {
  j.erase("timing_ms");
  return j;
}

KernelFile identity_kernel_file(Index n) {
  KernelFile kf;
  kf.kind = "kernel";
  kf.n_spectral = n;
  kf.n_spatial = 1;
  kf.kernel = SymplecticKernel::identity(n);
  return kf;
}

}  // namespace

TEST_CASE("kernel file: minimal identity kernel round-trips") {
  const std::string path = tmp_path("identity.json");
  write_kernel(path, identity_kernel_file(1));
  KernelFile back = read_kernel(path);
  CHECK(back.kind == "kernel");
  CHECK(back.kernel.C(0, 0) == Complex(1.0, 0.0));
  CHECK(back.kernel.S(0, 0) == Complex(0.0, 0.0));
}

TEST_CASE("kernel file: random tensor kernel round-trips bitwise") {
  test::Rng rng(301);
  KernelFile kf;
  kf.kind = "tensor-kernel";
  kf.n_spectral = 3;
  kf.n_spatial = 2;
  kf.grid = {0.0, 0.5, 1.0};
  kf.tensor_kernel = test::random_tensor_kernel(rng, 3, 2);
  const std::string path = tmp_path("tensor.json");
  write_kernel(path, kf);
  KernelFile back = read_kernel(path);
  CHECK(back.tensor_kernel.C == kf.tensor_kernel.C);
  CHECK(back.tensor_kernel.S == kf.tensor_kernel.S);
  CHECK(back.grid == kf.grid);
  // a second write produces identical bytes
  const std::string path2 = tmp_path("tensor2.json");
  write_kernel(path2, back);
  CHECK(read_file_bytes(path) == read_file_bytes(path2));
}

TEST_CASE("kernel file: shape/payload mismatch raises ParseError naming the field") {
  KernelFile kf = identity_kernel_file(2);
  Json j = kernel_file_to_json(kf);
  j["shape"]["n_spectral"] = 3;
  const std::string path = tmp_path("mismatch.json");
  io_detail::atomic_write(path, j.dump(1));
  try {
    read_kernel(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("payload.C") != std::string::npos);
  }
}

TEST_CASE("kernel file: unsupported version rejected") {
  Json j = kernel_file_to_json(identity_kernel_file(1));
  j["format_version"] = 99;
  const std::string path = tmp_path("version.json");
  io_detail::atomic_write(path, j.dump(1));
  CHECK_THROWS_AS(read_kernel(path), VersionUnsupported);
}

TEST_CASE("fixture_double_gaussian: equal widths give a separable rank-1 JSA") {
  JSABlockHamiltonian j = fixture_double_gaussian(1.0, 1.0, 16, 1.0);
  Eigen::JacobiSVD<ComplexMatrix> svd(j.F);
  RealVector sv = svd.singularValues();
  CHECK(sv(1) / sv(0) < 1e-10);  // Schmidt rank 1
  auto tm = two_mode_reduce(j);
  RealVector w = tm.f_d.array().square();
  w /= w.sum();
  CHECK(w.squaredNorm() == Catch::Approx(1.0).margin(1e-10));  // purity 1
}

TEST_CASE("fixture_double_gaussian: Schmidt spectrum is geometric with the Mehler ratio") {
  const double sp = 4.0, sm = 1.0;
  JSABlockHamiltonian j = fixture_double_gaussian(sp, sm, 64, 1.0);
  auto tm = two_mode_reduce(j);
  const double mu = double_gaussian_schmidt_ratio(sp, sm);
  CHECK(mu == Catch::Approx(0.6));
  for (Index k = 0; k + 1 < 5; ++k)
    CHECK(tm.f_d(k + 1) / tm.f_d(k) == Catch::Approx(mu).epsilon(1e-4));
}

TEST_CASE("fixture_double_gaussian: zero amplitude gives the zero Hamiltonian") {
  JSABlockHamiltonian j = fixture_double_gaussian(2.0, 1.0, 8, 0.0);
  CHECK(j.F.norm() == 0.0);
}

TEST_CASE("fixture_double_gaussian: parameter validation") {
  CHECK_THROWS_AS(fixture_double_gaussian(-1.0, 1.0, 16, 1.0), BadParameter);
  CHECK_THROWS_AS(fixture_double_gaussian(1.0, 1.0, 4, 1.0), BadParameter);
}

TEST_CASE("cli: validate identity kernel exits 0 with zero residuals") {
  const std::string in = tmp_path("cli_id.json");
  write_kernel(in, identity_kernel_file(2));
  const std::string out = tmp_path("cli_id_report.json");
  REQUIRE(run_cli("validate " + in + " --out " + out) == 0);
  Json r = load_json(out);
  CHECK(r.at("valid").get<bool>());
  CHECK(r.at("residuals").at("cc_dagger_minus_ss_dagger").get<double>() == 0.0);
  CHECK(r.at("input_digest").get<std::string>().size() == 16);
}

TEST_CASE("cli: validate invalid kernel exits 1") {
  KernelFile kf = identity_kernel_file(2);
  kf.kernel.S = ComplexMatrix::Identity(2, 2);
  const std::string in = tmp_path("cli_bad.json");
  write_kernel(in, kf);
  CHECK(run_cli("validate " + in + " --out " + tmp_path("cli_bad_report.json")) == 1);
}

TEST_CASE("cli: usage errors exit 2") {
  CHECK(run_cli("validate") == 2);                    // missing input
  CHECK(run_cli("decompose --mode bm") == 2);         // missing input and --out
  CHECK(run_cli("nonsense") == 2);
  CHECK(run_cli("truncate " + tmp_path("cli_id.json")) == 2);  // missing --d/--out
}

TEST_CASE("cli: decompose bm emits every invariant residual and is deterministic") {
  test::Rng rng(307);
  KernelFile kf;
  kf.kind = "kernel";
  kf.n_spectral = 4;
  kf.n_spatial = 1;
  kf.kernel = test::random_kernel(rng, 4, 1);
  const std::string in = tmp_path("cli_bm_in.json");
  write_kernel(in, kf);
  const std::string out1 = tmp_path("cli_bm_r1.json");
  const std::string out2 = tmp_path("cli_bm_r2.json");
  REQUIRE(run_cli("decompose --mode bm " + in + " --out " + out1) == 0);
  REQUIRE(run_cli("decompose --mode bm " + in + " --out " + out2) == 0);
  Json r1 = load_json(out1), r2 = load_json(out2);
  CHECK(strip_timing(r1) == strip_timing(r2));
  for (const char* key :
       {"cc_dagger_minus_ss_dagger", "cs_transpose_minus_sc_transpose",
        "cdagger_c_minus_st_s_conj", "cdagger_s_minus_st_c_conj", "bm_reconstruction",
        "c2_minus_s2_minus_1", "u_unitarity", "v_unitarity"}) {
    REQUIRE(r1.at("residuals").contains(key));
    CHECK(r1.at("residuals").at(key).get<double>() < 1e-9);
  }
  CHECK(r1.at("figures").at("photon_number").get<double>() > 0.0);
}

TEST_CASE("cli: fixture -> two-mode analysis pipeline") {
  const std::string fx = tmp_path("cli_dg.json");
  REQUIRE(run_cli("fixture double-gaussian --sigma-plus 2 --sigma-minus 1 --bins 64 --out " +
                  fx) == 0);
  KernelFile kf = read_kernel(fx);
  CHECK(kf.kind == "hamiltonian");
  CHECK(kf.jsa_bisection == 64);
  const std::string out = tmp_path("cli_dg_tm.json");
  REQUIRE(run_cli("analyze two-mode " + fx + " --out " + out) == 0);
  Json r = load_json(out);
  CHECK(r.at("residuals").at("congruence").get<double>() < 1e-10);
  RealVector sv(5);
  for (Index k = 0; k < 5; ++k) sv(k) = r.at("figures").at("schmidt_values")[size_t(k)];
  const double mu = double_gaussian_schmidt_ratio(2.0, 1.0);
  for (Index k = 0; k + 1 < 4; ++k) CHECK(sv(k + 1) / sv(k) == Catch::Approx(mu).epsilon(1e-4));
}

TEST_CASE("cli: truncate then decompose bm agree on the captured photon number") {
  // Narrow-band fixture: the discarded tail is below the validation tolerance,
  // so the truncated kernel stays numerically symplectic.
  const std::string fx = tmp_path("cli_trunc_src.json");
  REQUIRE(run_cli("fixture double-gaussian --sigma-plus 1.3 --sigma-minus 1 --bins 8 "
                  "--amplitude 0.6 --embed dichroic --out " +
                  fx) == 0);
  const std::string cut = tmp_path("cli_truncated.json");
  const std::string rep = tmp_path("cli_trunc_report.json");
  REQUIRE(run_cli("truncate --d 2 " + fx + " --out " + cut + " --report " + rep) == 0);
  Json tr = load_json(rep);
  const double captured = tr.at("figures").at("captured_photon_number").get<double>();
  const std::string bmrep = tmp_path("cli_trunc_bm.json");
  REQUIRE(run_cli("decompose --mode bm " + cut + " --out " + bmrep + " --tol 1e-6") == 0);
  Json bm = load_json(bmrep);
  CHECK(bm.at("figures").at("photon_number").get<double>() ==
        Catch::Approx(captured).margin(1e-8));
}

TEST_CASE("cli: analyze ghz runs on a trisected Hamiltonian file") {
  test::Rng rng(311);
  KernelFile kf;
  kf.kind = "hamiltonian";
  kf.n_spectral = 6;
  kf.n_spatial = 1;
  kf.hamiltonian.H = test::random_symmetric(rng, 6);
  const std::string in = tmp_path("cli_ghz.json");
  write_kernel(in, kf);
  const std::string out = tmp_path("cli_ghz_report.json");
  REQUIRE(run_cli("analyze ghz " + in + " --out " + out) == 0);
  Json r = load_json(out);
  CHECK(r.at("figures").at("parasitic_squeezing").get<double>() > 0.0);
  CHECK(r.at("figures").at("offdiag_residuals").size() == 9);
}

TEST_CASE("cli: fock postselect on two pair sources") {
  const double r = 0.5, c = std::cosh(r), s = std::sinh(r);
  KernelFile kf;
  kf.kind = "kernel";
  kf.n_spectral = 4;
  kf.n_spatial = 1;
  kf.kernel = SymplecticKernel{ComplexMatrix::Zero(4, 4), ComplexMatrix::Zero(4, 4)};
  kf.kernel.C.diagonal().setConstant(c);
  kf.kernel.S(0, 1) = kf.kernel.S(1, 0) = s;
  kf.kernel.S(2, 3) = kf.kernel.S(3, 2) = s;
  const std::string in = tmp_path("cli_fock.json");
  write_kernel(in, kf);
  Json proj;
  proj["accepted"] = Json::array({Json{{"tuple", {1, 1, 0, 0}}, {"label", "A"}},
                                  Json{{"tuple", {0, 0, 1, 1}}, {"label", "B"}}});
  const std::string pj = tmp_path("cli_proj.json");
  io_detail::atomic_write(pj, proj.dump(1));
  const std::string out = tmp_path("cli_fock_report.json");
  REQUIRE(run_cli("fock postselect --proj " + pj + " --sector 2 " + in + " --out " + out) == 0);
  Json rep = load_json(out);
  const double expect = std::tanh(r) / (c * c);
  CHECK(rep.at("figures").at("success_probability").get<double>() ==
        Catch::Approx(2 * expect * expect).epsilon(1e-8));
}

TEST_CASE("cli: analyze loss on a two-spatial-mode kernel file") {
  test::Rng rng(313);
  KernelFile kf;
  kf.kind = "tensor-kernel";
  kf.n_spectral = 4;
  kf.n_spatial = 2;
  kf.tensor_kernel = test::random_tensor_kernel(rng, 4, 2);
  const std::string in = tmp_path("cli_loss.json");
  write_kernel(in, kf);
  const std::string out = tmp_path("cli_loss_report.json");
  REQUIRE(run_cli("analyze loss --bus 0 " + in + " --out " + out) == 0);
  Json r = load_json(out);
  CHECK(r.at("figures").at("route_disagreement").get<double>() < 1e-8);
}

TEST_CASE("cli: decompose gbm flags the two-mode block form of the dichroic fixture") {
  const std::string fx = tmp_path("cli_gbm_dichroic.json");
  REQUIRE(run_cli("fixture double-gaussian --sigma-plus 2 --sigma-minus 1 --bins 8 "
                  "--amplitude 0.7 --embed dichroic --out " +
                  fx) == 0);
  const std::string out = tmp_path("cli_gbm_dichroic_report.json");
  REQUIRE(run_cli("decompose --mode gbm " + fx + " --out " + out) == 0);
  Json r = load_json(out);
  CHECK(r.at("figures").at("two_mode_block_form").get<bool>());
  CHECK(r.at("figures").at("two_mode_block_leakage").get<double>() < 1e-8);
  // a generic random kernel does not have the structure
  test::Rng rng(317);
  KernelFile kf;
  kf.kind = "tensor-kernel";
  kf.n_spectral = 4;
  kf.n_spatial = 2;
  kf.tensor_kernel = test::random_tensor_kernel(rng, 4, 2);
  const std::string in2 = tmp_path("cli_gbm_generic.json");
  write_kernel(in2, kf);
  const std::string out2 = tmp_path("cli_gbm_generic_report.json");
  REQUIRE(run_cli("decompose --mode gbm " + in2 + " --out " + out2) == 0);
  CHECK_FALSE(load_json(out2).at("figures").at("two_mode_block_form").get<bool>());
}
