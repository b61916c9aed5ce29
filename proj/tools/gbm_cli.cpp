// Command-line front end: validation, decompositions, truncation, physical
// analyses, Fock post-selection, and test fixtures. All numeric output goes
// to report files; logs go to stderr. Exit codes: 0 success, 1 validation or
// computation failure, 2 usage error.

#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gbm/gbm.hpp"

namespace {

using gbm::Complex;
using gbm::ComplexMatrix;
using gbm::Index;
using gbm::Json;
using gbm::RealVector;

Json vector_json(const RealVector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json cvector_json(const gbm::ComplexVector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(Json::array({v(i).real(), v(i).imag()}));
  return a;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

Json base_report(const std::string& command, const std::string& input_path) {
  Json r;
  r["command"] = command;
  r["input"] = input_path;
  r["input_digest"] = gbm::digest(gbm::read_file_bytes(input_path));
  return r;
}

std::string default_report_path(const std::string& in) { return in + ".report.json"; }

// Promotes any readable file to a tensor kernel: tensor kernels pass through,
// matrix kernels are folded per their shape metadata, Hamiltonians are
// propagated first.
gbm::TensorKernel load_tensor_kernel(const gbm::KernelFile& kf) {
  if (kf.kind == "tensor-kernel") return kf.tensor_kernel;
  if (kf.kind == "kernel") return gbm::fold(kf.kernel, kf.n_spectral, kf.n_spatial);
  if (kf.kind == "hamiltonian") {
    std::cerr << "note: propagating Hamiltonian to a kernel\n";
    return gbm::fold(gbm::propagate(kf.hamiltonian), kf.n_spectral, kf.n_spatial);
  }
  throw gbm::ParseError("expected a kernel-like file, got kind '" + kf.kind + "'");
}

gbm::TensorHamiltonian load_tensor_hamiltonian(const gbm::KernelFile& kf) {
  if (kf.kind == "tensor-hamiltonian") return kf.tensor_ham;
  if (kf.kind == "hamiltonian")
    return gbm::fold_hamiltonian(kf.hamiltonian, kf.n_spectral, kf.n_spatial);
  throw gbm::ParseError("expected a Hamiltonian file, got kind '" + kf.kind + "'");
}

Json symplectic_residuals_json(const gbm::SymplecticReport& rep) {
  return Json{{"cc_dagger_minus_ss_dagger", rep.cc_dag_minus_ss_dag},
              {"cs_transpose_minus_sc_transpose", rep.cs_t_minus_sc_t},
              {"cdagger_c_minus_st_s_conj", rep.cdag_c_minus_st_s},
              {"cdagger_s_minus_st_c_conj", rep.cdag_s_minus_st_c}};
}

int run_validate(const std::string& in, const std::string& out, double tol) {
  Timer t;
  gbm::KernelFile kf = gbm::read_kernel(in);
  gbm::SymplecticKernel k = flatten(load_tensor_kernel(kf));
  gbm::SymplecticReport rep = gbm::validate_symplectic(k, tol);
  Json r = base_report("validate", in);
  r["residuals"] = symplectic_residuals_json(rep);
  r["scale"] = rep.scale;
  r["tolerance"] = tol;
  r["valid"] = rep.valid;
  r["timing_ms"] = t.ms();
  gbm::write_report(out.empty() ? default_report_path(in) : out, r);
  std::cerr << (rep.valid ? "valid" : "INVALID") << ", max residual " << rep.max_residual()
            << "\n";
  return rep.valid ? 0 : 1;
}

void add_bm_figures(Json& r, const gbm::SymplecticKernel& k, const gbm::BMDecomposition& bm) {
  RealVector rparam(bm.s_diag.size());
  for (Index i = 0; i < bm.s_diag.size(); ++i) rparam(i) = std::asinh(bm.s_diag(i));
  RealVector db = rparam * (20.0 / std::log(10.0));
  RealVector c2s2 = bm.c_diag.array().square() - bm.s_diag.array().square() - 1.0;
  r["residuals"]["bm_reconstruction"] = gbm::bm_reconstruction_residual(k, bm);
  r["residuals"]["c2_minus_s2_minus_1"] = c2s2.cwiseAbs().maxCoeff();
  r["residuals"]["u_unitarity"] = gbm::unitarity_residual(bm.U);
  r["residuals"]["v_unitarity"] = gbm::unitarity_residual(bm.V);
  r["figures"]["c_diag"] = vector_json(bm.c_diag);
  r["figures"]["s_diag"] = vector_json(bm.s_diag);
  r["figures"]["squeezing_r"] = vector_json(rparam);
  r["figures"]["squeezing_db"] = vector_json(db);
  r["figures"]["photon_number"] = bm.s_diag.squaredNorm();
  r["figures"]["squeezed_count"] = bm.squeezed_count;
  r["factors"]["U"] = gbm::io_detail::matrix_to_json(bm.U);
  r["factors"]["V"] = gbm::io_detail::matrix_to_json(bm.V);
}

int run_decompose(const std::string& mode, const std::string& in, const std::string& out,
                  double tol) {
  Timer t;
  gbm::KernelFile kf = gbm::read_kernel(in);
  Json r = base_report("decompose --mode " + mode, in);

  if (mode == "bm") {
    gbm::SymplecticKernel k = flatten(load_tensor_kernel(kf));
    gbm::SymplecticReport rep = gbm::validate_symplectic(k, tol);
    r["residuals"] = symplectic_residuals_json(rep);
    gbm::BMDecomposition bm = gbm::bloch_messiah(k, tol);
    add_bm_figures(r, k, bm);
  } else if (mode == "takagi" || mode == "at") {
    gbm::SymmetricHamiltonian h = flatten(load_tensor_hamiltonian(kf));
    gbm::TakagiDecomposition td = gbm::antoine_takagi(h, tol);
    r["residuals"]["reconstruction"] =
        (td.unitary * td.diag.asDiagonal() * td.unitary.transpose() - h.H).norm();
    r["residuals"]["unitarity"] = gbm::unitarity_residual(td.unitary);
    r["figures"]["diag"] = vector_json(td.diag);
    r["factors"]["unitary"] = gbm::io_detail::matrix_to_json(td.unitary);
    if (mode == "at") {
      gbm::SymplecticKernel k = gbm::propagate(h, tol);
      gbm::SymplecticReport rep = gbm::validate_symplectic(k, tol);
      r["residuals"]["propagated_kernel"] = symplectic_residuals_json(rep);
      r["figures"]["squeezing_db"] = vector_json(td.diag * (20.0 / std::log(10.0)));
      r["figures"]["photon_number"] = td.diag.array().sinh().square().sum();
    }
  } else if (mode == "hosvd") {
    const gbm::Tensor4 tensor = (kf.kind == "tensor-kernel" || kf.kind == "kernel")
                                    ? load_tensor_kernel(kf).S
                                    : load_tensor_hamiltonian(kf).H;
    gbm::HOSVDResult h = gbm::hosvd(tensor);
    gbm::Tensor4 rec = gbm::tensor_reconstruct(h.core, h.factors);
    double err = 0.0;
    for (Index i = 0; i < rec.size(); ++i)
      err += std::norm(rec.data()[size_t(i)] - tensor.data()[size_t(i)]);
    r["residuals"]["reconstruction"] = std::sqrt(err);
    r["residuals"]["all_orthogonality"] = gbm::all_orthogonality_residual(h.core);
    r["residuals"]["norm_conservation"] = std::abs(h.core.norm() - tensor.norm());
    for (int k = 0; k < 4; ++k) {
      r["figures"]["slice_norms"].push_back(vector_json(gbm::slice_norms(h.core, k)));
      r["factors"]["U" + std::to_string(k + 1)] =
          gbm::io_detail::matrix_to_json(h.factors[size_t(k)]);
    }
  } else if (mode == "gbm") {
    gbm::TensorKernel tk = load_tensor_kernel(kf);
    gbm::GBMDecomposition g = gbm::gbm_reduce(tk, tol);
    gbm::SymplecticKernel core =
        flatten(gbm::TensorKernel{g.n_spectral, g.n_spatial, g.c_core, g.s_core});
    gbm::SymplecticReport rep = gbm::validate_symplectic(core, tol);
    r["residuals"]["core_symplectic"] = symplectic_residuals_json(rep);
    r["residuals"]["all_orthogonality"] = gbm::all_orthogonality_residual(g.s_core);
    gbm::Tensor4 s_rec = gbm::tensor_reconstruct(g.s_core, gbm::gbm_factors_s(g));
    gbm::Tensor4 c_rec = gbm::tensor_reconstruct(g.c_core, gbm::gbm_factors_c(g));
    double err_s = 0.0, err_c = 0.0;
    for (Index i = 0; i < s_rec.size(); ++i) {
      err_s += std::norm(s_rec.data()[size_t(i)] - tk.S.data()[size_t(i)]);
      err_c += std::norm(c_rec.data()[size_t(i)] - tk.C.data()[size_t(i)]);
    }
    r["residuals"]["s_reconstruction"] = std::sqrt(err_s);
    r["residuals"]["c_reconstruction"] = std::sqrt(err_c);
    r["figures"]["s_core_slice_norms"] = vector_json(gbm::slice_norms(g.s_core, 0));
    r["figures"]["total_photon_number"] = g.s_core.squared_norm();
    // Two-mode-squeezing structure diagnostic: each output spectral mode
    // couples to exactly one partner mode (block anti-diagonal S core).
    const Index nt = g.n_spectral, ns = g.n_spatial;
    const double s_norm = std::sqrt(g.s_core.squared_norm());
    std::vector<Index> partner(size_t(nt), -1);
    RealVector slice = gbm::slice_norms(g.s_core, 0);
    for (Index n = 0; n < nt; ++n) {
      double best = -1.0;
      for (Index n2 = 0; n2 < nt; ++n2) {
        double mass = 0.0;
        for (Index m = 0; m < ns; ++m)
          for (Index m2 = 0; m2 < ns; ++m2) mass += std::norm(g.s_core(n, m, n2, m2));
        if (mass > best) {
          best = mass;
          partner[size_t(n)] = n2;
        }
      }
    }
    double leakage = 0.0;
    bool involution = true;
    for (Index n = 0; n < nt; ++n) {
      if (slice(n) > 1e-8 * std::max(1.0, s_norm)) {
        const Index p = partner[size_t(n)];
        involution = involution && p != n && partner[size_t(p)] == n;
      }
      for (Index m = 0; m < ns; ++m)
        for (Index n2 = 0; n2 < nt; ++n2)
          for (Index m2 = 0; m2 < ns; ++m2)
            if (n2 != partner[size_t(n)])
              leakage = std::max(leakage, std::abs(g.s_core(n, m, n2, m2)));
    }
    r["figures"]["two_mode_block_leakage"] = leakage;
    r["figures"]["two_mode_block_form"] =
        involution && leakage < 1e-8 * std::max(1.0, s_norm);
    r["factors"]["u_t"] = gbm::io_detail::matrix_to_json(g.u_t);
    r["factors"]["u_s"] = gbm::io_detail::matrix_to_json(g.u_s);
    r["factors"]["v_t"] = gbm::io_detail::matrix_to_json(g.v_t);
    r["factors"]["v_s"] = gbm::io_detail::matrix_to_json(g.v_s);
  } else if (mode == "gat") {
    gbm::TensorHamiltonian th = load_tensor_hamiltonian(kf);
    gbm::GATDecomposition g = gbm::generalized_antoine_takagi(th, tol);
    gbm::Tensor4 rec = gbm::gat_reconstruct(g);
    double err = 0.0;
    for (Index i = 0; i < rec.size(); ++i)
      err += std::norm(rec.data()[size_t(i)] - th.H.data()[size_t(i)]);
    r["residuals"]["reconstruction"] = std::sqrt(err);
    r["residuals"]["pair_symmetry"] = gbm::pair_exchange_residual(th.H);
    r["figures"]["core_slice_norms"] = vector_json(gbm::slice_norms(g.core, 0));
    r["factors"]["u_t"] = gbm::io_detail::matrix_to_json(g.u_t);
    r["factors"]["u_s"] = gbm::io_detail::matrix_to_json(g.u_s);
  } else {
    std::cerr << "unknown --mode " << mode << "\n";
    return 2;
  }
  r["timing_ms"] = t.ms();
  gbm::write_report(out, r);
  std::cerr << "decompose " << mode << " done\n";
  return 0;
}

int run_truncate(const std::string& in, const std::string& out, const std::string& report_path,
                 Index d, double tol) {
  Timer t;
  gbm::KernelFile kf = gbm::read_kernel(in);
  gbm::TensorKernel tk = load_tensor_kernel(kf);
  gbm::GBMDecomposition g = gbm::gbm_reduce(tk, tol);
  gbm::TruncationResult tr = gbm::truncate(g, d);

  gbm::KernelFile out_kf;
  out_kf.kind = "tensor-kernel";
  out_kf.n_spectral = tr.kernel.n_spectral;
  out_kf.n_spatial = tr.kernel.n_spatial;
  out_kf.grid = kf.grid;
  out_kf.tensor_kernel = tr.kernel;
  gbm::write_kernel(out, out_kf);

  Json r = base_report("truncate --d " + std::to_string(d), in);
  r["output"] = out;
  r["figures"]["d_spectral"] = d;
  r["figures"]["captured_photon_number"] = tr.captured_photon_number;
  r["figures"]["total_photon_number"] = tr.total_photon_number;
  r["figures"]["captured_fraction"] =
      tr.total_photon_number > 0 ? tr.captured_photon_number / tr.total_photon_number : 1.0;
  r["timing_ms"] = t.ms();
  gbm::write_report(report_path.empty() ? default_report_path(out) : report_path, r);
  std::cerr << "captured " << tr.captured_photon_number << " of " << tr.total_photon_number
            << " photons\n";
  return 0;
}

int run_analyze_loss(const std::string& in, const std::string& out, Index bus, double tol) {
  Timer t;
  gbm::KernelFile kf = gbm::read_kernel(in);
  gbm::TensorKernel tk = load_tensor_kernel(kf);
  gbm::LossySqueezingResult res = gbm::lossy_squeezing(tk, bus, tol);
  Json r = base_report("analyze loss --bus " + std::to_string(bus), in);
  r["figures"]["min_variance_bm"] = res.min_variance_bm;
  r["figures"]["min_variance_gbm"] = res.min_variance_gbm;
  r["figures"]["squeezing_db"] = res.squeezing_db;
  r["figures"]["route_disagreement"] = std::abs(res.min_variance_bm - res.min_variance_gbm);
  r["figures"]["method"] = res.method;
  r["figures"]["optimal_mode"] = cvector_json(res.optimal_mode);
  r["timing_ms"] = t.ms();
  gbm::write_report(out.empty() ? default_report_path(in) : out, r);
  std::cerr << "min variance " << res.min_variance_gbm << " (" << res.squeezing_db << " dB)\n";
  return 0;
}

int run_analyze_two_mode(const std::string& in, const std::string& out, double tol) {
  Timer t;
  gbm::KernelFile kf = gbm::read_kernel(in);
  if (kf.kind != "hamiltonian" || kf.jsa_bisection <= 0)
    throw gbm::ParseError("analyze two-mode needs a hamiltonian file with jsa_bisection");
  const Index b = kf.jsa_bisection;
  const ComplexMatrix& h = kf.hamiltonian.H;
  if (h.rows() <= b) throw gbm::ParseError("jsa_bisection exceeds Hamiltonian dimension");
  gbm::JSABlockHamiltonian j;
  j.F = h.topRightCorner(b, h.cols() - b);
  j.grid = kf.grid;
  // embedding consistency: H = (0 F; F^T 0)
  double emb = h.topLeftCorner(b, b).norm() +
               h.bottomRightCorner(h.rows() - b, h.cols() - b).norm() +
               (h.bottomLeftCorner(h.rows() - b, b) - j.F.transpose()).norm();
  gbm::TwoModeReduction tm = gbm::two_mode_reduce(j);
  Json r = base_report("analyze two-mode", in);
  r["residuals"]["jsa_embedding"] = emb;
  r["residuals"]["congruence"] =
      (tm.u_s * tm.f_d.asDiagonal() * tm.u_i.transpose() - j.F).norm();
  r["residuals"]["kernel_symplectic"] =
      gbm::validate_symplectic(tm.kernel, tol).max_residual();
  r["figures"]["schmidt_values"] = vector_json(tm.f_d);
  RealVector probs = tm.f_d.array().square();
  if (probs.sum() > 0) probs /= probs.sum();
  r["figures"]["schmidt_weights"] = vector_json(probs);
  r["figures"]["purity"] = probs.squaredNorm();
  r["factors"]["u_s"] = gbm::io_detail::matrix_to_json(tm.u_s);
  r["factors"]["u_i"] = gbm::io_detail::matrix_to_json(tm.u_i);
  r["timing_ms"] = t.ms();
  gbm::write_report(out.empty() ? default_report_path(in) : out, r);
  std::cerr << "two-mode reduction done, leading Schmidt value " << tm.f_d(0) << "\n";
  return 0;
}

int run_analyze_ghz(const std::string& in, const std::string& out, double tol) {
  Timer t;
  gbm::KernelFile kf = gbm::read_kernel(in);
  gbm::SymmetricHamiltonian h = flatten(load_tensor_hamiltonian(kf));
  gbm::GHZReport rep = gbm::ghz_check(h, tol);
  Json r = base_report("analyze ghz", in);
  Json off = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      off.push_back(
          Json{{"block_row", i}, {"block_col", j}, {"offdiag", rep.offdiag_residual(i, j)}});
  r["figures"]["offdiag_residuals"] = off;
  r["figures"]["max_offdiag"] = rep.max_offdiag;
  r["figures"]["modewise_deviation"] = rep.modewise_deviation;
  r["figures"]["parasitic_squeezing"] = rep.parasitic_squeezing;
  r["timing_ms"] = t.ms();
  gbm::write_report(out.empty() ? default_report_path(in) : out, r);
  std::cerr << "ghz parasitic squeezing " << rep.parasitic_squeezing << "\n";
  return 0;
}

int run_fock_postselect(const std::string& in, const std::string& proj_path,
                        const std::string& out, int sector, double tol) {
  Timer t;
  gbm::KernelFile kf = gbm::read_kernel(in);
  gbm::SymplecticKernel k = flatten(load_tensor_kernel(kf));
  if (k.dim() > gbm::kMaxFockModes) throw gbm::TooLarge("fock postselect: more than 12 modes");
  gbm::BMDecomposition bm = gbm::bloch_messiah(k, tol);
  RealVector rparam(bm.s_diag.size());
  for (Index i = 0; i < bm.s_diag.size(); ++i) rparam(i) = std::asinh(bm.s_diag(i));
  auto sectors = gbm::squeezed_vacuum_expand(rparam, sector);

  Json pj;
  try {
    pj = Json::parse(gbm::read_file_bytes(proj_path));
  } catch (const Json::parse_error& e) {
    throw gbm::ParseError(proj_path + ": " + std::string(e.what()));
  }
  gbm::PostselectionProjector proj;
  if (!pj.contains("accepted") || !pj.at("accepted").is_array())
    throw gbm::ParseError(proj_path + ": field 'accepted' missing or not an array");
  for (const auto& e : pj.at("accepted"))
    proj.accepted.emplace_back(e.at("tuple").get<gbm::Occupation>(),
                               e.at("label").get<std::string>());

  gbm::PostselectionResult res = gbm::postselect(sectors[size_t(sector)], bm.U, proj);
  Json r = base_report("fock postselect --sector " + std::to_string(sector), in);
  r["figures"]["sector"] = sector;
  r["figures"]["sector_norm"] = sectors[size_t(sector)].squared_norm();
  r["figures"]["success_probability"] = res.success_probability;
  Json amps = Json::array();
  for (const auto& [label, amp] : res.amplitudes)
    amps.push_back(Json{{"label", label}, {"amplitude", Json::array({amp.real(), amp.imag()})}});
  r["figures"]["amplitudes"] = amps;
  r["timing_ms"] = t.ms();
  gbm::write_report(out.empty() ? default_report_path(in) : out, r);
  std::cerr << "postselect success probability " << res.success_probability << "\n";
  return 0;
}

int run_fixture_double_gaussian(double sigma_plus, double sigma_minus, Index bins,
                                double amplitude, const std::string& out,
                                const std::string& embed) {
  Timer t;
  gbm::JSABlockHamiltonian j =
      gbm::fixture_double_gaussian(sigma_plus, sigma_minus, bins, amplitude);
  gbm::KernelFile kf;
  kf.grid = j.grid;
  if (embed.empty()) {
    gbm::SymmetricHamiltonian h = gbm::jsa_embed(j);
    kf.kind = "hamiltonian";
    kf.n_spectral = h.dim();
    kf.n_spatial = 1;
    kf.jsa_bisection = bins;
    kf.hamiltonian = h;
  } else if (embed == "dichroic") {
    gbm::SymplecticKernel k = gbm::propagate(gbm::jsa_embed(j));
    gbm::TensorKernel tk = gbm::embed_with_ancilla(k, 2);
    kf.kind = "tensor-kernel";
    kf.n_spectral = 2 * bins;
    kf.n_spatial = 2;
    kf.tensor_kernel = gbm::sandwich_passive(tk, gbm::dichroic(2 * bins, 2));
  } else {
    std::cerr << "unknown --embed '" << embed << "'\n";
    return 2;
  }
  gbm::write_kernel(out, kf);
  std::cerr << "fixture written in " << t.ms() << " ms\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decompositions of discretized Gaussian (Bogoliubov) transformations"};
  app.require_subcommand(1);

  std::string in, out, report_path, mode, proj_path, embed;
  double tol = gbm::kDefaultSymplecticTol;
  Index d = 1, bus = 0;
  int sector = 2;
  double sigma_plus = 1.0, sigma_minus = 1.0, amplitude = 1.0;
  Index bins = 32;

  auto* validate = app.add_subcommand("validate", "check the symplectic constraints");
  validate->add_option("input", in)->required();
  validate->add_option("--out", out, "report path (default <input>.report.json)");
  validate->add_option("--tol", tol, "relative tolerance");

  auto* decompose = app.add_subcommand("decompose", "run a decomposition");
  decompose->add_option("--mode", mode, "bm|takagi|at|hosvd|gbm|gat")->required();
  decompose->add_option("input", in)->required();
  decompose->add_option("--out", out, "report path")->required();
  decompose->add_option("--tol", tol, "relative tolerance");

  auto* trunc = app.add_subcommand("truncate", "GBM spectral truncation");
  trunc->add_option("--d", d, "kept spectral dimension")->required();
  trunc->add_option("input", in)->required();
  trunc->add_option("--out", out, "truncated kernel path")->required();
  trunc->add_option("--report", report_path, "report path (default <out>.report.json)");
  trunc->add_option("--tol", tol, "relative tolerance");

  auto* analyze = app.add_subcommand("analyze", "physical analyses");
  analyze->require_subcommand(1);
  auto* loss = analyze->add_subcommand("loss", "min variance through a lossy bus");
  loss->add_option("--bus", bus, "bus spatial index")->required();
  loss->add_option("input", in)->required();
  loss->add_option("--out", out, "report path");
  loss->add_option("--tol", tol, "relative tolerance");
  auto* two_mode = analyze->add_subcommand("two-mode", "two-mode squeezing reduction");
  two_mode->add_option("input", in)->required();
  two_mode->add_option("--out", out, "report path");
  two_mode->add_option("--tol", tol, "relative tolerance");
  auto* ghz = analyze->add_subcommand("ghz", "GHZ trisection diagnostics");
  ghz->add_option("input", in)->required();
  ghz->add_option("--out", out, "report path");
  ghz->add_option("--tol", tol, "relative tolerance");

  auto* fock = app.add_subcommand("fock", "Fock-space operations");
  fock->require_subcommand(1);
  auto* postsel = fock->add_subcommand("postselect", "post-selected state in a photon sector");
  postsel->add_option("--proj", proj_path, "projector file")->required();
  postsel->add_option("--sector", sector, "photon-number sector (<= 4)")->required();
  postsel->add_option("input", in)->required();
  postsel->add_option("--out", out, "report path");
  postsel->add_option("--tol", tol, "relative tolerance");

  auto* fixture = app.add_subcommand("fixture", "test-fixture generators");
  fixture->require_subcommand(1);
  auto* dg = fixture->add_subcommand("double-gaussian", "double-Gaussian JSA Hamiltonian");
  dg->add_option("--sigma-plus", sigma_plus)->required();
  dg->add_option("--sigma-minus", sigma_minus)->required();
  dg->add_option("--bins", bins)->required();
  dg->add_option("--amplitude", amplitude);
  dg->add_option("--out", out)->required();
  dg->add_option("--embed", embed, "dichroic: two-spatial-mode sandwiched kernel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return run_validate(in, out, tol);
    if (*decompose) return run_decompose(mode, in, out, tol);
    if (*trunc) return run_truncate(in, out, report_path, d, tol);
    if (*loss) return run_analyze_loss(in, out, bus, tol);
    if (*two_mode) return run_analyze_two_mode(in, out, tol);
    if (*ghz) return run_analyze_ghz(in, out, tol);
    if (*postsel) return run_fock_postselect(in, proj_path, out, sector, tol);
    if (*dg)
      return run_fixture_double_gaussian(sigma_plus, sigma_minus, bins, amplitude, out, embed);
  } catch (const gbm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
