#pragma once

// Structured text file format for kernels and Hamiltonians, decomposition
// report emission, and the double-Gaussian JSA test fixture. Complex entries
// are encoded as [re, im] pairs; payload round-trips are value-exact.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbm/hamiltonian.hpp"
#include "gbm/symplectic.hpp"
#include "gbm/tensor.hpp"
#include "gbm/types.hpp"

namespace gbm {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kFlatteningTag = "omega-major";

/// On-disk object: a matrix kernel, a symmetric Hamiltonian, or their 4-way
/// tensor counterparts, plus grid metadata. Grid labels are carried but never
/// interpreted by the math modules.
struct KernelFile {
  std::string kind;  // "kernel" | "hamiltonian" | "tensor-kernel" | "tensor-hamiltonian"
  Index n_spectral = 0;
  Index n_spatial = 1;
  std::vector<double> grid;
  Index jsa_bisection = 0;  // 0 = not a JSA block Hamiltonian

  SymplecticKernel kernel;            // kind == "kernel"
  SymmetricHamiltonian hamiltonian;   // kind == "hamiltonian"
  TensorKernel tensor_kernel;         // kind == "tensor-kernel"
  TensorHamiltonian tensor_ham;       // kind == "tensor-hamiltonian"
};

namespace io_detail {

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json entries = Json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      entries.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

inline ComplexMatrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
    throw ParseError("field '" + field + "': expected {rows, cols, entries}");
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const Json& e = j.at("entries");
  if (!e.is_array() || Index(e.size()) != rows * cols)
    throw ParseError("field '" + field + "': entry count does not match rows*cols");
  ComplexMatrix m(rows, cols);
  Index i = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c, ++i) {
      const Json& z = e[size_t(i)];
      if (!z.is_array() || z.size() != 2)
        throw ParseError("field '" + field + "': complex entries must be [re, im]");
      m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
    }
  return m;
}

inline Json tensor_to_json(const Tensor4& t) {
  Json entries = Json::array();
  for (const Complex& z : t.data()) entries.push_back(Json::array({z.real(), z.imag()}));
  const auto& d = t.dims();
  return Json{{"dims", Json::array({d[0], d[1], d[2], d[3]})}, {"entries", std::move(entries)}};
}

inline Tensor4 tensor_from_json(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("entries"))
    throw ParseError("field '" + field + "': expected {dims, entries}");
  const Json& dj = j.at("dims");
  if (!dj.is_array() || dj.size() != 4)
    throw ParseError("field '" + field + "': dims must have 4 entries");
  Tensor4 t(dj[0].get<Index>(), dj[1].get<Index>(), dj[2].get<Index>(), dj[3].get<Index>());
  const Json& e = j.at("entries");
  if (!e.is_array() || Index(e.size()) != t.size())
    throw ParseError("field '" + field + "': entry count does not match dims");
  for (Index i = 0; i < t.size(); ++i) {
    const Json& z = e[size_t(i)];
    if (!z.is_array() || z.size() != 2)
      throw ParseError("field '" + field + "': complex entries must be [re, im]");
    t.data()[size_t(i)] = Complex(z[0].get<double>(), z[1].get<double>());
  }
  return t;
}

inline void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp + " for writing");
    f << contents;
    if (!f.good()) throw Error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("rename failed for " + path);
}

}  // namespace io_detail

/// FNV-1a 64-bit digest, hex-encoded; used to tie reports to their inputs.
inline std::string digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Json kernel_file_to_json(const KernelFile& kf) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = kf.kind;
  j["shape"] = Json{{"n_spectral", kf.n_spectral}, {"n_spatial", kf.n_spatial}};
  j["flattening"] = kFlatteningTag;
  if (!kf.grid.empty()) j["grid"] = kf.grid;
  if (kf.jsa_bisection > 0) j["jsa_bisection"] = kf.jsa_bisection;
  if (kf.kind == "kernel") {
    j["payload"] = Json{{"C", io_detail::matrix_to_json(kf.kernel.C)},
                        {"S", io_detail::matrix_to_json(kf.kernel.S)}};
  } else if (kf.kind == "hamiltonian") {
    j["payload"] = Json{{"H", io_detail::matrix_to_json(kf.hamiltonian.H)}};
  } else if (kf.kind == "tensor-kernel") {
    j["payload"] = Json{{"C", io_detail::tensor_to_json(kf.tensor_kernel.C)},
                        {"S", io_detail::tensor_to_json(kf.tensor_kernel.S)}};
  } else if (kf.kind == "tensor-hamiltonian") {
    j["payload"] = Json{{"H", io_detail::tensor_to_json(kf.tensor_ham.H)}};
  } else {
    throw ParseError("unknown kind '" + kf.kind + "'");
  }
  return j;
}

inline KernelFile kernel_file_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("top level: expected an object");
  if (!j.contains("format_version")) throw ParseError("field 'format_version' missing");
  const int v = j.at("format_version").get<int>();
  if (v != kFormatVersion)
    throw VersionUnsupported("format_version " + std::to_string(v) + " unsupported");
  if (!j.contains("kind")) throw ParseError("field 'kind' missing");
  if (!j.contains("shape")) throw ParseError("field 'shape' missing");
  if (j.contains("flattening") && j.at("flattening").get<std::string>() != kFlatteningTag)
    throw ParseError("field 'flattening': only omega-major is supported");

  KernelFile kf;
  kf.kind = j.at("kind").get<std::string>();
  kf.n_spectral = j.at("shape").value("n_spectral", Index(0));
  kf.n_spatial = j.at("shape").value("n_spatial", Index(1));
  if (j.contains("grid")) kf.grid = j.at("grid").get<std::vector<double>>();
  kf.jsa_bisection = j.value("jsa_bisection", Index(0));
  if (!j.contains("payload")) throw ParseError("field 'payload' missing");
  const Json& p = j.at("payload");

  auto check_dim = [&](Index got, Index want, const char* what) {
    if (got != want)
      throw ParseError(std::string("field 'shape': ") + what + " dim " + std::to_string(got) +
                       " does not match n_spectral*n_spatial = " + std::to_string(want));
  };

  if (kf.kind == "kernel") {
    kf.kernel.C = io_detail::matrix_from_json(p.at("C"), "payload.C");
    kf.kernel.S = io_detail::matrix_from_json(p.at("S"), "payload.S");
    check_dim(kf.kernel.C.rows(), kf.n_spectral * kf.n_spatial, "payload.C");
    check_dim(kf.kernel.S.rows(), kf.n_spectral * kf.n_spatial, "payload.S");
  } else if (kf.kind == "hamiltonian") {
    kf.hamiltonian.H = io_detail::matrix_from_json(p.at("H"), "payload.H");
    kf.hamiltonian.grid = kf.grid;
    check_dim(kf.hamiltonian.H.rows(), kf.n_spectral * kf.n_spatial, "payload.H");
  } else if (kf.kind == "tensor-kernel") {
    kf.tensor_kernel.C = io_detail::tensor_from_json(p.at("C"), "payload.C");
    kf.tensor_kernel.S = io_detail::tensor_from_json(p.at("S"), "payload.S");
    kf.tensor_kernel.n_spectral = kf.n_spectral;
    kf.tensor_kernel.n_spatial = kf.n_spatial;
    if (kf.tensor_kernel.C.dim(0) != kf.n_spectral || kf.tensor_kernel.C.dim(1) != kf.n_spatial)
      throw ParseError("field 'payload.C': tensor dims do not match shape");
    if (kf.tensor_kernel.S.dim(0) != kf.n_spectral || kf.tensor_kernel.S.dim(1) != kf.n_spatial)
      throw ParseError("field 'payload.S': tensor dims do not match shape");
  } else if (kf.kind == "tensor-hamiltonian") {
    kf.tensor_ham.H = io_detail::tensor_from_json(p.at("H"), "payload.H");
    kf.tensor_ham.n_spectral = kf.n_spectral;
    kf.tensor_ham.n_spatial = kf.n_spatial;
    if (kf.tensor_ham.H.dim(0) != kf.n_spectral || kf.tensor_ham.H.dim(1) != kf.n_spatial)
      throw ParseError("field 'payload.H': tensor dims do not match shape");
  } else {
    throw ParseError("field 'kind': unknown kind '" + kf.kind + "'");
  }
  return kf;
}

/// Writes a kernel file atomically (temp file + rename).
inline void write_kernel(const std::string& path, const KernelFile& kf) {
  io_detail::atomic_write(path, kernel_file_to_json(kf).dump(1));
}

inline KernelFile read_kernel(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file_bytes(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return kernel_file_from_json(j);
  } catch (ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Writes a report (already assembled as JSON) atomically.
inline void write_report(const std::string& path, const Json& report) {
  io_detail::atomic_write(path, report.dump(1));
}

/// Analytic Schmidt ratio of the double-Gaussian JSA: successive singular
/// values of F decay geometrically with ratio (s_plus - s_minus)/(s_plus +
/// s_minus) (Mehler kernel); the probability weights decay with its square.
inline double double_gaussian_schmidt_ratio(double sigma_plus, double sigma_minus) {
  return std::abs(sigma_plus - sigma_minus) / (sigma_plus + sigma_minus);
}

/// Double-Gaussian JSA fixture on a symmetric grid of n_bins points spanning
/// [-4 max(widths), 4 max(widths)]:
/// F(ws, wi) = amplitude * exp(-(ws+wi)^2 / (2 sigma_plus^2))
///                       * exp(-(ws-wi)^2 / (2 sigma_minus^2)).
inline JSABlockHamiltonian fixture_double_gaussian(double sigma_plus, double sigma_minus,
                                                   Index n_bins, double amplitude) {
  if (!(sigma_plus > 0.0) || !(sigma_minus > 0.0))
    throw BadParameter("fixture_double_gaussian: widths must be positive");
  if (n_bins < 8) throw BadParameter("fixture_double_gaussian: n_bins must be >= 8");
  if (!std::isfinite(amplitude)) throw BadParameter("fixture_double_gaussian: amplitude");

  const double extent = 4.0 * std::max(sigma_plus, sigma_minus);
  JSABlockHamiltonian j;
  j.grid.resize(size_t(n_bins));
  for (Index i = 0; i < n_bins; ++i)
    j.grid[size_t(i)] = -extent + 2.0 * extent * double(i) / double(n_bins - 1);
  j.F.resize(n_bins, n_bins);
  for (Index a = 0; a < n_bins; ++a)
    for (Index b = 0; b < n_bins; ++b) {
      const double ws = j.grid[size_t(a)], wi = j.grid[size_t(b)];
      const double sum = ws + wi, diff = ws - wi;
      j.F(a, b) = amplitude * std::exp(-sum * sum / (2.0 * sigma_plus * sigma_plus)) *
                  std::exp(-diff * diff / (2.0 * sigma_minus * sigma_minus));
    }
  return j;
}

}  // namespace gbm
