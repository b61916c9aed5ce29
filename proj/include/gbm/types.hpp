#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gbm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : Error {
  using Error::Error;
};
struct NotSymmetric : Error {
  using Error::Error;
};
struct NonFinite : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};
struct TooLarge : Error {
  using Error::Error;
};
struct NotSymplectic : Error {
  using Error::Error;
};
struct DegenerateSupport : Error {
  using Error::Error;
};
struct NotUnitary : Error {
  using Error::Error;
};
struct BadDimension : Error {
  using Error::Error;
};
struct OddSpectrum : Error {
  using Error::Error;
};
struct BadTrisection : Error {
  using Error::Error;
};
struct DegenerateBasis : Error {
  using Error::Error;
};
struct TooManyPhotons : Error {
  using Error::Error;
};
struct PhotonNumberMismatch : Error {
  using Error::Error;
};
struct EmptySector : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct VersionUnsupported : Error {
  using Error::Error;
};
struct BadParameter : Error {
  using Error::Error;
};

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline void require_finite(const ComplexMatrix& m, const char* name) {
  if (!m.allFinite()) throw NonFinite(std::string(name) + " contains NaN/Inf entries");
}

inline void require_square(const ComplexMatrix& m, const char* name) {
  if (m.rows() != m.cols())
    throw ShapeMismatch(std::string(name) + " must be square, got " + std::to_string(m.rows()) +
                        "x" + std::to_string(m.cols()));
}

inline double unitarity_residual(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols())).norm();
}

inline void require_unitary(const ComplexMatrix& u, double tol, const char* name) {
  if (u.rows() != u.cols()) throw NotUnitary(std::string(name) + " is not square");
  if (unitarity_residual(u) > tol * std::max<double>(1.0, std::sqrt(double(u.cols()))))
    throw NotUnitary(std::string(name) + " is not unitary within tolerance");
}

}  // namespace gbm
