#pragma once

// Desk-scale Fock-space expansion: squeezed-vacuum photon-number sectors,
// passive transition amplitudes via permanents, post-selection onto labeled
// occupation patterns, and the biphoton truncation fidelity.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbm/hamiltonian.hpp"
#include "gbm/linalg.hpp"
#include "gbm/types.hpp"

namespace gbm {

inline constexpr int kMaxPhotons = 4;
inline constexpr Index kMaxFockModes = 12;

using Occupation = std::vector<int>;

/// All occupation tuples of `photons` photons over `modes` modes, in
/// lexicographic order with the first mode most significant (descending).
inline std::vector<Occupation> enumerate_occupations(Index modes, int photons) {
  std::vector<Occupation> out;
  Occupation cur(size_t(modes), 0);
  // depth-first: mode 0 takes photons..0, recurse
  struct Rec {
    Index modes;
    std::vector<Occupation>& out;
    Occupation& cur;
    void go(Index m, int left) {
      if (m == modes - 1) {
        cur[size_t(m)] = left;
        out.push_back(cur);
        return;
      }
      for (int k = left; k >= 0; --k) {
        cur[size_t(m)] = k;
        go(m + 1, left - k);
      }
    }
  } rec{modes, out, cur};
  if (modes > 0) rec.go(0, photons);
  return out;
}

/// Amplitudes of one photon-number sector over `modes` modes.
struct FockState {
  Index modes = 0;
  int photons = 0;
  std::vector<Occupation> occupations;
  ComplexVector amplitudes;

  double squared_norm() const { return amplitudes.squaredNorm(); }
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Single-mode squeezed-vacuum amplitude <2k| U |0> for U with
// U^dag a U = cosh(r) a + sinh(r) a^dag.
inline double squeezed_amplitude(double r, int n_photons) {
  if (n_photons % 2 != 0) return 0.0;
  const int k = n_photons / 2;
  const double t = std::tanh(r);
  return std::pow(1.0 / std::cosh(r), 0.5) * std::pow(0.5 * t, k) *
         std::sqrt(factorial(2 * k)) / factorial(k);
}

}  // namespace detail

/// Expands the product of single-mode squeezers acting on vacuum into
/// photon-number sectors 0..n_max. `r` holds the squeeze parameters per mode
/// (r = asinh of the Bloch-Messiah s_diag). Odd sectors are exactly empty.
inline std::vector<FockState> squeezed_vacuum_expand(const RealVector& r, int n_max) {
  if (n_max < 0 || n_max > kMaxPhotons)
    throw TooManyPhotons("squeezed_vacuum_expand: n_max must be in [0, 4]");
  if (r.size() > kMaxFockModes)
    throw TooLarge("squeezed_vacuum_expand: more than 12 modes");
  for (Index i = 0; i < r.size(); ++i)
    if (!std::isfinite(r(i))) throw NonFinite("squeezed_vacuum_expand: squeeze parameter");

  const Index m = r.size();
  std::vector<FockState> sectors;
  for (int n = 0; n <= n_max; ++n) {
    FockState st;
    st.modes = m;
    st.photons = n;
    st.occupations = enumerate_occupations(m, n);
    st.amplitudes = ComplexVector::Zero(Index(st.occupations.size()));
    for (Index t = 0; t < Index(st.occupations.size()); ++t) {
      double amp = 1.0;
      for (Index j = 0; j < m; ++j)
        amp *= detail::squeezed_amplitude(r(j), st.occupations[size_t(t)][size_t(j)]);
      st.amplitudes(t) = amp;
    }
    sectors.push_back(std::move(st));
  }
  return sectors;
}

/// Transition amplitude <n| U_N |m> of the N-photon irrep of the passive
/// unitary W (single photon in mode j maps to sum_i W_ij |1_i>):
/// perm(W[n; m]) / sqrt(prod n_i! prod m_j!).
inline Complex passive_transition(const ComplexMatrix& w, const Occupation& m_in,
                                  const Occupation& n_out) {
  if (Index(m_in.size()) != w.cols() || Index(n_out.size()) != w.rows())
    throw ShapeMismatch("passive_transition: occupation length vs unitary dims");
  int n_m = 0, n_n = 0;
  for (int v : m_in) n_m += v;
  for (int v : n_out) n_n += v;
  if (n_m != n_n) throw PhotonNumberMismatch("passive_transition: photon numbers differ");
  if (n_m > kMaxPhotons) throw TooManyPhotons("passive_transition: more than 4 photons");
  if (n_m == 0) return Complex(1.0, 0.0);

  ComplexMatrix sub(n_n, n_m);
  Index row = 0;
  for (Index i = 0; i < w.rows(); ++i)
    for (int rep = 0; rep < n_out[size_t(i)]; ++rep) {
      Index col = 0;
      for (Index j = 0; j < w.cols(); ++j)
        for (int rep2 = 0; rep2 < m_in[size_t(j)]; ++rep2) sub(row, col++) = w(i, j);
      ++row;
    }
  double norm = 1.0;
  for (int v : m_in) norm *= detail::factorial(v);
  for (int v : n_out) norm *= detail::factorial(v);
  return permanent(sub) / std::sqrt(norm);
}

/// Full N-photon sector matrix of the irrep (rows/cols in
/// enumerate_occupations order); unitary for unitary W.
inline ComplexMatrix sector_unitary(const ComplexMatrix& w, int photons) {
  auto tuples = enumerate_occupations(w.rows(), photons);
  const Index n = Index(tuples.size());
  ComplexMatrix u(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      u(i, j) = passive_transition(w, tuples[size_t(j)], tuples[size_t(i)]);
  return u;
}

/// Accepted occupation patterns with their abstract labels.
struct PostselectionProjector {
  std::vector<std::pair<Occupation, std::string>> accepted;
};

/// Post-selected, labeled output state and its success probability.
struct PostselectionResult {
  std::map<std::string, Complex> amplitudes;
  double success_probability = 0.0;
};

/// Applies the N-photon irrep of W to `state`, projects onto the accepted
/// tuples, and groups amplitudes by label. Success probability is the squared
/// norm of the projected state before any normalization.
inline PostselectionResult postselect(const FockState& state, const ComplexMatrix& w,
                                      const PostselectionProjector& proj) {
  if (state.occupations.empty() || state.amplitudes.size() == 0)
    throw EmptySector("postselect: empty input sector");
  if (proj.accepted.empty()) throw EmptySector("postselect: no accepted tuples");
  if (w.rows() != state.modes) throw ShapeMismatch("postselect: unitary dim vs mode count");

  PostselectionResult out;
  for (const auto& [tuple, label] : proj.accepted) {
    if (Index(tuple.size()) != state.modes)
      throw ShapeMismatch("postselect: accepted tuple length");
    Complex beta(0.0, 0.0);
    for (Index t = 0; t < Index(state.occupations.size()); ++t) {
      if (state.amplitudes(t) == Complex(0.0, 0.0)) continue;
      beta += state.amplitudes(t) * passive_transition(w, state.occupations[size_t(t)], tuple);
    }
    out.success_probability += std::norm(beta);
    out.amplitudes[label] += beta;
  }
  return out;
}

/// First-order biphoton state sum_nm H_nm a^dag_n a^dag_m |vac> as an N = 2
/// Fock sector (unnormalized).
inline FockState biphoton_state(const ComplexMatrix& h) {
  require_square(h, "biphoton_state H");
  FockState st;
  st.modes = h.rows();
  st.photons = 2;
  st.occupations = enumerate_occupations(st.modes, 2);
  st.amplitudes = ComplexVector::Zero(Index(st.occupations.size()));
  for (Index t = 0; t < Index(st.occupations.size()); ++t) {
    const Occupation& occ = st.occupations[size_t(t)];
    Index first = -1, second = -1;
    for (Index j = 0; j < st.modes; ++j) {
      if (occ[size_t(j)] == 2) first = second = j;
      if (occ[size_t(j)] == 1) (first < 0 ? first : second) = j;
    }
    if (first == second)
      st.amplitudes(t) = std::sqrt(2.0) * h(first, first);
    else
      st.amplitudes(t) = h(first, second) + h(second, first);
  }
  return st;
}

/// Overlap of the biphoton states of H and its truncation H_trunc, computed
/// two ways -- the closed form 2 sum |H_trunc|^2, valid for projector
/// truncations (zeroed rows/columns or congruence compressions), and the
/// direct Fock-space inner product -- and cross-checked to 1e-10.
inline double biphoton_fidelity(const SymmetricHamiltonian& h,
                                const SymmetricHamiltonian& h_trunc) {
  if (h.H.rows() != h_trunc.H.rows() || h.H.cols() != h_trunc.H.cols())
    throw ShapeMismatch("biphoton_fidelity: shapes differ");
  const double formula = 2.0 * h_trunc.H.squaredNorm();
  FockState full = biphoton_state(h.H);
  FockState trunc = biphoton_state(h_trunc.H);
  const Complex direct = trunc.amplitudes.dot(full.amplitudes);  // <trunc|full>
  if (std::abs(direct - Complex(formula, 0.0)) > 1e-10 * std::max(1.0, formula))
    throw Error("biphoton_fidelity: formula and direct overlap disagree; truncation is not a "
                "projector compression of H");
  return formula;
}

}  // namespace gbm
