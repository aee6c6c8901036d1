#pragma once

#include "qpt/states.hpp"

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace qpt {

// 4x4 coefficient matrix of the Pauli double sum eps(rho) = sum_mn chi_mn sigma_m rho sigma_n.
// Values are not validated at construction; check_physicality / require_physical do that,
// so unphysical linear-inversion results can still be carried around and inspected.
struct ChiMatrix {
  ComplexMatrix matrix;

  ChiMatrix() : matrix(ComplexMatrix::Zero(4, 4)) {}
  explicit ChiMatrix(ComplexMatrix m) : matrix(std::move(m)) {
    require_dim(matrix, 4, "ChiMatrix");
  }

  static ChiMatrix identity() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0;
    return ChiMatrix(m);
  }
};

// Operator-sum carrier: eps(rho) = sum_k K_k rho K_k^dagger.
struct KrausSet {
  std::vector<ComplexMatrix> operators;

  KrausSet() = default;
  explicit KrausSet(std::vector<ComplexMatrix> ops) : operators(std::move(ops)) {
    if (operators.empty()) throw std::invalid_argument("KrausSet: no operators");
    for (const auto& k : operators) require_dim(k, operators.front().rows(), "KrausSet operator");
  }

  int dim() const { return static_cast<int>(operators.front().rows()); }

  ComplexMatrix completeness() const {  // sum K^dagger K; = I for trace-preserving
    ComplexMatrix s = ComplexMatrix::Zero(dim(), dim());
    for (const auto& k : operators) s += k.adjoint() * k;
    return s;
  }

  void validate() const {
    double floor = min_eigenvalue(ComplexMatrix::Identity(dim(), dim()) - completeness());
    if (floor < -1e-9)
      throw std::invalid_argument("KrausSet: sum K^dag K exceeds identity, floor " +
                                  std::to_string(floor));
  }
};

// (I ⊗ eps)(rho_Phi) with rho_Phi the projector on (|00>+|11>)/sqrt2.
struct ChoiState {
  DensityMatrix state;

  ChoiState() : state(4, ComplexMatrix::Zero(4, 4)) {}
  explicit ChoiState(DensityMatrix s) : state(std::move(s)) {
    if (state.dim != 4) throw std::invalid_argument("ChoiState: dim must be 4");
  }
};

inline DensityMatrix maximally_entangled_state() {
  return pure_state(bell_ket(BellState::PhiPlus));
}

namespace detail {

// Columns are (I ⊗ sigma_m)|Phi+>, an orthonormal frame in which the Choi matrix
// written out is exactly chi. Makes chi <-> Choi a unitary congruence.
inline const ComplexMatrix& choi_frame() {
  static const ComplexMatrix frame = [] {
    ComplexMatrix f(4, 4);
    const ComplexVector phi = bell_ket(BellState::PhiPlus);
    const auto& sigma = pauli_basis();
    for (int m = 0; m < 4; ++m)
      f.col(m) = kron(ComplexMatrix::Identity(2, 2), sigma[m]) * phi;
    return f;
  }();
  return frame;
}

// Products sigma_n * sigma_m indexed [n][m]; the trace-preservation operator is
// S(chi) = sum_mn chi_mn sigma_n sigma_m.
inline const std::array<std::array<ComplexMatrix, 4>, 4>& pauli_products() {
  static const std::array<std::array<ComplexMatrix, 4>, 4> products = [] {
    std::array<std::array<ComplexMatrix, 4>, 4> p;
    const auto& sigma = pauli_basis();
    for (int n = 0; n < 4; ++n)
      for (int m = 0; m < 4; ++m) p[n][m] = sigma[n] * sigma[m];
    return p;
  }();
  return products;
}

}  // namespace detail

// S(chi) = sum_mn chi_mn sigma_n sigma_m; equals I iff the channel preserves trace,
// and satisfies S <= I for trace non-increasing channels.
inline ComplexMatrix process_trace_operator(const ChiMatrix& chi) {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  const auto& prod = detail::pauli_products();
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) s += chi.matrix(m, n) * prod[n][m];
  return s;
}

struct PhysicalityReport {
  double hermiticity_deviation = 0.0;  // max |chi - chi^dag|
  double min_eigenvalue = 0.0;         // smallest eigenvalue of chi
  double complement_floor = 0.0;       // smallest eigenvalue of I - S(chi)
  bool hermitian = false;
  bool positive = false;
  bool trace_non_increasing = false;
  bool trace_preserving = false;  // S(chi) = I within 1e-9
  bool pass = false;
};

inline PhysicalityReport check_physicality(const ChiMatrix& chi) {
  PhysicalityReport r;
  r.hermiticity_deviation = hermiticity_deviation(chi.matrix);
  // Symmetrize before the eigensolve so a tiny non-Hermitian part cannot skew it.
  ComplexMatrix sym = 0.5 * (chi.matrix + chi.matrix.adjoint());
  r.min_eigenvalue = min_eigenvalue(sym);
  ComplexMatrix s = process_trace_operator(ChiMatrix(sym));
  r.complement_floor = min_eigenvalue(ComplexMatrix::Identity(2, 2) - s);
  r.hermitian = r.hermiticity_deviation <= 1e-10;
  r.positive = r.min_eigenvalue >= -1e-9;
  r.trace_non_increasing = r.complement_floor >= -1e-9;
  r.trace_preserving = max_abs_diff(s, ComplexMatrix::Identity(2, 2)) <= 1e-9;
  r.pass = r.hermitian && r.positive && r.trace_non_increasing;
  return r;
}

inline void require_physical(const ChiMatrix& chi, const std::string& what) {
  PhysicalityReport r = check_physicality(chi);
  if (r.pass) return;
  std::ostringstream msg;
  msg << what << ": chi matrix not physical:";
  if (!r.hermitian)
    msg << " hermiticity deviation " << r.hermiticity_deviation << " exceeds 1e-10;";
  if (!r.positive) msg << " minimum eigenvalue " << r.min_eigenvalue << " below -1e-9;";
  if (!r.trace_non_increasing)
    msg << " I - sum chi_mn sigma_n sigma_m has eigenvalue " << r.complement_floor
        << " below -1e-9 (trace increasing);";
  throw std::invalid_argument(msg.str());
}

// eps(rho) = sum_mn chi_mn sigma_m rho sigma_n  (single qubit)
inline DensityMatrix apply_chi(const ChiMatrix& chi, const DensityMatrix& rho) {
  if (rho.dim != 2) throw std::invalid_argument("apply_chi: expected a single-qubit state");
  require_physical(chi, "apply_chi");
  const auto& sigma = pauli_basis();
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      out += chi.matrix(m, n) * (sigma[m] * rho.matrix * sigma[n]);
  return DensityMatrix::from_output(0.5 * (out + out.adjoint()));
}

// (id ⊗ eps) acting on the signal (second) slot of a two-qubit state.
inline DensityMatrix apply_chi_signal(const ChiMatrix& chi, const DensityMatrix& rho) {
  if (rho.dim != 4) throw std::invalid_argument("apply_chi_signal: expected a two-qubit state");
  require_physical(chi, "apply_chi_signal");
  const auto& sigma = pauli_basis();
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (int m = 0; m < 4; ++m) {
    ComplexMatrix left = kron(id2, sigma[m]);
    for (int n = 0; n < 4; ++n)
      out += chi.matrix(m, n) * (left * rho.matrix * kron(id2, sigma[n]));
  }
  return DensityMatrix::from_output(0.5 * (out + out.adjoint()));
}

inline DensityMatrix apply_kraus(const KrausSet& k, const DensityMatrix& rho) {
  if (k.dim() != rho.dim)
    throw std::invalid_argument("apply_kraus: operator dim " + std::to_string(k.dim()) +
                                " does not match state dim " + std::to_string(rho.dim));
  ComplexMatrix out = ComplexMatrix::Zero(rho.dim, rho.dim);
  for (const auto& op : k.operators) out += op * rho.matrix * op.adjoint();
  return DensityMatrix::from_output(0.5 * (out + out.adjoint()));
}

inline ChoiState chi_to_choi(const ChiMatrix& chi) {
  const ComplexMatrix& v = detail::choi_frame();
  ComplexMatrix c = v * chi.matrix * v.adjoint();
  return ChoiState(DensityMatrix::from_output(0.5 * (c + c.adjoint())));
}

inline ChiMatrix choi_to_chi(const ChoiState& choi) {
  const ComplexMatrix& v = detail::choi_frame();
  return ChiMatrix(v.adjoint() * choi.state.matrix * v);
}

// Eigendecomposition of chi; eigenvalues below 1e-12 are dropped.
inline KrausSet chi_to_kraus(const ChiMatrix& chi) {
  double mineig = min_eigenvalue(chi.matrix);
  if (mineig < -1e-9)
    throw std::invalid_argument("chi_to_kraus: non-physical input, eigenvalue " +
                                std::to_string(mineig) + " below -1e-9");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(chi.matrix);
  const auto& sigma = pauli_basis();
  std::vector<ComplexMatrix> ops;
  // Descending eigenvalue order.
  for (int k = 3; k >= 0; --k) {
    double lambda = es.eigenvalues()(k);
    if (lambda < 1e-12) continue;
    ComplexMatrix op = ComplexMatrix::Zero(2, 2);
    for (int m = 0; m < 4; ++m) op += es.eigenvectors()(m, k) * sigma[m];
    ops.push_back(std::sqrt(lambda) * op);
  }
  if (ops.empty()) ops.push_back(ComplexMatrix::Zero(2, 2));
  return KrausSet(std::move(ops));
}

inline ChiMatrix kraus_to_chi(const KrausSet& k) {
  if (k.dim() != 2) throw std::invalid_argument("kraus_to_chi: expected single-qubit operators");
  const auto& sigma = pauli_basis();
  ComplexMatrix chi = ComplexMatrix::Zero(4, 4);
  for (const auto& op : k.operators) {
    ComplexVector c(4);
    for (int m = 0; m < 4; ++m) c(m) = (sigma[m] * op).trace() / 2.0;  // K = sum_m c_m sigma_m
    chi += c * c.adjoint();
  }
  return ChiMatrix(chi);
}

namespace detail {

// Fidelity needs Hermitian PSD Choi states; a small trace-preservation penalty
// residual does not affect well-definedness, so the gate here is looser than the
// strict channel-application check.
inline void require_psd_chi(const ChiMatrix& chi, const std::string& what) {
  double hdev = hermiticity_deviation(chi.matrix);
  if (hdev > 1e-8)
    throw std::invalid_argument(what + ": chi not Hermitian, deviation " + std::to_string(hdev));
  double mineig = min_eigenvalue(0.5 * (chi.matrix + chi.matrix.adjoint()));
  if (mineig < -1e-6)
    throw std::invalid_argument(what + ": chi has negative eigenvalue " + std::to_string(mineig));
}

}  // namespace detail

// Fidelity between the two channels' Choi states, each normalized to unit trace first,
// which keeps the metric well-defined for trace-decreasing processes.
inline double jamiolkowski_fidelity(const ChiMatrix& a, const ChiMatrix& b) {
  detail::require_psd_chi(a, "jamiolkowski_fidelity");
  detail::require_psd_chi(b, "jamiolkowski_fidelity");
  const ComplexMatrix& v = detail::choi_frame();
  ComplexMatrix ca = v * (0.5 * (a.matrix + a.matrix.adjoint())) * v.adjoint();
  ComplexMatrix cb = v * (0.5 * (b.matrix + b.matrix.adjoint())) * v.adjoint();
  double ta = ca.trace().real();
  double tb = cb.trace().real();
  if (ta <= 1e-12 || tb <= 1e-12)
    throw std::domain_error(
        "jamiolkowski_fidelity: zero-trace Choi state (fully blocking process), fidelity "
        "undefined");
  return state_fidelity(ca / ta, cb / tb);
}

}  // namespace qpt
