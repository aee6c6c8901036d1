#pragma once

#include "qpt/matrix.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qpt {

// Basis convention: |0> = |H>, |1> = |V>;
//   |D> = (|H>+|V>)/sqrt2, |A> = (|H>-|V>)/sqrt2,
//   |L> = (|H>+i|V>)/sqrt2, |R> = (|H>-i|V>)/sqrt2.
enum class Polarization { H, V, D, A, L, R };

// Local analysis bases; each measures both orthogonal outcomes simultaneously.
enum class LocalBasis { HV, DA, LR };

inline const char* to_string(Polarization p) {
  switch (p) {
    case Polarization::H: return "H";
    case Polarization::V: return "V";
    case Polarization::D: return "D";
    case Polarization::A: return "A";
    case Polarization::L: return "L";
    case Polarization::R: return "R";
  }
  throw std::logic_error("bad Polarization");
}

inline const char* to_string(LocalBasis b) {
  switch (b) {
    case LocalBasis::HV: return "HV";
    case LocalBasis::DA: return "DA";
    case LocalBasis::LR: return "LR";
  }
  throw std::logic_error("bad LocalBasis");
}

inline Polarization polarization_from_string(const std::string& s) {
  if (s == "H") return Polarization::H;
  if (s == "V") return Polarization::V;
  if (s == "D") return Polarization::D;
  if (s == "A") return Polarization::A;
  if (s == "L") return Polarization::L;
  if (s == "R") return Polarization::R;
  throw std::invalid_argument("unknown polarization label: " + s);
}

inline LocalBasis basis_from_string(const std::string& s) {
  if (s == "HV") return LocalBasis::HV;
  if (s == "DA") return LocalBasis::DA;
  if (s == "LR") return LocalBasis::LR;
  throw std::invalid_argument("unknown basis label: " + s);
}

inline ComplexVector ket(Polarization p) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  ComplexVector v(2);
  switch (p) {
    case Polarization::H: v << 1.0, 0.0; break;
    case Polarization::V: v << 0.0, 1.0; break;
    case Polarization::D: v << inv_sqrt2, inv_sqrt2; break;
    case Polarization::A: v << inv_sqrt2, -inv_sqrt2; break;
    case Polarization::L: v << inv_sqrt2, Complex(0.0, inv_sqrt2); break;
    case Polarization::R: v << inv_sqrt2, Complex(0.0, -inv_sqrt2); break;
  }
  return v;
}

inline constexpr std::array<LocalBasis, 3> kAnalysisBasisOrder = {LocalBasis::HV, LocalBasis::DA,
                                                                  LocalBasis::LR};

// The two orthogonal outcome states of an analysis basis, in order.
inline std::array<Polarization, 2> basis_outcomes(LocalBasis b) {
  switch (b) {
    case LocalBasis::HV: return {Polarization::H, Polarization::V};
    case LocalBasis::DA: return {Polarization::D, Polarization::A};
    case LocalBasis::LR: return {Polarization::L, Polarization::R};
  }
  throw std::logic_error("bad LocalBasis");
}

inline std::array<ComplexMatrix, 2> basis_projectors(LocalBasis b) {
  auto outs = basis_outcomes(b);
  return {projector(ket(outs[0])), projector(ket(outs[1]))};
}

// Pauli ordering (sigma0, sigma1, sigma2, sigma3) = (I, X, Y, Z) indexes every chi matrix.
inline const std::array<ComplexMatrix, 4>& pauli_basis() {
  static const std::array<ComplexMatrix, 4> basis = [] {
    std::array<ComplexMatrix, 4> b;
    for (auto& m : b) m.resize(2, 2);
    b[0] << 1, 0, 0, 1;
    b[1] << 0, 1, 1, 0;
    b[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    b[3] << 1, 0, 0, -1;
    return b;
  }();
  return basis;
}

// Two-qubit Bell states on (idler, signal) slots.
enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr std::array<BellState, 4> kBellOrder = {BellState::PhiPlus, BellState::PhiMinus,
                                                        BellState::PsiPlus, BellState::PsiMinus};

inline const char* to_string(BellState b) {
  switch (b) {
    case BellState::PhiPlus: return "phi_plus";
    case BellState::PhiMinus: return "phi_minus";
    case BellState::PsiPlus: return "psi_plus";
    case BellState::PsiMinus: return "psi_minus";
  }
  throw std::logic_error("bad BellState");
}

inline ComplexVector bell_ket(BellState b) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const ComplexVector h = ket(Polarization::H);
  const ComplexVector v = ket(Polarization::V);
  switch (b) {
    case BellState::PhiPlus: return inv_sqrt2 * (kron(h, h) + kron(v, v));
    case BellState::PhiMinus: return inv_sqrt2 * (kron(h, h) - kron(v, v));
    case BellState::PsiPlus: return inv_sqrt2 * (kron(h, v) + kron(v, h));
    case BellState::PsiMinus: return inv_sqrt2 * (kron(h, v) - kron(v, h));
  }
  throw std::logic_error("bad BellState");
}

// d x d complex Hermitian PSD matrix; sub-normalized trace represents loss.
struct DensityMatrix {
  int dim = 2;
  ComplexMatrix matrix;

  static constexpr double kHermTol = 1e-10;
  static constexpr double kEigTol = 1e-9;
  static constexpr double kTraceTol = 1e-10;

  DensityMatrix() : matrix(ComplexMatrix::Zero(2, 2)) {}
  DensityMatrix(int d, ComplexMatrix m) : dim(d), matrix(std::move(m)) {}

  double trace() const { return matrix.trace().real(); }

  // Validating factory for probe/input states (positive trace required).
  static DensityMatrix checked(ComplexMatrix m) {
    const int d = static_cast<int>(m.rows());
    DensityMatrix rho(d, std::move(m));
    rho.validate(true);
    return rho;
  }

  // Channel outputs may carry zero trace (e.g. a polarizer blocking everything).
  static DensityMatrix from_output(ComplexMatrix m) {
    const int d = static_cast<int>(m.rows());
    DensityMatrix rho(d, std::move(m));
    rho.validate(false);
    return rho;
  }

  void validate(bool require_positive_trace) const {
    require_square(matrix, "DensityMatrix");
    if (dim != matrix.rows()) throw std::invalid_argument("DensityMatrix: dim field mismatch");
    if (dim != 2 && dim != 4) throw std::invalid_argument("DensityMatrix: dim must be 2 or 4");
    double hdev = hermiticity_deviation(matrix);
    if (hdev > kHermTol)
      throw std::invalid_argument("DensityMatrix: not Hermitian, deviation " +
                                  std::to_string(hdev) + " > 1e-10");
    double mineig = min_eigenvalue(matrix);
    if (mineig < -kEigTol)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(mineig) +
                                  " < -1e-9");
    double tr = trace();
    if (tr > 1.0 + kTraceTol)
      throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " > 1");
    if (require_positive_trace && tr <= 0.0)
      throw std::invalid_argument("DensityMatrix: trace must be positive, got " +
                                  std::to_string(tr));
    if (!require_positive_trace && tr < -kTraceTol)
      throw std::invalid_argument("DensityMatrix: negative trace " + std::to_string(tr));
  }
};

inline DensityMatrix pure_state(const ComplexVector& v) {
  return DensityMatrix::checked(projector(v));
}

// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)); both inputs unit trace.
inline double state_fidelity(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  ComplexMatrix root = hermitian_sqrt(rho);
  ComplexMatrix inner = root * sigma * root;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(inner, Eigen::EigenvaluesOnly);
  double f = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::min(f, 1.0);
}

inline double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho - sigma, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qpt
