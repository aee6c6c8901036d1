#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qpt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline ComplexMatrix dagger(const ComplexMatrix& m) { return m.adjoint(); }

// Kronecker product, row-major qubit ordering: (a ⊗ b)[i*rb+k, j*cb+l] = a(i,j) b(k,l).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline ComplexMatrix projector(const ComplexVector& v) { return v * v.adjoint(); }

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// max |m - m†| over elements; 0 for exactly Hermitian input
inline double hermiticity_deviation(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const ComplexMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Square root of a Hermitian PSD matrix; small negative eigenvalues are clamped to zero.
inline ComplexMatrix hermitian_sqrt(const ComplexMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

inline void require_square(const ComplexMatrix& m, const std::string& what) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(what + ": matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected square");
}

inline void require_dim(const ComplexMatrix& m, Eigen::Index dim, const std::string& what) {
  if (m.rows() != dim || m.cols() != dim)
    throw std::invalid_argument(what + ": matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " + std::to_string(dim) +
                                "x" + std::to_string(dim));
}

}  // namespace qpt
