#pragma once

#include "qpt/dcqd.hpp"
#include "qpt/estimation.hpp"
#include "qpt/labsim.hpp"
#include "qpt/sqpt.hpp"

#include <array>
#include <vector>

namespace qpt {

// ---------------------------------------------------------------------------
// Coefficient matrices: every scheme's outcome probability is linear in chi,
// p = <A, chi>. These builders feed both linear inversion and the MLE.
// ---------------------------------------------------------------------------

// A_mn = Tr[Pi_outcome sigma_m rho_in sigma_n] for one SQPT configuration.
inline std::array<ComplexMatrix, 2> sqpt_coefficients(Polarization input, LocalBasis basis) {
  const auto& sigma = pauli_basis();
  ComplexMatrix rho = projector(ket(input));
  auto projs = basis_projectors(basis);
  std::array<ComplexMatrix, 2> out;
  for (int o = 0; o < 2; ++o) {
    ComplexMatrix a(4, 4);
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) a(m, n) = (projs[o] * sigma[m] * rho * sigma[n]).trace();
    out[o] = 0.5 * (a + a.adjoint());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Likelihood models from count records
// ---------------------------------------------------------------------------

inline LikelihoodModel sqpt_likelihood_model(const std::vector<SqptRecord>& records) {
  if (records.empty()) throw std::invalid_argument("sqpt_likelihood_model: no records");
  LikelihoodModel model;
  model.dim = 4;
  for (const auto& rec : records) {
    auto coeffs = sqpt_coefficients(rec.input, rec.basis);
    for (int o = 0; o < 2; ++o)
      model.terms.push_back({coeffs[o], static_cast<double>(rec.counts[o]),
                             static_cast<double>(rec.budget)});
  }
  return model;
}

inline LikelihoodModel dcqd_likelihood_model(
    const std::vector<DcqdRecord>& records,
    const CalibrationData& cal = CalibrationData::ideal()) {
  if (records.empty()) throw std::invalid_argument("dcqd_likelihood_model: no records");
  std::vector<ComplexMatrix> coeffs = dcqd_coefficients(cal);
  LikelihoodModel model;
  model.dim = 4;
  for (const auto& rec : records) {
    int k = -1;
    for (int i = 0; i < 4; ++i)
      if (kDcqdInputOrder[i] == rec.input) k = i;
    for (int b = 0; b < 4; ++b)
      model.terms.push_back({coeffs[k * 4 + b], static_cast<double>(rec.counts[b]),
                             static_cast<double>(rec.budget)});
  }
  return model;
}

// ---------------------------------------------------------------------------
// Linear inversion baselines (least squares; results may be unphysical)
// ---------------------------------------------------------------------------

inline ChiMatrix sqpt_linear_inversion(const std::vector<std::pair<double, double>>& table,
                                       const std::vector<SqptConfig>& plan) {
  if (table.size() != plan.size())
    throw std::invalid_argument("sqpt_linear_inversion: table/plan size mismatch");
  std::vector<ComplexMatrix> coeffs;
  std::vector<double> values;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    auto a = sqpt_coefficients(plan[i].input, plan[i].basis);
    coeffs.push_back(a[0]);
    coeffs.push_back(a[1]);
    values.push_back(table[i].first);
    values.push_back(table[i].second);
  }
  return ChiMatrix(linear_inversion(coeffs, values, 4));
}

// Probability table indexed [input in kDcqdInputOrder][Bell outcome in kBellOrder].
inline ChiMatrix dcqd_linear_inversion(const std::array<std::array<double, 4>, 4>& table,
                                       const CalibrationData& cal = CalibrationData::ideal()) {
  std::vector<ComplexMatrix> coeffs = dcqd_coefficients(cal);
  std::vector<double> values;
  values.reserve(16);
  for (int k = 0; k < 4; ++k)
    for (int b = 0; b < 4; ++b) values.push_back(table[k][b]);
  return ChiMatrix(linear_inversion(coeffs, values, 4));
}

// ---------------------------------------------------------------------------
// Single-setting relaxation extraction from a recorded BELL configuration.
// Empirical frequencies are normalized by the total detected flux, which is the
// right normalization for the trace-preserving relaxation family.
// ---------------------------------------------------------------------------

inline RelaxationExtraction extract_relaxation_from_record(const DcqdRecord& record) {
  if (record.input != DcqdInputLabel::Bell)
    throw std::invalid_argument("relaxation extraction needs the BELL configuration, got " +
                                std::string(to_string(record.input)));
  double total = 0.0;
  for (long long c : record.counts) total += static_cast<double>(c);
  if (total <= 0.0) throw std::domain_error("relaxation extraction undefined: no counts");
  std::array<double, 4> probs{};
  for (int b = 0; b < 4; ++b) probs[b] = static_cast<double>(record.counts[b]) / total;
  return extract_relaxation_ratio(probs);
}

}  // namespace qpt
