#pragma once

#include "qpt/estimation.hpp"
#include "qpt/process.hpp"

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpt {

// ---------------------------------------------------------------------------
// Probe states. Two-qubit slots are ordered (idler, signal); the process acts
// on the signal qubit, i.e. the second tensor slot, everywhere.
// ---------------------------------------------------------------------------

enum class DcqdInputLabel { Bell, HV, DA, LR };

inline constexpr std::array<DcqdInputLabel, 4> kDcqdInputOrder = {
    DcqdInputLabel::Bell, DcqdInputLabel::HV, DcqdInputLabel::DA, DcqdInputLabel::LR};

inline const char* to_string(DcqdInputLabel l) {
  switch (l) {
    case DcqdInputLabel::Bell: return "BELL";
    case DcqdInputLabel::HV: return "HV";
    case DcqdInputLabel::DA: return "DA";
    case DcqdInputLabel::LR: return "LR";
  }
  throw std::logic_error("bad DcqdInputLabel");
}

inline DcqdInputLabel dcqd_input_from_string(const std::string& s) {
  if (s == "BELL") return DcqdInputLabel::Bell;
  if (s == "HV") return DcqdInputLabel::HV;
  if (s == "DA") return DcqdInputLabel::DA;
  if (s == "LR") return DcqdInputLabel::LR;
  throw std::invalid_argument("unknown DCQD input label: " + s);
}

// BELL is the maximally entangled (|HH>-|VV>)/sqrt2; the other three are the
// partially entangled cos(pi/8)|aa> - i sin(pi/8)|a'a'> over the conjugate
// basis pairs (H,V), (D,A), (L,R).
inline ComplexVector dcqd_input_ket(DcqdInputLabel label) {
  const double c = std::cos(M_PI / 8.0);
  const double s = std::sin(M_PI / 8.0);
  const Complex mis(0.0, -1.0);
  auto pair_state = [&](Polarization a, Polarization b) {
    return ComplexVector(c * kron(ket(a), ket(a)) + mis * s * kron(ket(b), ket(b)));
  };
  switch (label) {
    case DcqdInputLabel::Bell: return bell_ket(BellState::PhiMinus);
    case DcqdInputLabel::HV: return pair_state(Polarization::H, Polarization::V);
    case DcqdInputLabel::DA: return pair_state(Polarization::D, Polarization::A);
    case DcqdInputLabel::LR: return pair_state(Polarization::L, Polarization::R);
  }
  throw std::logic_error("bad DcqdInputLabel");
}

struct DcqdInput {
  DcqdInputLabel label = DcqdInputLabel::Bell;
  DensityMatrix state;  // dim 4, pure, unit trace
};

inline std::array<DcqdInput, 4> dcqd_inputs() {
  std::array<DcqdInput, 4> inputs;
  for (int i = 0; i < 4; ++i)
    inputs[i] = {kDcqdInputOrder[i], pure_state(dcqd_input_ket(kDcqdInputOrder[i]))};
  return inputs;
}

// ---------------------------------------------------------------------------
// Bell measurement forward model
// ---------------------------------------------------------------------------

struct BellProjector {
  BellState label = BellState::PhiPlus;
  ComplexMatrix op;  // rank-1 projector
};

inline std::array<BellProjector, 4> bell_projectors() {
  std::array<BellProjector, 4> out;
  for (int b = 0; b < 4; ++b) out[b] = {kBellOrder[b], projector(bell_ket(kBellOrder[b]))};
  return out;
}

// p_b = Tr[Pi_b (id ⊗ eps)(rho_in)], ordered (Phi+, Phi-, Psi+, Psi-).
inline std::array<double, 4> dcqd_probabilities(const ChiMatrix& chi, const DcqdInput& input) {
  DensityMatrix out = apply_chi_signal(chi, input.state);
  std::array<double, 4> p{};
  auto projs = bell_projectors();
  for (int b = 0; b < 4; ++b) p[b] = (projs[b].op * out.matrix).trace().real();
  return p;
}

// ---------------------------------------------------------------------------
// Single-setting extraction: the BELL probe alone pins the chi diagonal, since
// (I ⊗ sigma_m)|Phi-> lands on four distinct Bell states and cross terms vanish
// by orthogonality.
// ---------------------------------------------------------------------------

struct ChiDiagonal {
  std::array<double, 4> values{};   // (chi00, chi11, chi22, chi33)
  double probability_sum = 0.0;
  bool sum_flagged = false;  // |sum - 1| > 1e-6: non-TP channel or miscalibrated data
};

inline ChiDiagonal bell_outcome_to_chi_diag(const std::array<double, 4>& bell_probs) {
  ChiDiagonal d;
  d.values[0] = bell_probs[1];  // Phi-  <- identity
  d.values[1] = bell_probs[3];  // Psi-  <- sigma_x
  d.values[2] = bell_probs[2];  // Psi+  <- sigma_y
  d.values[3] = bell_probs[0];  // Phi+  <- sigma_z
  d.probability_sum = bell_probs[0] + bell_probs[1] + bell_probs[2] + bell_probs[3];
  d.sum_flagged = std::abs(d.probability_sum - 1.0) > 1e-6;
  return d;
}

struct RelaxationExtraction {
  double alpha = 0.0;  // longitudinal decay multiplier exp(-t/T1)
  double beta = 0.0;   // transverse decay multiplier exp(-t/T2)
  double ratio = 0.0;  // T2:T1 = ln(alpha)/ln(beta)
  bool sum_flagged = false;
};

// Both relaxation times from the single BELL experimental setting.
inline RelaxationExtraction extract_relaxation_ratio(const std::array<double, 4>& bell_probs) {
  ChiDiagonal d = bell_outcome_to_chi_diag(bell_probs);
  RelaxationExtraction r;
  r.alpha = d.values[0] + d.values[3] - d.values[1] - d.values[2];
  r.beta = d.values[0] - d.values[3];
  r.sum_flagged = d.sum_flagged;
  if (r.alpha <= 0.0 || r.alpha >= 1.0 || r.beta <= 0.0 || r.beta >= 1.0)
    throw std::domain_error(
        "relaxation extraction undefined: decay multipliers alpha=" + std::to_string(r.alpha) +
        ", beta=" + std::to_string(r.beta) +
        " must lie strictly inside (0,1); identity-like data carries no time scale");
  r.ratio = std::log(r.alpha) / std::log(r.beta);
  return r;
}

// ---------------------------------------------------------------------------
// Hyperentangled Bell-state analysis. Each photon lives in the 4-dim hybrid
// space polarization ⊗ OAM with OAM basis (ccw, cw); measuring both photons'
// hybrid Bell states identifies the polarization Bell state when the OAM pair
// is held in Psi+.
// ---------------------------------------------------------------------------

enum class HybridBell { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr std::array<HybridBell, 4> kHybridOrder = {
    HybridBell::PhiPlus, HybridBell::PhiMinus, HybridBell::PsiPlus, HybridBell::PsiMinus};

inline const char* to_string(HybridBell h) {
  switch (h) {
    case HybridBell::PhiPlus: return "phi_plus";
    case HybridBell::PhiMinus: return "phi_minus";
    case HybridBell::PsiPlus: return "psi_plus";
    case HybridBell::PsiMinus: return "psi_minus";
  }
  throw std::logic_error("bad HybridBell");
}

inline HybridBell hybrid_from_string(const std::string& s) {
  if (s == "phi_plus") return HybridBell::PhiPlus;
  if (s == "phi_minus") return HybridBell::PhiMinus;
  if (s == "psi_plus") return HybridBell::PsiPlus;
  if (s == "psi_minus") return HybridBell::PsiMinus;
  throw std::invalid_argument("unknown hybrid Bell label: " + s);
}

// Single-photon hybrid space index: |pol, oam> -> 2*pol + oam, pol in {H=0,V=1},
// oam in {ccw=0, cw=1}. psi± = (|H,ccw> ± |V,cw>)/sqrt2, phi± = (|H,cw> ± |V,ccw>)/sqrt2.
inline ComplexVector hybrid_bell_ket(HybridBell h) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  ComplexVector v = ComplexVector::Zero(4);
  switch (h) {
    case HybridBell::PhiPlus: v(1) = inv_sqrt2; v(2) = inv_sqrt2; break;
    case HybridBell::PhiMinus: v(1) = inv_sqrt2; v(2) = -inv_sqrt2; break;
    case HybridBell::PsiPlus: v(0) = inv_sqrt2; v(3) = inv_sqrt2; break;
    case HybridBell::PsiMinus: v(0) = inv_sqrt2; v(3) = -inv_sqrt2; break;
  }
  return v;
}

struct HybridBellState {
  HybridBell label = HybridBell::PhiPlus;
  ComplexVector vector;  // dim 4
};

inline std::array<HybridBellState, 4> hybrid_bell_states() {
  std::array<HybridBellState, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = {kHybridOrder[i], hybrid_bell_ket(kHybridOrder[i])};
  return out;
}

// Coincidence signature: the hybrid Bell state seen on each photon.
struct CoincidencePair {
  HybridBell signal = HybridBell::PhiPlus;
  HybridBell idler = HybridBell::PhiPlus;

  bool operator<(const CoincidencePair& o) const {
    return signal != o.signal ? signal < o.signal : idler < o.idler;
  }
  bool operator==(const CoincidencePair& o) const {
    return signal == o.signal && idler == o.idler;
  }
};

namespace detail {

// |Bell_spin ⊗ Psi+_orbit> rearranged into (signal hybrid) ⊗ (idler hybrid),
// a 16-dim vector indexed (2*p1+o1)*4 + (2*p2+o2).
inline ComplexVector hyper_state(BellState spin) {
  ComplexVector spin_ket = bell_ket(spin);  // index 2*p1 + p2
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  ComplexVector out = ComplexVector::Zero(16);
  // Psi+ orbit: (|ccw,cw> + |cw,ccw>)/sqrt2 over (o1, o2)
  const std::array<std::pair<int, int>, 2> orbit_terms = {{{0, 1}, {1, 0}}};
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2) {
      Complex amp = spin_ket(2 * p1 + p2);
      if (amp == Complex(0.0, 0.0)) continue;
      for (auto [o1, o2] : orbit_terms)
        out((2 * p1 + o1) * 4 + (2 * p2 + o2)) += amp * inv_sqrt2;
    }
  return out;
}

}  // namespace detail

// Project the hyperentangled state onto all 16 hybrid product pairs. Exactly four
// pairs survive, each with probability 1/4, and the surviving sets for the four
// polarization Bell states partition the 16 pairs: this is what makes the BSA full.
inline std::vector<std::pair<CoincidencePair, double>> hyper_bsa_decompose(BellState spin) {
  ComplexVector state = detail::hyper_state(spin);
  std::vector<std::pair<CoincidencePair, double>> out;
  for (HybridBell h1 : kHybridOrder)
    for (HybridBell h2 : kHybridOrder) {
      ComplexVector product = kron(hybrid_bell_ket(h1), hybrid_bell_ket(h2));
      double prob = std::norm(product.dot(state));
      if (prob > 1e-12) out.push_back({CoincidencePair{h1, h2}, prob});
    }
  return out;
}

// Inverse of the decomposition's partition; total on all 16 coincidence pairs.
inline BellState bsa_classify(const CoincidencePair& pair) {
  static const std::map<CoincidencePair, BellState> table = [] {
    std::map<CoincidencePair, BellState> t;
    for (BellState b : kBellOrder)
      for (const auto& [p, prob] : hyper_bsa_decompose(b)) t.emplace(p, b);
    return t;
  }();
  auto it = table.find(pair);
  if (it == table.end()) throw std::logic_error("bsa_classify: incomplete partition table");
  return it->second;
}

// ---------------------------------------------------------------------------
// Systematic-error calibration: tomograph the four probe states, then probe the
// Bell analyzer with known product states. 4*9 + 9 = 45 configurations.
// ---------------------------------------------------------------------------

struct CalibrationQstSetting {
  int config_id = 0;
  DcqdInputLabel input = DcqdInputLabel::Bell;
  LocalBasis idler_basis = LocalBasis::HV;
  LocalBasis signal_basis = LocalBasis::HV;
};

struct CalibrationProbeSetting {
  int config_id = 0;
  LocalBasis idler_basis = LocalBasis::HV;
  LocalBasis signal_basis = LocalBasis::HV;
};

struct CalibrationPlan {
  std::vector<CalibrationQstSetting> qst;     // 36
  std::vector<CalibrationProbeSetting> probes;  // 9
  std::size_t total() const { return qst.size() + probes.size(); }
};

inline CalibrationPlan calibration_plan() {
  CalibrationPlan plan;
  int id = 0;
  for (DcqdInputLabel input : kDcqdInputOrder)
    for (LocalBasis b1 : kAnalysisBasisOrder)
      for (LocalBasis b2 : kAnalysisBasisOrder) plan.qst.push_back({id++, input, b1, b2});
  for (LocalBasis b1 : kAnalysisBasisOrder)
    for (LocalBasis b2 : kAnalysisBasisOrder) plan.probes.push_back({id++, b1, b2});
  return plan;
}

// Coincidence projectors of a local basis pair, outcome order (00, 01, 10, 11).
inline std::array<ComplexMatrix, 4> coincidence_projectors(LocalBasis idler, LocalBasis signal) {
  auto p1 = basis_projectors(idler);
  auto p2 = basis_projectors(signal);
  return {kron(p1[0], p2[0]), kron(p1[0], p2[1]), kron(p1[1], p2[0]), kron(p1[1], p2[1])};
}

// Product probe states of a basis pair, same (00, 01, 10, 11) order.
inline std::array<ComplexVector, 4> probe_states(LocalBasis idler, LocalBasis signal) {
  auto o1 = basis_outcomes(idler);
  auto o2 = basis_outcomes(signal);
  return {kron(ket(o1[0]), ket(o2[0])), kron(ket(o1[0]), ket(o2[1])),
          kron(ket(o1[1]), ket(o2[0])), kron(ket(o1[1]), ket(o2[1]))};
}

// Tomographically characterized probe states and Bell-analyzer POVM elements.
struct CalibrationData {
  std::array<DensityMatrix, 4> inputs;      // in kDcqdInputOrder
  std::array<ComplexMatrix, 4> measurement;  // in kBellOrder
  double max_projection_shift = 0.0;  // operator-norm change from the PSD projection
  bool quality_warning = false;       // shift above 0.05

  void validate() const {
    ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
    for (const auto& rho : inputs) {
      rho.validate(true);
      if (std::abs(rho.trace() - 1.0) > 1e-6)
        throw std::invalid_argument("CalibrationData: input trace deviates from 1");
    }
    for (const auto& m : measurement) {
      require_dim(m, 4, "CalibrationData measurement");
      if (hermiticity_deviation(m) > 1e-9)
        throw std::invalid_argument("CalibrationData: measurement element not Hermitian");
      if (min_eigenvalue(m) < -1e-9)
        throw std::invalid_argument("CalibrationData: measurement element not PSD");
      sum += m;
    }
    if (min_eigenvalue(ComplexMatrix::Identity(4, 4) - sum) < -1e-9)
      throw std::invalid_argument("CalibrationData: measurement elements exceed identity");
  }

  // Ideal calibration: exact probe states, exact Bell projectors.
  static CalibrationData ideal() {
    CalibrationData cal;
    auto ins = dcqd_inputs();
    for (int i = 0; i < 4; ++i) cal.inputs[i] = ins[i].state;
    auto projs = bell_projectors();
    for (int b = 0; b < 4; ++b) cal.measurement[b] = projs[b].op;
    return cal;
  }
};

// Per-setting calibration counts (the persisted records carry these plus ids).
struct QstSettingCounts {
  DcqdInputLabel input = DcqdInputLabel::Bell;
  LocalBasis idler_basis = LocalBasis::HV;
  LocalBasis signal_basis = LocalBasis::HV;
  std::array<double, 4> counts{};  // coincidence outcomes (00, 01, 10, 11)
  double budget = 1.0;
};

struct ProbeSettingCounts {
  LocalBasis idler_basis = LocalBasis::HV;
  LocalBasis signal_basis = LocalBasis::HV;
  std::array<std::array<double, 4>, 4> counts{};  // [probe (00,01,10,11)][Bell outcome]
  double budget = 1.0;
};

// Input states via constrained maximum likelihood, measurement operators via
// linear inversion over the 36 probe equations followed by a PSD projection.
inline CalibrationData characterize_from_calibration(
    const std::vector<QstSettingCounts>& qst_counts,
    const std::vector<ProbeSettingCounts>& probe_counts,
    const EstimationOptions& options = {}) {
  CalibrationData cal;

  // --- probe-state tomography, one 9-setting QST per input ---
  for (int i = 0; i < 4; ++i) {
    DcqdInputLabel label = kDcqdInputOrder[i];
    LikelihoodModel model;
    model.dim = 4;
    model.normalize_trace = true;
    for (const auto& rec : qst_counts) {
      if (rec.input != label) continue;
      auto projs = coincidence_projectors(rec.idler_basis, rec.signal_basis);
      for (int o = 0; o < 4; ++o)
        model.terms.push_back({projs[o].transpose().eval(), rec.counts[o], rec.budget});
    }
    if (model.terms.size() != 36)
      throw std::invalid_argument("characterize_from_calibration: input " +
                                  std::string(to_string(label)) + " has " +
                                  std::to_string(model.terms.size() / 4) +
                                  " QST settings, expected 9");
    QstResult qst = mle_qst(model, options);
    cal.inputs[i] = qst.state;
  }

  // --- analyzer characterization: p_{s,b} = Tr[M_b rho_s] for known probes ---
  if (probe_counts.size() != 9)
    throw std::invalid_argument("characterize_from_calibration: expected 9 probe settings, got " +
                                std::to_string(probe_counts.size()));
  std::vector<ComplexMatrix> probe_coeffs;
  std::array<std::vector<double>, 4> freqs;  // per Bell outcome
  for (const auto& rec : probe_counts) {
    auto states = probe_states(rec.idler_basis, rec.signal_basis);
    for (int s = 0; s < 4; ++s) {
      // Tr[M rho] = <rho^T, M> elementwise
      probe_coeffs.push_back(projector(states[s]).transpose());
      for (int b = 0; b < 4; ++b) freqs[b].push_back(rec.counts[s][b] / rec.budget);
    }
  }
  for (int b = 0; b < 4; ++b) {
    ComplexMatrix raw = linear_inversion(probe_coeffs, freqs[b], 4);
    raw = 0.5 * (raw + raw.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(raw);
    double shift = std::max(0.0, -es.eigenvalues().minCoeff());
    cal.max_projection_shift = std::max(cal.max_projection_shift, shift);
    Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
    cal.measurement[b] = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
  }
  cal.quality_warning = cal.max_projection_shift > 0.05;

  // Statistical noise can push the POVM sum marginally past the identity; a scalar
  // rescale restores sum M_b <= I without disturbing the relative structure.
  ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
  for (const auto& m : cal.measurement) sum += m;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sum, Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().maxCoeff();
  if (top > 1.0)
    for (auto& m : cal.measurement) m /= top;

  cal.validate();
  return cal;
}

// ---------------------------------------------------------------------------
// Reconstruction models
// ---------------------------------------------------------------------------

// Coefficient matrices A with p = <A, chi> for each (input, Bell outcome) pair,
// record-major in kDcqdInputOrder x kBellOrder. With calibration data supplied,
// the characterized states and POVM replace the ideal ones.
inline std::vector<ComplexMatrix> dcqd_coefficients(
    const CalibrationData& cal = CalibrationData::ideal()) {
  const auto& sigma = pauli_basis();
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  std::array<ComplexMatrix, 4> lifted;
  for (int m = 0; m < 4; ++m) lifted[m] = kron(id2, sigma[m]);
  std::vector<ComplexMatrix> coeffs;
  coeffs.reserve(16);
  for (int k = 0; k < 4; ++k)
    for (int b = 0; b < 4; ++b) {
      ComplexMatrix a(4, 4);
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
          a(m, n) =
              (cal.measurement[b] * lifted[m] * cal.inputs[k].matrix * lifted[n]).trace();
      coeffs.push_back(0.5 * (a + a.adjoint()));
    }
  return coeffs;
}

}  // namespace qpt
