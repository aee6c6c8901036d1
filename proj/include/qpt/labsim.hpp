#pragma once

#include "qpt/channels.hpp"
#include "qpt/dcqd.hpp"
#include "qpt/rng.hpp"
#include "qpt/sqpt.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qpt {

// ---------------------------------------------------------------------------
// Systematic error model: a preparation error on the signal arm before the
// process and a two-qubit error in front of the Bell analyzer.
// ---------------------------------------------------------------------------

struct ErrorModel {
  std::optional<ChiMatrix> preparation;  // single-qubit channel, signal arm
  std::optional<KrausSet> measurement;   // two-qubit channel before the BSA

  bool empty() const { return !preparation && !measurement; }

  void validate() const {
    if (preparation) require_physical(*preparation, "ErrorModel.preparation");
    if (measurement) {
      if (measurement->dim() != 4)
        throw std::invalid_argument("ErrorModel.measurement: expected two-qubit operators");
      measurement->validate();
    }
  }
};

enum class Scheme { Sqpt, Dcqd, Calibration };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Sqpt: return "sqpt";
    case Scheme::Dcqd: return "dcqd";
    case Scheme::Calibration: return "calibration";
  }
  throw std::logic_error("bad Scheme");
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "sqpt") return Scheme::Sqpt;
  if (s == "dcqd") return Scheme::Dcqd;
  if (s == "calibration") return Scheme::Calibration;
  throw std::invalid_argument("unknown scheme: " + s);
}

struct RunSpec {
  ChannelSpec channel;
  Scheme scheme = Scheme::Dcqd;
  long long budget = 10000;  // incident-pair budget per configuration
  std::uint64_t seed = 0;
  ErrorModel errors;

  void validate() const {
    if (budget < 1) throw std::invalid_argument("RunSpec: budget must be >= 1");
    errors.validate();
  }
};

// ---------------------------------------------------------------------------
// Count records (wire format: counts/v1)
// ---------------------------------------------------------------------------

struct SqptRecord {
  int config_id = 0;
  Polarization input = Polarization::H;
  LocalBasis basis = LocalBasis::HV;
  std::array<long long, 2> counts{};
  long long budget = 0;
};

struct DcqdRecord {
  int config_id = 0;
  DcqdInputLabel input = DcqdInputLabel::Bell;
  std::array<long long, 4> counts{};  // Bell outcomes in kBellOrder
  long long budget = 0;
};

struct CalibrationQstRecord {
  int config_id = 0;
  DcqdInputLabel input = DcqdInputLabel::Bell;
  LocalBasis idler_basis = LocalBasis::HV;
  LocalBasis signal_basis = LocalBasis::HV;
  std::array<long long, 4> counts{};  // coincidence outcomes (00, 01, 10, 11)
  long long budget = 0;
};

struct CalibrationProbeRecord {
  int config_id = 0;
  LocalBasis idler_basis = LocalBasis::HV;
  LocalBasis signal_basis = LocalBasis::HV;
  std::array<std::array<long long, 4>, 4> counts{};  // [probe][Bell outcome]
  long long budget = 0;
};

struct CountsFile {
  RunSpec spec;
  std::vector<SqptRecord> sqpt_records;
  std::vector<DcqdRecord> dcqd_records;
  std::vector<CalibrationQstRecord> calibration_qst_records;
  std::vector<CalibrationProbeRecord> calibration_probe_records;
};

inline std::vector<QstSettingCounts> to_setting_counts(
    const std::vector<CalibrationQstRecord>& records) {
  std::vector<QstSettingCounts> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    QstSettingCounts c{r.input, r.idler_basis, r.signal_basis, {}, static_cast<double>(r.budget)};
    for (int o = 0; o < 4; ++o) c.counts[o] = static_cast<double>(r.counts[o]);
    out.push_back(c);
  }
  return out;
}

inline std::vector<ProbeSettingCounts> to_setting_counts(
    const std::vector<CalibrationProbeRecord>& records) {
  std::vector<ProbeSettingCounts> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    ProbeSettingCounts c{r.idler_basis, r.signal_basis, {}, static_cast<double>(r.budget)};
    for (int s = 0; s < 4; ++s)
      for (int b = 0; b < 4; ++b) c.counts[s][b] = static_cast<double>(r.counts[s][b]);
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// True-probability forward models with systematic errors folded in.
// Composition order is fixed: input -> preparation error -> process ->
// measurement error -> projection.
// ---------------------------------------------------------------------------

inline std::pair<double, double> sqpt_true_probabilities(const ChiMatrix& chi,
                                                         const SqptConfig& config,
                                                         const ErrorModel& errors) {
  DensityMatrix rho = pure_state(ket(config.input));
  if (errors.preparation) rho = apply_chi(*errors.preparation, rho);
  DensityMatrix out = apply_chi(chi, rho);
  // The two-qubit analyzer error has no SQPT analogue; local analysis is ideal here.
  auto projs = basis_projectors(config.basis);
  return {(projs[0] * out.matrix).trace().real(), (projs[1] * out.matrix).trace().real()};
}

inline std::array<double, 4> dcqd_true_probabilities(const ChiMatrix& chi, const DcqdInput& input,
                                                     const ErrorModel& errors) {
  DensityMatrix rho = input.state;
  if (errors.preparation) rho = apply_chi_signal(*errors.preparation, rho);
  rho = apply_chi_signal(chi, rho);
  if (errors.measurement) rho = apply_kraus(*errors.measurement, rho);
  std::array<double, 4> p{};
  auto projs = bell_projectors();
  for (int b = 0; b < 4; ++b) p[b] = (projs[b].op * rho.matrix).trace().real();
  return p;
}

inline std::array<double, 4> calibration_qst_probabilities(const CalibrationQstSetting& setting,
                                                           const ErrorModel& errors) {
  DensityMatrix rho = pure_state(dcqd_input_ket(setting.input));
  if (errors.preparation) rho = apply_chi_signal(*errors.preparation, rho);
  auto projs = coincidence_projectors(setting.idler_basis, setting.signal_basis);
  std::array<double, 4> p{};
  for (int o = 0; o < 4; ++o) p[o] = (projs[o] * rho.matrix).trace().real();
  return p;
}

// Known product probes through the (possibly faulty) analyzer: [probe][Bell outcome].
inline std::array<std::array<double, 4>, 4> calibration_probe_probabilities(
    const CalibrationProbeSetting& setting, const ErrorModel& errors) {
  auto states = probe_states(setting.idler_basis, setting.signal_basis);
  auto projs = bell_projectors();
  std::array<std::array<double, 4>, 4> p{};
  for (int s = 0; s < 4; ++s) {
    DensityMatrix rho = pure_state(states[s]);
    if (errors.measurement) rho = apply_kraus(*errors.measurement, rho);
    for (int b = 0; b < 4; ++b) p[s][b] = (projs[b].op * rho.matrix).trace().real();
  }
  return p;
}

// ---------------------------------------------------------------------------
// Synthetic experiment generator: independent Poisson counts per outcome at
// rate budget * p, one derived child seed per configuration.
// ---------------------------------------------------------------------------

inline CountsFile simulate_run(const RunSpec& spec) {
  spec.validate();
  CountsFile file;
  file.spec = spec;
  const double n = static_cast<double>(spec.budget);

  switch (spec.scheme) {
    case Scheme::Sqpt: {
      ChiMatrix chi = build_channel(spec.channel).chi;
      for (const auto& config : sqpt_plan()) {
        CountSampler sampler(derive_seed(spec.seed, static_cast<std::uint64_t>(config.config_id)));
        auto [p1, p2] = sqpt_true_probabilities(chi, config, spec.errors);
        SqptRecord rec{config.config_id, config.input, config.basis, {}, spec.budget};
        rec.counts[0] = sampler.poisson(n * p1);
        rec.counts[1] = sampler.poisson(n * p2);
        file.sqpt_records.push_back(rec);
      }
      break;
    }
    case Scheme::Dcqd: {
      ChiMatrix chi = build_channel(spec.channel).chi;
      auto inputs = dcqd_inputs();
      for (int k = 0; k < 4; ++k) {
        CountSampler sampler(derive_seed(spec.seed, static_cast<std::uint64_t>(k)));
        auto p = dcqd_true_probabilities(chi, inputs[k], spec.errors);
        DcqdRecord rec{k, inputs[k].label, {}, spec.budget};
        for (int b = 0; b < 4; ++b) rec.counts[b] = sampler.poisson(n * p[b]);
        file.dcqd_records.push_back(rec);
      }
      break;
    }
    case Scheme::Calibration: {
      CalibrationPlan plan = calibration_plan();
      for (const auto& setting : plan.qst) {
        CountSampler sampler(derive_seed(spec.seed, static_cast<std::uint64_t>(setting.config_id)));
        auto p = calibration_qst_probabilities(setting, spec.errors);
        CalibrationQstRecord rec{setting.config_id, setting.input, setting.idler_basis,
                                 setting.signal_basis, {}, spec.budget};
        for (int o = 0; o < 4; ++o) rec.counts[o] = sampler.poisson(n * p[o]);
        file.calibration_qst_records.push_back(rec);
      }
      for (const auto& setting : plan.probes) {
        CountSampler sampler(derive_seed(spec.seed, static_cast<std::uint64_t>(setting.config_id)));
        auto p = calibration_probe_probabilities(setting, spec.errors);
        CalibrationProbeRecord rec{setting.config_id, setting.idler_basis, setting.signal_basis,
                                   {}, spec.budget};
        for (int s = 0; s < 4; ++s)
          for (int b = 0; b < 4; ++b) rec.counts[s][b] = sampler.poisson(n * p[s][b]);
        file.calibration_probe_records.push_back(rec);
      }
      break;
    }
  }
  return file;
}

// ---------------------------------------------------------------------------
// Default systematics preset used by the acceptance pipeline. A polarization
// rotation on the signal arm plus an idler-arm rotation and isotropic
// depolarization in front of the analyzer; magnitudes sized so the uncorrected
// reconstruction lands well below the corrected one, then frozen.
// ---------------------------------------------------------------------------

inline ComplexMatrix rotation_about_y(double angle) {
  ComplexMatrix u(2, 2);
  u << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return u;
}

inline ComplexMatrix rotation_about_x(double angle) {
  const auto& sigma = pauli_basis();
  return std::cos(angle) * sigma[0] - Complex(0.0, std::sin(angle)) * sigma[1];
}

// Two-qubit isotropic depolarizing channel rho -> (1-p) rho + p Tr(rho) I/4.
inline KrausSet two_qubit_depolarizing(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("two_qubit_depolarizing: p outside [0,1]");
  const auto& sigma = pauli_basis();
  std::vector<ComplexMatrix> ops;
  ops.push_back(std::sqrt(1.0 - 15.0 * p / 16.0) * ComplexMatrix::Identity(4, 4));
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      if (m == 0 && n == 0) continue;
      ops.push_back(std::sqrt(p / 16.0) * kron(sigma[m], sigma[n]));
    }
  return KrausSet(std::move(ops));
}

inline KrausSet compose_kraus(const KrausSet& second, const KrausSet& first) {
  std::vector<ComplexMatrix> ops;
  ops.reserve(second.operators.size() * first.operators.size());
  for (const auto& a : second.operators)
    for (const auto& b : first.operators) ops.push_back(a * b);
  return KrausSet(std::move(ops));
}

inline constexpr double kDefaultPreparationAngle = 0.209;   // rad, signal-arm y rotation
inline constexpr double kDefaultAnalyzerAngle = 0.14;       // rad, idler-arm x rotation
inline constexpr double kDefaultAnalyzerDepolarization = 0.06;

inline ErrorModel inject_default_systematics() {
  ErrorModel errors;
  errors.preparation = kraus_to_chi(KrausSet({rotation_about_y(kDefaultPreparationAngle)}));
  KrausSet idler_rotation(
      {kron(rotation_about_x(kDefaultAnalyzerAngle), ComplexMatrix::Identity(2, 2))});
  errors.measurement =
      compose_kraus(two_qubit_depolarizing(kDefaultAnalyzerDepolarization), idler_rotation);
  return errors;
}

}  // namespace qpt
