#pragma once

#include "qpt/channels.hpp"
#include "qpt/dcqd.hpp"
#include "qpt/estimation.hpp"
#include "qpt/labsim.hpp"
#include "qpt/report.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>

namespace qpt {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCountsSchema = "counts/v1";
inline constexpr const char* kChannelSchema = "channel/v1";
inline constexpr const char* kCalibrationSchema = "calibration/v1";
inline constexpr const char* kReconstructionSchema = "reconstruction/v1";
inline constexpr const char* kComparisonSchema = "comparison/v1";
inline constexpr const char* kRelaxationSchema = "relaxation/v1";

// ---------------------------------------------------------------------------
// Matrices: nested arrays of [re, im] pairs, row major.
// ---------------------------------------------------------------------------

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix: expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j.at(i);
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("matrix: ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& cell = row.at(k);
      if (!cell.is_array() || cell.size() != 2)
        throw std::invalid_argument("matrix: each entry must be an [re, im] pair");
      m(i, k) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  }
  return m;
}

inline Json density_matrix_to_json(const DensityMatrix& rho) {
  return Json{{"kind", "density_matrix"}, {"dim", rho.dim}, {"matrix", matrix_to_json(rho.matrix)}};
}

inline DensityMatrix density_matrix_from_json(const Json& j) {
  if (j.value("kind", "") != "density_matrix")
    throw std::invalid_argument("expected kind 'density_matrix', got '" + j.value("kind", "") +
                                "'");
  DensityMatrix rho(j.at("dim").get<int>(), matrix_from_json(j.at("matrix")));
  rho.validate(false);
  return rho;
}

inline Json chi_to_json(const ChiMatrix& chi) {
  return Json{{"kind", "chi_matrix"}, {"dim", 4}, {"matrix", matrix_to_json(chi.matrix)}};
}

inline ChiMatrix chi_from_json(const Json& j) {
  if (j.value("kind", "") != "chi_matrix")
    throw std::invalid_argument("expected kind 'chi_matrix', got '" + j.value("kind", "") + "'");
  return ChiMatrix(matrix_from_json(j.at("matrix")));
}

inline Json kraus_to_json(const KrausSet& k) {
  Json ops = Json::array();
  for (const auto& op : k.operators) ops.push_back(matrix_to_json(op));
  return Json{{"kind", "kraus_set"}, {"dim", k.dim()}, {"operators", std::move(ops)}};
}

inline KrausSet kraus_from_json(const Json& j) {
  if (j.value("kind", "") != "kraus_set")
    throw std::invalid_argument("expected kind 'kraus_set', got '" + j.value("kind", "") + "'");
  std::vector<ComplexMatrix> ops;
  for (const Json& op : j.at("operators")) ops.push_back(matrix_from_json(op));
  return KrausSet(std::move(ops));
}

// ---------------------------------------------------------------------------
// Channel specs
// ---------------------------------------------------------------------------

inline Json channel_spec_to_json(const ChannelSpec& spec) {
  Json j{{"kind", to_string(spec.kind)}};
  if (!spec.params.empty()) j["params"] = spec.params;
  if (!spec.axis.empty()) j["axis"] = spec.axis;
  if (spec.kind == ChannelKind::Mixture) {
    Json parts = Json::array();
    for (const auto& [w, sub] : spec.components)
      parts.push_back(Json{{"weight", w}, {"spec", channel_spec_to_json(sub)}});
    j["components"] = std::move(parts);
  }
  return j;
}

inline ChannelSpec channel_spec_from_json(const Json& j) {
  ChannelSpec spec;
  spec.kind = channel_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("params"))
    spec.params = j.at("params").get<std::map<std::string, double>>();
  if (j.contains("axis")) spec.axis = j.at("axis").get<std::string>();
  if (j.contains("components"))
    for (const Json& part : j.at("components"))
      spec.components.push_back(
          {part.at("weight").get<double>(), channel_spec_from_json(part.at("spec"))});
  return spec;
}

inline Json channel_file_to_json(const ChannelSpec& spec, const Channel& channel) {
  return Json{{"schema", kChannelSchema},
              {"spec", channel_spec_to_json(spec)},
              {"chi", chi_to_json(channel.chi)},
              {"kraus", kraus_to_json(channel.kraus)}};
}

// ---------------------------------------------------------------------------
// Error models and run specs
// ---------------------------------------------------------------------------

inline Json error_model_to_json(const ErrorModel& errors) {
  Json j;
  j["preparation"] = errors.preparation ? chi_to_json(*errors.preparation) : Json(nullptr);
  j["measurement"] = errors.measurement ? kraus_to_json(*errors.measurement) : Json(nullptr);
  return j;
}

inline ErrorModel error_model_from_json(const Json& j) {
  ErrorModel errors;
  if (j.contains("preparation") && !j.at("preparation").is_null())
    errors.preparation = chi_from_json(j.at("preparation"));
  if (j.contains("measurement") && !j.at("measurement").is_null())
    errors.measurement = kraus_from_json(j.at("measurement"));
  errors.validate();
  return errors;
}

inline Json run_spec_to_json(const RunSpec& spec) {
  return Json{{"channel", channel_spec_to_json(spec.channel)},
              {"scheme", to_string(spec.scheme)},
              {"budget", spec.budget},
              {"seed", spec.seed},
              {"errors", error_model_to_json(spec.errors)}};
}

inline RunSpec run_spec_from_json(const Json& j) {
  RunSpec spec;
  spec.channel = channel_spec_from_json(j.at("channel"));
  spec.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  spec.budget = j.at("budget").get<long long>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("errors")) spec.errors = error_model_from_json(j.at("errors"));
  return spec;
}

// ---------------------------------------------------------------------------
// Count records
// ---------------------------------------------------------------------------

namespace detail {

inline long long checked_count(const Json& j, const std::string& where) {
  long long v = j.get<long long>();
  if (v < 0) throw std::invalid_argument(where + ": negative count " + std::to_string(v));
  return v;
}

inline Json bell_counts_to_json(const std::array<long long, 4>& counts) {
  Json j;
  for (int b = 0; b < 4; ++b) j[to_string(kBellOrder[b])] = counts[b];
  return j;
}

inline std::array<long long, 4> bell_counts_from_json(const Json& j, const std::string& where) {
  std::array<long long, 4> counts{};
  for (int b = 0; b < 4; ++b)
    counts[b] = checked_count(j.at(to_string(kBellOrder[b])), where);
  return counts;
}

}  // namespace detail

inline Json counts_to_json(const CountsFile& file) {
  Json j{{"schema", kCountsSchema}, {"spec", run_spec_to_json(file.spec)}};
  Json records = Json::array();
  switch (file.spec.scheme) {
    case Scheme::Sqpt:
      for (const auto& r : file.sqpt_records)
        records.push_back(Json{{"config_id", r.config_id},
                               {"input", to_string(r.input)},
                               {"basis", to_string(r.basis)},
                               {"counts", Json::array({r.counts[0], r.counts[1]})},
                               {"budget", r.budget}});
      break;
    case Scheme::Dcqd:
      for (const auto& r : file.dcqd_records)
        records.push_back(Json{{"config_id", r.config_id},
                               {"input_label", to_string(r.input)},
                               {"counts", detail::bell_counts_to_json(r.counts)},
                               {"budget", r.budget}});
      break;
    case Scheme::Calibration: {
      for (const auto& r : file.calibration_qst_records)
        records.push_back(Json{{"kind", "qst"},
                               {"config_id", r.config_id},
                               {"input_label", to_string(r.input)},
                               {"idler_basis", to_string(r.idler_basis)},
                               {"signal_basis", to_string(r.signal_basis)},
                               {"counts", Json::array({r.counts[0], r.counts[1], r.counts[2],
                                                       r.counts[3]})},
                               {"budget", r.budget}});
      for (const auto& r : file.calibration_probe_records) {
        auto idler_outcomes = basis_outcomes(r.idler_basis);
        auto signal_outcomes = basis_outcomes(r.signal_basis);
        Json probes = Json::array();
        for (int s = 0; s < 4; ++s)
          probes.push_back(
              Json{{"state", Json::array({to_string(idler_outcomes[s / 2]),
                                          to_string(signal_outcomes[s % 2])})},
                   {"counts", detail::bell_counts_to_json(r.counts[s])}});
        records.push_back(Json{{"kind", "bsa_probe"},
                               {"config_id", r.config_id},
                               {"idler_basis", to_string(r.idler_basis)},
                               {"signal_basis", to_string(r.signal_basis)},
                               {"probes", std::move(probes)},
                               {"budget", r.budget}});
      }
      break;
    }
  }
  j["records"] = std::move(records);
  return j;
}

inline CountsFile counts_from_json(const Json& j) {
  std::string schema = j.value("schema", "<missing>");
  if (schema != kCountsSchema)
    throw std::invalid_argument("schema version mismatch: reader supports '" +
                                std::string(kCountsSchema) + "', file declares '" + schema + "'");
  CountsFile file;
  file.spec = run_spec_from_json(j.at("spec"));
  int idx = 0;
  for (const Json& r : j.at("records")) {
    std::string where = "record " + std::to_string(idx++);
    long long budget = r.at("budget").get<long long>();
    if (budget < 1) throw std::invalid_argument(where + ": budget must be >= 1");
    switch (file.spec.scheme) {
      case Scheme::Sqpt: {
        SqptRecord rec;
        rec.config_id = r.at("config_id").get<int>();
        rec.input = polarization_from_string(r.at("input").get<std::string>());
        rec.basis = basis_from_string(r.at("basis").get<std::string>());
        for (int o = 0; o < 2; ++o)
          rec.counts[o] = detail::checked_count(r.at("counts").at(o), where);
        rec.budget = budget;
        file.sqpt_records.push_back(rec);
        break;
      }
      case Scheme::Dcqd: {
        DcqdRecord rec;
        rec.config_id = r.at("config_id").get<int>();
        rec.input = dcqd_input_from_string(r.at("input_label").get<std::string>());
        rec.counts = detail::bell_counts_from_json(r.at("counts"), where);
        rec.budget = budget;
        file.dcqd_records.push_back(rec);
        break;
      }
      case Scheme::Calibration: {
        std::string kind = r.at("kind").get<std::string>();
        if (kind == "qst") {
          CalibrationQstRecord rec;
          rec.config_id = r.at("config_id").get<int>();
          rec.input = dcqd_input_from_string(r.at("input_label").get<std::string>());
          rec.idler_basis = basis_from_string(r.at("idler_basis").get<std::string>());
          rec.signal_basis = basis_from_string(r.at("signal_basis").get<std::string>());
          for (int o = 0; o < 4; ++o)
            rec.counts[o] = detail::checked_count(r.at("counts").at(o), where);
          rec.budget = budget;
          file.calibration_qst_records.push_back(rec);
        } else if (kind == "bsa_probe") {
          CalibrationProbeRecord rec;
          rec.config_id = r.at("config_id").get<int>();
          rec.idler_basis = basis_from_string(r.at("idler_basis").get<std::string>());
          rec.signal_basis = basis_from_string(r.at("signal_basis").get<std::string>());
          const Json& probes = r.at("probes");
          if (probes.size() != 4)
            throw std::invalid_argument(where + ": expected 4 probe entries");
          for (int s = 0; s < 4; ++s)
            rec.counts[s] = detail::bell_counts_from_json(probes.at(s).at("counts"), where);
          rec.budget = budget;
          file.calibration_probe_records.push_back(rec);
        } else {
          throw std::invalid_argument(where + ": unknown calibration record kind '" + kind + "'");
        }
        break;
      }
    }
  }
  return file;
}

// ---------------------------------------------------------------------------
// Calibration data
// ---------------------------------------------------------------------------

inline Json calibration_to_json(const CalibrationData& cal) {
  Json inputs = Json::array();
  for (const auto& rho : cal.inputs) inputs.push_back(density_matrix_to_json(rho));
  Json measurement = Json::array();
  for (const auto& m : cal.measurement) measurement.push_back(matrix_to_json(m));
  return Json{{"schema", kCalibrationSchema},
              {"inputs", std::move(inputs)},
              {"measurement", std::move(measurement)},
              {"max_projection_shift", cal.max_projection_shift},
              {"quality_warning", cal.quality_warning}};
}

inline CalibrationData calibration_from_json(const Json& j) {
  std::string schema = j.value("schema", "<missing>");
  if (schema != kCalibrationSchema)
    throw std::invalid_argument("schema version mismatch: reader supports '" +
                                std::string(kCalibrationSchema) + "', file declares '" + schema +
                                "'");
  CalibrationData cal;
  const Json& inputs = j.at("inputs");
  const Json& measurement = j.at("measurement");
  if (inputs.size() != 4 || measurement.size() != 4)
    throw std::invalid_argument("calibration: expected 4 inputs and 4 measurement operators");
  for (int i = 0; i < 4; ++i) cal.inputs[i] = density_matrix_from_json(inputs.at(i));
  for (int b = 0; b < 4; ++b) cal.measurement[b] = matrix_from_json(measurement.at(b));
  cal.max_projection_shift = j.value("max_projection_shift", 0.0);
  cal.quality_warning = j.value("quality_warning", false);
  cal.validate();
  return cal;
}

// ---------------------------------------------------------------------------
// Estimation options and results
// ---------------------------------------------------------------------------

inline Json options_to_json(const EstimationOptions& o) {
  return Json{{"tolerance", o.tolerance},
              {"max_iterations", o.max_iterations},
              {"trace_preserving", o.trace_preserving},
              {"penalty_scale", o.penalty_scale},
              {"probability_floor", o.probability_floor},
              {"bootstrap_resamples", o.bootstrap_resamples},
              {"seed", o.seed}};
}

inline EstimationOptions options_from_json(const Json& j) {
  EstimationOptions o;
  o.tolerance = j.value("tolerance", o.tolerance);
  o.max_iterations = j.value("max_iterations", o.max_iterations);
  o.trace_preserving = j.value("trace_preserving", o.trace_preserving);
  o.penalty_scale = j.value("penalty_scale", o.penalty_scale);
  o.probability_floor = j.value("probability_floor", o.probability_floor);
  o.bootstrap_resamples = j.value("bootstrap_resamples", o.bootstrap_resamples);
  o.seed = j.value("seed", o.seed);
  return o;
}

inline Json reconstruction_to_json(const ReconstructionResult& r, Scheme scheme, bool calibrated,
                                   const EstimationOptions& options) {
  PhysicalityReport phys = check_physicality(r.chi);
  Json j{{"schema", kReconstructionSchema},
         {"scheme", to_string(scheme)},
         {"calibrated", calibrated},
         {"chi", chi_to_json(r.chi)},
         {"nll", r.nll},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"floor_applied", r.floor_applied},
         {"physicality",
          Json{{"hermiticity_deviation", phys.hermiticity_deviation},
               {"min_eigenvalue", phys.min_eigenvalue},
               {"complement_floor", phys.complement_floor},
               {"trace_preserving", phys.trace_preserving},
               {"pass", phys.pass}}},
         {"options", options_to_json(options)}};
  if (r.bootstrap)
    j["bootstrap"] = Json{{"fidelity_mean", r.bootstrap->fidelity_mean},
                          {"fidelity_stddev", r.bootstrap->fidelity_stddev},
                          {"resamples", r.bootstrap->resamples},
                          {"excluded", r.bootstrap->excluded}};
  else
    j["bootstrap"] = nullptr;
  return j;
}

// Extract a chi matrix from any chi-bearing document (channel or reconstruction).
inline ChiMatrix chi_from_document(const Json& j) {
  if (j.contains("chi")) return chi_from_json(j.at("chi"));
  if (j.value("kind", "") == "chi_matrix") return chi_from_json(j);
  throw std::invalid_argument("document carries no chi matrix");
}

inline Json comparison_to_json(const MethodComparison& cmp) {
  Json j{{"schema", kComparisonSchema}, {"cross_fidelity", cmp.cross_fidelity}};
  j["a_vs_truth"] = cmp.a_vs_truth ? Json(*cmp.a_vs_truth) : Json(nullptr);
  j["b_vs_truth"] = cmp.b_vs_truth ? Json(*cmp.b_vs_truth) : Json(nullptr);
  j["configuration_counts"] = Json{{"sqpt_full", cmp.ledger.sqpt_full},
                                   {"sqpt_minimal", cmp.ledger.sqpt_minimal},
                                   {"dcqd", cmp.ledger.dcqd},
                                   {"dcqd_calibration", cmp.ledger.dcqd_calibration},
                                   {"sqpt_minimal_to_dcqd_ratio",
                                    cmp.ledger.sqpt_minimal_to_dcqd_ratio}};
  return j;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << text;
}

inline void save_counts(const std::string& path, const CountsFile& file) {
  write_json_file(path, counts_to_json(file));
}

inline CountsFile load_counts(const std::string& path) {
  return counts_from_json(read_json_file(path));
}

}  // namespace qpt
