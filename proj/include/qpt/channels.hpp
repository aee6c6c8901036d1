#pragma once

#include "qpt/process.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace qpt {

enum class ChannelKind {
  Identity,
  PauliRotation,
  PartialDephasing,
  PartialPolarizer,
  Depolarizing,
  Relaxation,
  Mixture
};

inline const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::Identity: return "identity";
    case ChannelKind::PauliRotation: return "pauli_rotation";
    case ChannelKind::PartialDephasing: return "partial_dephasing";
    case ChannelKind::PartialPolarizer: return "partial_polarizer";
    case ChannelKind::Depolarizing: return "depolarizing";
    case ChannelKind::Relaxation: return "relaxation";
    case ChannelKind::Mixture: return "mixture";
  }
  throw std::logic_error("bad ChannelKind");
}

inline ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "identity") return ChannelKind::Identity;
  if (s == "pauli_rotation") return ChannelKind::PauliRotation;
  if (s == "partial_dephasing") return ChannelKind::PartialDephasing;
  if (s == "partial_polarizer") return ChannelKind::PartialPolarizer;
  if (s == "depolarizing") return ChannelKind::Depolarizing;
  if (s == "relaxation") return ChannelKind::Relaxation;
  if (s == "mixture") return ChannelKind::Mixture;
  throw std::invalid_argument("unknown channel kind: " + s);
}

struct ChannelSpec {
  ChannelKind kind = ChannelKind::Identity;
  std::map<std::string, double> params;  // probabilities in [0,1], angles in radians, times
  std::string axis;                      // "x"/"y"/"z" for rotations, "H"/"V" for the polarizer
  std::vector<std::pair<double, ChannelSpec>> components;  // mixture only; weights sum to 1

  static ChannelSpec identity() { return ChannelSpec{}; }

  static ChannelSpec pauli_rotation(const std::string& ax) {
    ChannelSpec s;
    s.kind = ChannelKind::PauliRotation;
    s.axis = ax;
    return s;
  }

  static ChannelSpec partial_dephasing(double q) {
    ChannelSpec s;
    s.kind = ChannelKind::PartialDephasing;
    s.params["q"] = q;
    return s;
  }

  static ChannelSpec partial_polarizer(double q, const std::string& ax = "H") {
    ChannelSpec s;
    s.kind = ChannelKind::PartialPolarizer;
    s.params["q"] = q;
    s.axis = ax;
    return s;
  }

  static ChannelSpec depolarizing(double p) {
    ChannelSpec s;
    s.kind = ChannelKind::Depolarizing;
    s.params["p"] = p;
    return s;
  }

  static ChannelSpec relaxation(double t, double t1, double t2) {
    ChannelSpec s;
    s.kind = ChannelKind::Relaxation;
    s.params["t"] = t;
    s.params["T1"] = t1;
    s.params["T2"] = t2;
    return s;
  }

  static ChannelSpec mixture(std::vector<std::pair<double, ChannelSpec>> parts) {
    ChannelSpec s;
    s.kind = ChannelKind::Mixture;
    s.components = std::move(parts);
    return s;
  }
};

struct Channel {
  ChiMatrix chi;
  KrausSet kraus;
};

namespace detail {

inline double require_param(const ChannelSpec& spec, const std::string& name) {
  auto it = spec.params.find(name);
  if (it == spec.params.end())
    throw std::invalid_argument(std::string(to_string(spec.kind)) + ": missing parameter '" +
                                name + "'");
  return it->second;
}

inline double require_probability(const ChannelSpec& spec, const std::string& name) {
  double v = require_param(spec, name);
  if (v < 0.0 || v > 1.0)
    throw std::invalid_argument(std::string(to_string(spec.kind)) + ": parameter '" + name +
                                "' = " + std::to_string(v) + " outside [0,1]");
  return v;
}

inline ComplexMatrix diag_chi(double c0, double c1, double c2, double c3) {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = c0;
  m(1, 1) = c1;
  m(2, 2) = c2;
  m(3, 3) = c3;
  return m;
}

// Bloch map x -> beta x, y -> beta y, z -> alpha z + (1 - alpha): decay toward |H>
// (the z = +1 pole). Built through the Choi state and converted to chi.
inline ChiMatrix relaxation_chi(double alpha, double beta) {
  if (alpha <= 0.0 || alpha > 1.0 || beta <= 0.0 || beta > 1.0)
    throw std::invalid_argument("relaxation: decay multipliers must lie in (0,1]");
  if (beta * beta > alpha + 1e-12)
    throw std::invalid_argument("relaxation: T2 > allowed bound violates complete positivity "
                                "(requires beta^2 <= alpha)");
  // Images of the matrix units |i><j| under the Bloch map.
  ComplexMatrix e00(2, 2), e01(2, 2), e10(2, 2), e11(2, 2);
  e00 << 1, 0, 0, 0;                   // fixed point
  e01 << 0, beta, 0, 0;                // coherences scale by beta
  e10 << 0, 0, beta, 0;
  e11 << 1.0 - alpha, 0, 0, alpha;     // population decays with survival alpha
  ComplexMatrix choi = ComplexMatrix::Zero(4, 4);
  choi.block(0, 0, 2, 2) = 0.5 * e00;
  choi.block(0, 2, 2, 2) = 0.5 * e01;
  choi.block(2, 0, 2, 2) = 0.5 * e10;
  choi.block(2, 2, 2, 2) = 0.5 * e11;
  return choi_to_chi(ChoiState(DensityMatrix::from_output(choi)));
}

inline ChiMatrix build_chi(const ChannelSpec& spec);

inline ChiMatrix mixture_chi(const ChannelSpec& spec) {
  if (spec.components.empty()) throw std::invalid_argument("mixture: no components");
  double total = 0.0;
  for (const auto& [w, sub] : spec.components) {
    if (w < 0.0) throw std::invalid_argument("mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("mixture: weights sum to " + std::to_string(total) +
                                ", expected 1");
  ComplexMatrix chi = ComplexMatrix::Zero(4, 4);
  for (const auto& [w, sub] : spec.components) chi += w * build_chi(sub).matrix;
  return ChiMatrix(chi);
}

inline ChiMatrix build_chi(const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelKind::Identity:
      return ChiMatrix(diag_chi(1, 0, 0, 0));
    case ChannelKind::PauliRotation: {
      std::string ax = spec.axis.empty() ? "z" : spec.axis;
      if (ax == "x") return ChiMatrix(diag_chi(0, 1, 0, 0));
      if (ax == "y") return ChiMatrix(diag_chi(0, 0, 1, 0));
      if (ax == "z") return ChiMatrix(diag_chi(0, 0, 0, 1));
      throw std::invalid_argument("pauli_rotation: axis must be x, y or z, got '" + ax + "'");
    }
    case ChannelKind::PartialDephasing: {
      // (1-q) identity + q full dephasing with Kraus {P_H, P_V}
      double q = require_probability(spec, "q");
      return ChiMatrix(diag_chi(1.0 - q / 2.0, 0, 0, q / 2.0));
    }
    case ChannelKind::PartialPolarizer: {
      // (1-q) identity + q single-Kraus projector; trace decreasing for q > 0
      double q = require_probability(spec, "q");
      std::string ax = spec.axis.empty() ? "H" : spec.axis;
      if (ax != "H" && ax != "V")
        throw std::invalid_argument("partial_polarizer: axis must be H or V, got '" + ax + "'");
      ComplexMatrix proj = projector(ket(ax == "H" ? Polarization::H : Polarization::V));
      ComplexMatrix chi =
          (1.0 - q) * diag_chi(1, 0, 0, 0) + q * kraus_to_chi(KrausSet({proj})).matrix;
      return ChiMatrix(chi);
    }
    case ChannelKind::Depolarizing: {
      // rho -> (1-p) rho + p Tr(rho) I/2
      double p = require_probability(spec, "p");
      return ChiMatrix(diag_chi(1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p));
    }
    case ChannelKind::Relaxation: {
      double t = require_param(spec, "t");
      double t1 = require_param(spec, "T1");
      double t2 = require_param(spec, "T2");
      if (t < 0.0) throw std::invalid_argument("relaxation: t must be non-negative");
      if (t1 <= 0.0 || t2 <= 0.0)
        throw std::invalid_argument("relaxation: T1 and T2 must be positive");
      if (t == 0.0) return ChiMatrix::identity();
      return relaxation_chi(std::exp(-t / t1), std::exp(-t / t2));
    }
    case ChannelKind::Mixture:
      return mixture_chi(spec);
  }
  throw std::logic_error("bad ChannelKind");
}

}  // namespace detail

inline Channel build_channel(const ChannelSpec& spec) {
  ChiMatrix chi = detail::build_chi(spec);
  return Channel{chi, chi_to_kraus(chi)};
}

struct ZooEntry {
  std::string name;   // fig3a .. fig3f
  std::string title;
  ChannelSpec spec;
};

// The six-process suite. Partial-process fractions and the relaxation time scale are
// artifact defaults; t = T1 ln 2 gives equal decay multipliers alpha = beta = 1/2.
inline std::vector<ZooEntry> channel_zoo() {
  const double ln2 = std::log(2.0);
  return {
      {"fig3a", "identity", ChannelSpec::identity()},
      {"fig3b", "sigma_z rotation", ChannelSpec::pauli_rotation("z")},
      {"fig3c", "partial dephasing", ChannelSpec::partial_dephasing(0.5)},
      {"fig3d", "partial polarizer", ChannelSpec::partial_polarizer(0.5)},
      {"fig3e", "depolarization", ChannelSpec::depolarizing(0.5)},
      {"fig3f", "relaxation", ChannelSpec::relaxation(ln2, 1.0, 1.0)},
  };
}

inline ChannelSpec zoo_preset(const std::string& name) {
  for (const auto& entry : channel_zoo())
    if (entry.name == name) return entry.spec;
  throw std::invalid_argument("unknown preset '" + name + "' (expected fig3a..fig3f)");
}

}  // namespace qpt
