#pragma once

#include "qpt/process.hpp"

#include <array>
#include <utility>
#include <vector>

namespace qpt {

// One experimental configuration: prepare a probe state, analyze in one basis,
// record both orthogonal outcomes.
struct SqptConfig {
  int config_id = 0;
  Polarization input = Polarization::H;
  LocalBasis basis = LocalBasis::HV;
};

inline constexpr std::array<Polarization, 6> kSqptProbeOrder = {
    Polarization::H, Polarization::V, Polarization::D,
    Polarization::A, Polarization::L, Polarization::R};

// Full plan: 6 probes x 3 bases = 18 configurations. The minimal variant keeps the
// four probes {H, V, D, L}, which already span the state space: 4 x 3 = 12.
inline std::vector<SqptConfig> sqpt_plan(bool minimal = false) {
  std::vector<SqptConfig> plan;
  int id = 0;
  for (Polarization input : kSqptProbeOrder) {
    if (minimal && (input == Polarization::A || input == Polarization::R)) continue;
    for (LocalBasis basis : kAnalysisBasisOrder) plan.push_back({id++, input, basis});
  }
  return plan;
}

// p_i = Tr[Pi_i eps(rho_in)]; the pair sums to the output trace (below 1 under loss).
inline std::pair<double, double> sqpt_probabilities(const ChiMatrix& chi,
                                                    const SqptConfig& config) {
  DensityMatrix out = apply_chi(chi, pure_state(ket(config.input)));
  auto projs = basis_projectors(config.basis);
  return {(projs[0] * out.matrix).trace().real(), (projs[1] * out.matrix).trace().real()};
}

inline std::vector<std::pair<double, double>> sqpt_forward(const ChiMatrix& chi,
                                                           const std::vector<SqptConfig>& plan) {
  std::vector<std::pair<double, double>> table;
  table.reserve(plan.size());
  for (const auto& config : plan) table.push_back(sqpt_probabilities(chi, config));
  return table;
}

}  // namespace qpt
