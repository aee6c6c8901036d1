#pragma once

#include "qpt/process.hpp"

#include <charconv>
#include <optional>
#include <string>

namespace qpt {

// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Fixed experimental-configuration ledger quoted in every comparison record:
// 18-configuration (or minimal 12) SQPT against 4-configuration DCQD, plus the
// 45 configurations of the one-off systematic-error calibration.
struct ConfigurationLedger {
  int sqpt_full = 18;
  int sqpt_minimal = 12;
  int dcqd = 4;
  int dcqd_calibration = 45;
  int sqpt_minimal_to_dcqd_ratio = 3;
};

struct MethodComparison {
  double cross_fidelity = 0.0;             // F_J between the two reconstructions
  std::optional<double> a_vs_truth;
  std::optional<double> b_vs_truth;
  ConfigurationLedger ledger;
};

inline MethodComparison compare_methods(const ChiMatrix& a, const ChiMatrix& b,
                                        const std::optional<ChiMatrix>& truth = std::nullopt) {
  MethodComparison cmp;
  cmp.cross_fidelity = jamiolkowski_fidelity(a, b);
  if (truth) {
    cmp.a_vs_truth = jamiolkowski_fidelity(a, *truth);
    cmp.b_vs_truth = jamiolkowski_fidelity(b, *truth);
  }
  return cmp;
}

// 16 rows (m, n, |chi_mn|, Re, Im) in row-major order; CSV with a header row.
inline std::string emit_chi_plot_data(const ChiMatrix& chi) {
  std::string csv = "m,n,abs,re,im\n";
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      Complex v = chi.matrix(m, n);
      csv += std::to_string(m);
      csv += ',';
      csv += std::to_string(n);
      csv += ',';
      csv += format_double(std::abs(v));
      csv += ',';
      csv += format_double(v.real());
      csv += ',';
      csv += format_double(v.imag());
      csv += '\n';
    }
  return csv;
}

}  // namespace qpt
