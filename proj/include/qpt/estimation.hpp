#pragma once

#include "qpt/process.hpp"
#include "qpt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace qpt {

// --------------------------------------------------------------------------
// Hermitian parameterization shared by linear inversion and the calibration
// solver: dim*dim real parameters ordered [diagonals | Re upper | Im upper].
// --------------------------------------------------------------------------

inline int hermitian_param_count(int dim) { return dim * dim; }

inline ComplexMatrix hermitian_from_params(const Eigen::VectorXd& x, int dim) {
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  int idx = 0;
  for (int m = 0; m < dim; ++m) h(m, m) = x(idx++);
  for (int m = 0; m < dim; ++m)
    for (int n = m + 1; n < dim; ++n) {
      h(m, n) += x(idx);
      h(n, m) += x(idx);
      ++idx;
    }
  for (int m = 0; m < dim; ++m)
    for (int n = m + 1; n < dim; ++n) {
      h(m, n) += Complex(0.0, x(idx));
      h(n, m) -= Complex(0.0, x(idx));
      ++idx;
    }
  return h;
}

inline Eigen::VectorXd hermitian_to_params(const ComplexMatrix& h) {
  int dim = static_cast<int>(h.rows());
  Eigen::VectorXd x(hermitian_param_count(dim));
  int idx = 0;
  for (int m = 0; m < dim; ++m) x(idx++) = h(m, m).real();
  for (int m = 0; m < dim; ++m)
    for (int n = m + 1; n < dim; ++n) x(idx++) = h(m, n).real();
  for (int m = 0; m < dim; ++m)
    for (int n = m + 1; n < dim; ++n) x(idx++) = h(m, n).imag();
  return x;
}

// --------------------------------------------------------------------------
// Likelihood model: every supported reconstruction (QST, SQPT, DCQD, with or
// without calibration) reduces to outcome probabilities linear in a Hermitian
// PSD unknown, p_i = <coefficient_i, X>, with Poisson counts at rate budget*p.
// --------------------------------------------------------------------------

struct OutcomeTerm {
  ComplexMatrix coefficient;  // Hermitian, same dim as the unknown
  double count = 0.0;
  double budget = 1.0;
};

struct LikelihoodModel {
  int dim = 4;                  // unknown is dim x dim
  std::vector<OutcomeTerm> terms;
  bool normalize_trace = false;  // QST: estimate is T^dag T / Tr(T^dag T)

  void validate() const {
    if (terms.empty()) throw std::invalid_argument("LikelihoodModel: no outcome terms");
    for (const auto& t : terms) {
      require_dim(t.coefficient, dim, "LikelihoodModel coefficient");
      if (t.count < 0.0) throw std::invalid_argument("LikelihoodModel: negative count");
      if (t.budget <= 0.0) throw std::invalid_argument("LikelihoodModel: budget must be positive");
    }
  }

  double mean_budget() const {
    double s = 0.0;
    for (const auto& t : terms) s += t.budget;
    return s / static_cast<double>(terms.size());
  }
};

struct EstimationOptions {
  double tolerance = 1e-10;      // relative NLL change at exit
  int max_iterations = 5000;
  bool trace_preserving = false;  // quadratic penalty toward sum chi_mn sigma_n sigma_m = I
  double penalty_scale = 1e3;     // lambda = penalty_scale * mean budget
  double probability_floor = 1e-12;
  int bootstrap_resamples = 0;    // 0 disables the bootstrap
  std::uint64_t seed = 0;         // drives only the bootstrap resampling
};

struct BootstrapSummary {
  double fidelity_mean = 0.0;    // F_J of resampled estimates against the point estimate
  double fidelity_stddev = 0.0;
  int resamples = 0;
  int excluded = 0;              // non-converged resamples, dropped from the summary
};

struct PoissonNll {
  double value = 0.0;
  bool floored = false;  // some outcome hit the probability floor with a nonzero count
};

struct ReconstructionResult {
  ChiMatrix chi;
  double nll = 0.0;
  int iterations = 0;
  bool converged = false;
  bool floor_applied = false;
  std::optional<BootstrapSummary> bootstrap;
};

struct QstResult {
  DensityMatrix state;
  double nll = 0.0;
  int iterations = 0;
  bool converged = false;
};

// --------------------------------------------------------------------------
// Linear inversion (least squares, no physicality constraint)
// --------------------------------------------------------------------------

// Solve values_i = <coefficients_i, X> for Hermitian X. Throws when the design
// is rank deficient, naming the null-space dimension.
inline ComplexMatrix linear_inversion(const std::vector<ComplexMatrix>& coefficients,
                                      const std::vector<double>& values, int dim) {
  if (coefficients.size() != values.size())
    throw std::invalid_argument("linear_inversion: coefficient/value size mismatch");
  const int nparams = hermitian_param_count(dim);
  const int rows = static_cast<int>(coefficients.size());
  Eigen::MatrixXd design(rows, nparams);
  for (int r = 0; r < rows; ++r) {
    const ComplexMatrix& a = coefficients[r];
    require_dim(a, dim, "linear_inversion coefficient");
    int idx = 0;
    for (int m = 0; m < dim; ++m) design(r, idx++) = a(m, m).real();
    for (int m = 0; m < dim; ++m)
      for (int n = m + 1; n < dim; ++n) design(r, idx++) = 2.0 * a(m, n).real();
    for (int m = 0; m < dim; ++m)
      for (int n = m + 1; n < dim; ++n) design(r, idx++) = -2.0 * a(m, n).imag();
  }
  // JacobiSVD: these designs are small (at most ~144 x 16) and BDCSVD loses
  // accuracy on their clustered singular values.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  if (svd.rank() < nparams)
    throw std::invalid_argument("linear_inversion: under-determined design, null-space dimension " +
                                std::to_string(nparams - svd.rank()));
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(values.data(), rows);
  return hermitian_from_params(svd.solve(rhs), dim);
}

// --------------------------------------------------------------------------
// Poisson maximum likelihood over X = T^dag T with T complex lower triangular,
// quasi-second-order (BFGS) descent with backtracking line search.
// --------------------------------------------------------------------------

namespace detail {

// Lower-triangular parameter layout: d real diagonals, then (Re, Im) per strict
// lower entry in row-major order; d^2 real parameters in total.
inline int cholesky_param_count(int dim) { return dim * dim; }

inline ComplexMatrix cholesky_from_params(const Eigen::VectorXd& x, int dim) {
  ComplexMatrix t = ComplexMatrix::Zero(dim, dim);
  int idx = 0;
  for (int i = 0; i < dim; ++i) t(i, i) = x(idx++);
  for (int i = 1; i < dim; ++i)
    for (int j = 0; j < i; ++j) {
      t(i, j) = Complex(x(idx), x(idx + 1));
      idx += 2;
    }
  return t;
}

class PsdFitProblem {
 public:
  PsdFitProblem(const LikelihoodModel& model, const EstimationOptions& options)
      : model_(model),
        floor_(options.probability_floor),
        tp_lambda_(options.trace_preserving ? options.penalty_scale * model.mean_budget() : 0.0) {
    if (options.trace_preserving && model.normalize_trace)
      throw std::invalid_argument("trace_preserving penalty applies to process fits only");
    if (options.trace_preserving && model.dim != 4)
      throw std::invalid_argument("trace_preserving penalty requires a 4x4 chi unknown");
    // The optimizer works on the objective divided by the total budget, which keeps
    // gradients O(1) regardless of count scale; reported NLL values are scaled back.
    for (const auto& t : model.terms) scale_ += t.budget;
  }

  double objective_scale() const { return scale_; }

  int param_count() const { return cholesky_param_count(model_.dim); }

  // T = scaled identity: X0 = I/dim (unit trace; exactly trace preserving for chi).
  Eigen::VectorXd initial_point() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(param_count());
    double c = 1.0 / std::sqrt(static_cast<double>(model_.dim));
    for (int i = 0; i < model_.dim; ++i) x(i) = c;
    return x;
  }

  ComplexMatrix estimate_from(const Eigen::VectorXd& x) const {
    ComplexMatrix t = cholesky_from_params(x, model_.dim);
    ComplexMatrix u = t.adjoint() * t;
    if (model_.normalize_trace) {
      double tr = u.trace().real();
      if (tr > 1e-100) u /= tr;
    }
    return u;
  }

  // Negative log likelihood sum_i [R_i - n_i ln R_i] with R_i = budget * p_i,
  // plus the trace-preservation penalty when enabled. Fills the gradient with
  // respect to the T parameters when grad is non-null.
  PoissonNll evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const int dim = model_.dim;
    ComplexMatrix t = cholesky_from_params(x, dim);
    ComplexMatrix u = t.adjoint() * t;  // unnormalized PSD unknown
    double tr = u.trace().real();
    ComplexMatrix est = u;
    if (model_.normalize_trace) {
      if (tr < 1e-100) {
        // Degenerate all-zero point; push back toward the interior.
        if (grad) grad->setZero(param_count());
        return {1e100, false};
      }
      est /= tr;
    }

    PoissonNll out;
    // W = dNLL/d(est) as a formal full-matrix derivative; mapped to dNLL/dU below.
    ComplexMatrix w = ComplexMatrix::Zero(dim, dim);
    for (const auto& term : model_.terms) {
      double p = (term.coefficient.array() * est.array()).sum().real();
      bool at_floor = p < floor_;
      if (at_floor) {
        if (term.count > 0.0) out.floored = true;
        p = floor_;
      }
      double rate = term.budget * p;
      out.value += rate - term.count * std::log(rate);
      if (grad && !at_floor) w += (term.budget - term.count / p) * term.coefficient;
    }

    if (tp_lambda_ > 0.0) {
      ComplexMatrix s = process_trace_operator(ChiMatrix(est));
      ComplexMatrix d = s - ComplexMatrix::Identity(2, 2);
      out.value += tp_lambda_ * d.squaredNorm();
      if (grad) {
        const auto& prod = detail_pauli_products();
        for (int m = 0; m < 4; ++m)
          for (int n = 0; n < 4; ++n) w(m, n) += 2.0 * tp_lambda_ * (d * prod[n][m]).trace();
      }
    }

    out.value /= scale_;
    w /= scale_;

    if (grad) {
      // Chain through the normalization, then through U = T^dag T.
      ComplexMatrix wu = w;
      if (model_.normalize_trace) {
        double inner = (w.array() * u.array()).sum().real();
        wu = (w - (inner / tr) * ComplexMatrix::Identity(dim, dim)) / tr;
      }
      ComplexMatrix m = wu.transpose() * t.adjoint();  // G T^dag with G = W^T
      grad->resize(param_count());
      int idx = 0;
      for (int i = 0; i < dim; ++i) (*grad)(idx++) = 2.0 * m(i, i).real();
      for (int i = 1; i < dim; ++i)
        for (int j = 0; j < i; ++j) {
          (*grad)(idx++) = 2.0 * m(j, i).real();
          (*grad)(idx++) = -2.0 * m(j, i).imag();
        }
    }
    return out;
  }

 private:
  static const std::array<std::array<ComplexMatrix, 4>, 4>& detail_pauli_products() {
    return qpt::detail::pauli_products();
  }

  const LikelihoodModel& model_;
  double floor_;
  double tp_lambda_;
  double scale_ = 0.0;
};

struct FitOutput {
  ComplexMatrix estimate;
  double nll = 0.0;
  int iterations = 0;
  bool converged = false;
  bool floored = false;
};

// BFGS with Armijo backtracking. Deterministic given the model and options.
inline FitOutput fit_psd(const LikelihoodModel& model, const EstimationOptions& options) {
  model.validate();
  PsdFitProblem problem(model, options);
  const int n = problem.param_count();

  Eigen::VectorXd x = problem.initial_point();
  Eigen::VectorXd g(n);
  PoissonNll fx = problem.evaluate(x, &g);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool first_update = true;

  FitOutput out;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::VectorXd dir = -(h * g);
    double slope = g.dot(dir);
    if (slope >= 0.0) {  // stale curvature; fall back to steepest descent
      h.setIdentity();
      dir = -g;
      slope = g.dot(dir);
      if (slope >= 0.0) break;  // gradient numerically zero
    }

    double step = 1.0;
    Eigen::VectorXd xn;
    PoissonNll fn;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * dir;
      fn = problem.evaluate(xn, nullptr);
      if (fn.value <= fx.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd gn(n);
    fn = problem.evaluate(xn, &gn);
    double rel = std::abs(fx.value - fn.value) / (std::abs(fx.value) + 1.0);

    Eigen::VectorXd s = xn - x;
    Eigen::VectorXd y = gn - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first_update) {  // initial metric from the first curvature pair
        h *= sy / y.squaredNorm();
        first_update = false;
      }
      Eigen::VectorXd hy = h * y;
      double yhy = y.dot(hy);
      h += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
           (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    x = xn;
    fx = fn;
    g = gn;
    if (rel < options.tolerance) {
      out.converged = true;
      ++iter;
      break;
    }
  }

  out.estimate = problem.estimate_from(x);
  out.nll = fx.value * problem.objective_scale();
  out.iterations = iter;
  out.floored = fx.floored;
  return out;
}

}  // namespace detail

inline ReconstructionResult mle_qpt(const LikelihoodModel& model,
                                    const EstimationOptions& options = {});

namespace detail {

inline BootstrapSummary bootstrap_fidelity(const LikelihoodModel& model,
                                           const EstimationOptions& options,
                                           const ChiMatrix& reference) {
  if (options.bootstrap_resamples < 2)
    throw std::invalid_argument("bootstrap: need at least 2 resamples");
  CountSampler sampler(derive_seed(options.seed, 0x626f6f74ULL));
  EstimationOptions inner = options;
  inner.bootstrap_resamples = 0;
  BootstrapSummary summary;
  std::vector<double> fids;
  fids.reserve(options.bootstrap_resamples);
  LikelihoodModel resampled = model;
  for (int b = 0; b < options.bootstrap_resamples; ++b) {
    for (std::size_t i = 0; i < model.terms.size(); ++i)
      resampled.terms[i].count =
          static_cast<double>(sampler.poisson(model.terms[i].count));
    FitOutput fit = fit_psd(resampled, inner);
    if (!fit.converged) {
      ++summary.excluded;
      continue;
    }
    fids.push_back(jamiolkowski_fidelity(ChiMatrix(fit.estimate), reference));
  }
  summary.resamples = static_cast<int>(fids.size());
  if (summary.resamples == 0) return summary;
  double mean = 0.0;
  for (double f : fids) mean += f;
  mean /= summary.resamples;
  double var = 0.0;
  for (double f : fids) var += (f - mean) * (f - mean);
  var /= summary.resamples;
  summary.fidelity_mean = mean;
  summary.fidelity_stddev = std::sqrt(var);
  return summary;
}

}  // namespace detail

// Process-matrix maximum likelihood; chi = T^dag T is PSD by construction.
inline ReconstructionResult mle_qpt(const LikelihoodModel& model,
                                    const EstimationOptions& options) {
  if (model.dim != 4 || model.normalize_trace)
    throw std::invalid_argument("mle_qpt: expected an unnormalized 4x4 chi model");
  detail::FitOutput fit = detail::fit_psd(model, options);
  ReconstructionResult result;
  result.chi = ChiMatrix(fit.estimate);
  result.nll = fit.nll;
  result.iterations = fit.iterations;
  result.converged = fit.converged;
  result.floor_applied = fit.floored;
  if (options.bootstrap_resamples > 0)
    result.bootstrap = detail::bootstrap_fidelity(model, options, result.chi);
  return result;
}

// State maximum likelihood; unit trace via normalization of T^dag T.
inline QstResult mle_qst(const LikelihoodModel& model, const EstimationOptions& options = {}) {
  if (!model.normalize_trace)
    throw std::invalid_argument("mle_qst: model must set normalize_trace");
  EstimationOptions opts = options;
  opts.trace_preserving = false;
  detail::FitOutput fit = detail::fit_psd(model, opts);
  QstResult result;
  result.state = DensityMatrix::from_output(fit.estimate);
  result.nll = fit.nll;
  result.iterations = fit.iterations;
  result.converged = fit.converged;
  return result;
}

}  // namespace qpt
