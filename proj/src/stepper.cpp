#include "noisegate/stepper.hpp"

#include "noisegate/probdist.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace noisegate {
namespace {

// A residual sum of squares this small relative to sum y^2 is a perfect fit.
constexpr double kPerfectFitRelative = 1e-20;
// Nested fits may come out larger than the incumbent by rounding only.
constexpr double kNestedSlack = 1e-9;

std::vector<std::size_t> excluded_columns(std::size_t k, const std::vector<std::size_t>& included) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < k; ++j)
    if (std::find(included.begin(), included.end(), j) == included.end()) out.push_back(j);
  return out;
}

double clamp_nested(double before, double after) {
  if (after > before && after <= before + kNestedSlack * std::max(1.0, before)) return before;
  return after;
}

bool is_perfect_fit(double ss, const Dataset& dataset) {
  return ss <= kPerfectFitRelative * std::max(dataset.y().squaredNorm(), 1e-300);
}

MFitSummary fit_m_incumbent(const Dataset& dataset, const std::vector<std::size_t>& included,
                            const GateConfig& config, double sigma, const std::optional<RealVector>& start) {
  return m_fit_fixed_scale(assemble_design(dataset, included, config.intercept), dataset.y(), config.rho, sigma,
                           start);
}

RealVector zero_padded(const RealVector& v) {
  RealVector out = RealVector::Zero(v.size() + 1);
  out.head(v.size()) = v;
  return out;
}

CandidateScan scan_impl(const Dataset& dataset, const std::vector<std::size_t>& included,
                        const GateConfig& config, const std::optional<ScaleState>& scale,
                        const MFitSummary* incumbent) {
  const auto excluded = excluded_columns(dataset.k(), included);
  if (excluded.empty()) throw InvalidInputError("no excluded covariate left to scan");

  CandidateScan scan;
  StepEvaluation& ev = scan.evaluation;
  ev.k1 = included.size();
  ev.k0 = excluded.size();
  ev.step_index = included.size() + 1;

  std::vector<std::size_t> trial = included;
  trial.push_back(0);
  bool have = false;
  std::size_t best = 0;
  double best_loss = 0.0;

  if (config.method == Method::L2) {
    ev.ss_before = fit_least_squares(assemble_design(dataset, included, config.intercept), dataset.y()).ss;
    for (const std::size_t c : excluded) {
      trial.back() = c;
      const double ss = fit_least_squares(assemble_design(dataset, trial, config.intercept), dataset.y()).ss;
      if (!std::isfinite(ss)) continue;
      if (!have || ss < best_loss) {
        best = c;
        best_loss = ss;
        have = true;
      }
    }
    if (!have) throw DegenerateFitError("every candidate fit was degenerate");
    ev.ss_after = clamp_nested(ev.ss_before, best_loss);
    ev.statistic = l2_gate_statistic(ev.ss_before, ev.ss_after, dataset.n());
  } else {
    if (!scale) throw InvalidInputError("the M method needs a scale");
    const double sigma = scale->sigma;
    ev.sigma = sigma;
    MFitSummary local;
    if (incumbent == nullptr) {
      local = fit_m_incumbent(dataset, included, config, sigma, std::nullopt);
      incumbent = &local;
    }
    ev.ss_before = incumbent->objective;
    const RealVector start = zero_padded(incumbent->coefficients);
    for (const std::size_t c : excluded) {
      trial.back() = c;
      MFitSummary fit = fit_m_incumbent(dataset, trial, config, sigma, start);
      if (!std::isfinite(fit.objective)) continue;
      if (!have || fit.objective < best_loss) {
        best = c;
        best_loss = fit.objective;
        scan.chosen_m_fit = std::move(fit);
        have = true;
      }
    }
    if (!have) throw DegenerateFitError("every candidate fit was degenerate");
    scan.chosen_m_fit->objective = clamp_nested(ev.ss_before, scan.chosen_m_fit->objective);
    ev.ss_after = scan.chosen_m_fit->objective;
    ev.statistic = m_gate_statistic(ev.ss_before, *scan.chosen_m_fit);
  }

  ev.chosen_column = best;
  ev.chosen_covariate = dataset.column_names()[best];
  ev.p_value = step_p_value(ev.statistic, ev.k0);
  ev.included = ev.p_value < config.alpha;
  return scan;
}

template <class E>
[[noreturn]] void rethrow_with_trace(const E& error, const StepTrace& trace) {
  throw TracedError<E>(error, trace);
}

}  // namespace

void GateConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  noisegate::validate(rho);
  if (fixed_sigma && !(*fixed_sigma > 0.0)) throw InvalidInputError("a fixed sigma must be positive");
}

double l2_gate_statistic(double ss_before, double ss_after, std::size_t n) {
  if (n < 1) throw InvalidInputError("n must be at least 1");
  if (!(ss_before > 0.0)) throw DegenerateFitError("ss before the step is zero: the fit is already perfect");
  if (!(ss_after >= 0.0) || ss_after > ss_before)
    throw InvalidInputError("ss after the step must lie in [0, ss before]");
  return static_cast<double>(n) * (1.0 - ss_after / ss_before);
}

double m_gate_statistic(double objective_before, const MFitSummary& fit_after) {
  if (!(objective_before > 0.0)) throw DegenerateFitError("M objective before the step is zero");
  if (!(fit_after.s1 > 0.0)) throw DegenerateFitError("sum of squared rho' is zero");
  if (!(fit_after.s2 > 0.0)) throw DegenerateFitError("sum of rho'' is zero: every residual is on the linear branch");
  if (!(fit_after.objective >= 0.0) || fit_after.objective > objective_before)
    throw InvalidInputError("M objective after the step must lie in [0, objective before]");
  return 2.0 * (objective_before - fit_after.objective) * fit_after.s2 / fit_after.s1;
}

double step_p_value(double statistic, std::size_t k0) { return max_chisq_tail(statistic, k0); }

CandidateScan scan_candidates_detailed(const Dataset& dataset, const std::vector<std::size_t>& included,
                                       const GateConfig& config, const std::optional<ScaleState>& scale) {
  config.validate();
  return scan_impl(dataset, included, config, scale, nullptr);
}

StepEvaluation scan_candidates(const Dataset& dataset, const std::vector<std::size_t>& included,
                               const GateConfig& config, const std::optional<ScaleState>& scale) {
  return scan_candidates_detailed(dataset, included, config, scale).evaluation;
}

StepTrace run_stepwise(const Dataset& input, const GateConfig& config) {
  config.validate();
  const Dataset dataset = config.standardize && input.k() > 0 ? standardize_columns(input) : input;

  StepTrace trace;
  trace.config = config;
  const std::size_t k = dataset.k();
  const std::size_t max_steps = config.max_steps.value_or(k);
  std::vector<std::size_t> included;
  bool gate_failed = false;

  std::optional<ScaleState> scale;
  std::optional<MFitSummary> incumbent;

  auto finish = [&](Termination reason) {
    trace.termination_reason = gate_failed && reason != Termination::Degenerate ? Termination::GateFailed : reason;
    return trace;
  };

  try {
    if (k == 0) return finish(Termination::Exhausted);
    if (config.method == Method::M) {
      if (dataset.n() < 3) throw InvalidInputError("the M method needs at least three observations");
      if (config.fixed_sigma) {
        scale = ScaleState{*config.fixed_sigma, ScaleSource::L1Init};
      } else {
        scale = l1_single_covariate_init(dataset, config.intercept).scale;
      }
      incumbent = fit_m_incumbent(dataset, included, config, scale->sigma, std::nullopt);
    }

    while (true) {
      if (included.size() == k) return finish(Termination::Exhausted);
      if (trace.evaluations.size() >= max_steps) return finish(Termination::MaxSteps);

      const double ss_before =
          config.method == Method::L2
              ? fit_least_squares(assemble_design(dataset, included, config.intercept), dataset.y()).ss
              : incumbent->residuals.squaredNorm();
      if (is_perfect_fit(ss_before, dataset)) return finish(Termination::Degenerate);

      CandidateScan scan = scan_impl(dataset, included, config, scale, incumbent ? &*incumbent : nullptr);
      StepEvaluation ev = scan.evaluation;
      trace.evaluations.push_back(ev);
      if (ev.included && !gate_failed) {
        trace.selected.push_back(ev.chosen_covariate);
      } else {
        gate_failed = true;
        if (!config.exhaustive) return finish(Termination::GateFailed);
      }
      included.push_back(ev.chosen_column);

      if (config.method == Method::M) {
        // Residuals of the enlarged fit at the old scale give the new scale.
        if (!config.fixed_sigma) scale = ScaleState{mad_scale(scan.chosen_m_fit->residuals), ScaleSource::MadUpdate};
        incumbent = fit_m_incumbent(dataset, included, config, scale->sigma, scan.chosen_m_fit->coefficients);
      }
    }
  } catch (const DegenerateScaleError& e) {
    rethrow_with_trace(e, trace);
  } catch (const DegenerateFitError& e) {
    rethrow_with_trace(e, trace);
  } catch (const ConvergenceError& e) {
    rethrow_with_trace(e, trace);
  }
}

std::string_view to_string(Method method) { return method == Method::M ? "m" : "l2"; }

Method method_from_string(std::string_view name) {
  if (name == "l2" || name == "L2") return Method::L2;
  if (name == "m" || name == "M") return Method::M;
  throw InvalidInputError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Termination reason) {
  switch (reason) {
    case Termination::GateFailed: return "GateFailed";
    case Termination::Exhausted: return "Exhausted";
    case Termination::MaxSteps: return "MaxSteps";
    case Termination::Degenerate: return "Degenerate";
  }
  return "Exhausted";
}

Termination termination_from_string(std::string_view name) {
  for (auto t : {Termination::GateFailed, Termination::Exhausted, Termination::MaxSteps, Termination::Degenerate})
    if (to_string(t) == name) return t;
  throw InvalidInputError("unknown termination reason '" + std::string(name) + "'");
}

}  // namespace noisegate
