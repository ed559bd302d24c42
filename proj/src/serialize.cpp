#include "noisegate/serialize.hpp"

#include "noisegate/errors.hpp"

#include <string>

namespace noisegate {
namespace {

using nlohmann::json;

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

}  // namespace

void to_json(json& j, const RhoFunction& rho) {
  j = json{{"family", std::string(to_string(rho.family))}, {"c", rho.c}};
}

void from_json(const json& j, RhoFunction& rho) {
  rho.family = rho_family_from_string(j.at("family").get<std::string>());
  rho.c = j.at("c").get<double>();
}

void to_json(json& j, const GateConfig& config) {
  j = json{{"alpha", config.alpha},
           {"method", std::string(to_string(config.method))},
           {"rho", config.rho},
           {"intercept", config.intercept},
           {"standardize", config.standardize},
           {"max_steps", optional_json(config.max_steps)},
           {"exhaustive", config.exhaustive},
           {"fixed_sigma", optional_json(config.fixed_sigma)}};
}

void from_json(const json& j, GateConfig& config) {
  config.alpha = j.at("alpha").get<double>();
  config.method = method_from_string(j.at("method").get<std::string>());
  config.rho = j.at("rho").get<RhoFunction>();
  config.intercept = j.at("intercept").get<bool>();
  config.standardize = j.at("standardize").get<bool>();
  config.max_steps = optional_from<std::size_t>(j, "max_steps");
  config.exhaustive = j.at("exhaustive").get<bool>();
  config.fixed_sigma = optional_from<double>(j, "fixed_sigma");
}

void to_json(json& j, const StepEvaluation& ev) {
  j = json{{"step_index", ev.step_index}, {"chosen_covariate", ev.chosen_covariate},
           {"chosen_column", ev.chosen_column}, {"k1", ev.k1},
           {"k0", ev.k0}, {"ss_before", ev.ss_before},
           {"ss_after", ev.ss_after}, {"statistic", ev.statistic},
           {"p_value", ev.p_value}, {"sigma", optional_json(ev.sigma)},
           {"included", ev.included}};
}

void from_json(const json& j, StepEvaluation& ev) {
  ev.step_index = j.at("step_index").get<std::size_t>();
  ev.chosen_covariate = j.at("chosen_covariate").get<std::string>();
  ev.chosen_column = j.at("chosen_column").get<std::size_t>();
  ev.k1 = j.at("k1").get<std::size_t>();
  ev.k0 = j.at("k0").get<std::size_t>();
  ev.ss_before = j.at("ss_before").get<double>();
  ev.ss_after = j.at("ss_after").get<double>();
  ev.statistic = j.at("statistic").get<double>();
  ev.p_value = j.at("p_value").get<double>();
  ev.sigma = optional_from<double>(j, "sigma");
  ev.included = j.at("included").get<bool>();
}

void to_json(json& j, const StepTrace& trace) {
  j = json{{"config", trace.config},
           {"evaluations", trace.evaluations},
           {"selected", trace.selected},
           {"termination_reason", std::string(to_string(trace.termination_reason))}};
}

void from_json(const json& j, StepTrace& trace) {
  trace.config = j.at("config").get<GateConfig>();
  trace.evaluations = j.at("evaluations").get<std::vector<StepEvaluation>>();
  trace.selected = j.at("selected").get<std::vector<std::string>>();
  trace.termination_reason = termination_from_string(j.at("termination_reason").get<std::string>());
}

void to_json(json& j, const SimReport& report) {
  j = json{{"experiment", report.experiment},
           {"inclusion_rate", report.inclusion_rate},
           {"p_value_histogram", report.p_value_histogram},
           {"ks_distance_chisq", report.ks_distance_chisq},
           {"replication_count", report.replication_count}};
}

void from_json(const json& j, SimReport& report) {
  report.experiment = j.at("experiment").get<std::string>();
  report.inclusion_rate = j.at("inclusion_rate").get<double>();
  report.p_value_histogram = j.at("p_value_histogram").get<std::vector<std::size_t>>();
  report.ks_distance_chisq = j.at("ks_distance_chisq").get<double>();
  report.replication_count = j.at("replication_count").get<std::size_t>();
}

bool operator==(const StepEvaluation& a, const StepEvaluation& b) {
  return a.step_index == b.step_index && a.chosen_covariate == b.chosen_covariate &&
         a.chosen_column == b.chosen_column && a.k1 == b.k1 && a.k0 == b.k0 && a.ss_before == b.ss_before &&
         a.ss_after == b.ss_after && a.statistic == b.statistic && a.p_value == b.p_value && a.sigma == b.sigma &&
         a.included == b.included;
}

bool operator==(const GateConfig& a, const GateConfig& b) {
  return a.alpha == b.alpha && a.method == b.method && a.rho.family == b.rho.family && a.rho.c == b.rho.c &&
         a.intercept == b.intercept && a.standardize == b.standardize && a.max_steps == b.max_steps &&
         a.exhaustive == b.exhaustive && a.fixed_sigma == b.fixed_sigma;
}

bool operator==(const StepTrace& a, const StepTrace& b) {
  return a.config == b.config && a.evaluations == b.evaluations && a.selected == b.selected &&
         a.termination_reason == b.termination_reason;
}

bool operator==(const SimReport& a, const SimReport& b) {
  return a.experiment == b.experiment && a.inclusion_rate == b.inclusion_rate &&
         a.p_value_histogram == b.p_value_histogram && a.ks_distance_chisq == b.ks_distance_chisq &&
         a.replication_count == b.replication_count;
}

}  // namespace noisegate
