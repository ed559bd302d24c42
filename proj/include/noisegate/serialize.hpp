#pragma once

// JSON shapes of the records the CLI emits. Field names follow the struct
// members; enums are lower-case strings ("l2", "m", "logcosh", "huber") except
// the termination reason, which keeps its enumerator name. An unset optional
// is written as null.

#include "noisegate/simlab.hpp"
#include "noisegate/stepper.hpp"

#include <json.hpp>

namespace noisegate {

void to_json(nlohmann::json& j, const RhoFunction& rho);
void from_json(const nlohmann::json& j, RhoFunction& rho);

void to_json(nlohmann::json& j, const GateConfig& config);
void from_json(const nlohmann::json& j, GateConfig& config);

void to_json(nlohmann::json& j, const StepEvaluation& ev);
void from_json(const nlohmann::json& j, StepEvaluation& ev);

void to_json(nlohmann::json& j, const StepTrace& trace);
void from_json(const nlohmann::json& j, StepTrace& trace);

void to_json(nlohmann::json& j, const SimReport& report);
void from_json(const nlohmann::json& j, SimReport& report);

bool operator==(const StepEvaluation& a, const StepEvaluation& b);
bool operator==(const GateConfig& a, const GateConfig& b);
bool operator==(const StepTrace& a, const StepTrace& b);
bool operator==(const SimReport& a, const SimReport& b);

}  // namespace noisegate
