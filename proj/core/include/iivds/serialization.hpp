#pragma once

// JSON forms of configs, reports and verification output. All writers emit
// objects with sorted keys so equal values serialize to equal bytes.

#include <string>

#include "iivds/iivds_sim.hpp"
#include "iivds/modal_logic.hpp"

namespace iivds {

/// Parses a SimConfig. Unknown fields, wrong types and invalid values are
/// rejected with Error(Configuration) naming the field.
SimConfig parse_config(const std::string& json_text);
std::string config_to_json(const SimConfig& config);

/// `include_runtime = false` omits the wall-clock field, leaving a byte
/// stream that depends only on config, seed and code version.
std::string report_to_json(const AggregateReport& report, bool include_runtime = true);
/// Reads the config echo back from a report.json.
SimConfig config_from_report(const std::string& report_json);

std::string summary_to_json(const Summary& summary);
std::string landscape_to_json(const LandscapeStats& stats);
std::string logic_to_json(const LogicEvaluation& logic);
LogicEvaluation logic_from_json(const std::string& json_text);
std::string liar_trace_to_json(const LiarTrace& trace);
std::string verification_to_json(const VerificationReport& report);

}  // namespace iivds
