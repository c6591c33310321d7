#include "iivds/serialization.hpp"

#include <json.hpp>

#include "iivds/error.hpp"

namespace iivds {

using nlohmann::json;

namespace {

constexpr int kIndent = 2;

[[noreturn]] void field_error(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::Configuration, "config field '" + field + "': " + message);
}

std::uint64_t get_unsigned(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) field_error(field, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint32_t get_u32(const json& v, const std::string& field) {
  const auto x = get_unsigned(v, field);
  if (x > 0xFFFFFFFFULL) field_error(field, "value out of range");
  return static_cast<std::uint32_t>(x);
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected a number");
  return v.get<double>();
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json interval_json(const SafetyInterval& si) {
  return {{"a", si.a},
          {"b", si.b},
          {"width", si.width()},
          {"derivation",
           si.derivation == IntervalDerivation::Statistical ? "statistical" : "configured"}};
}

SafetyInterval interval_from(const json& j) {
  SafetyInterval si;
  si.a = j.at("a").get<double>();
  si.b = j.at("b").get<double>();
  si.derivation = j.at("derivation").get<std::string>() == "configured"
                      ? IntervalDerivation::Configured
                      : IntervalDerivation::Statistical;
  return si;
}

json three_valent_json(const ThreeValentConfig& c) { return {{"e1", c.e1}, {"e2", c.e2}}; }

json config_json(const SimConfig& c) {
  json j;
  j["num_terminals"] = c.num_terminals;
  j["num_identities"] = c.num_identities;
  j["samples_per_identity"] = c.samples_per_identity;
  j["codes_per_enrollment"] = c.codes_per_enrollment;
  j["flip_probability"] = c.flip_probability;
  j["master_seed"] = c.master_seed;
  j["explosion"] = c.explosion ? json{{"fraction", c.explosion->fraction},
                                      {"center", c.explosion->center},
                                      {"half_width", c.explosion->half_width}}
                               : json(nullptr);
  j["bin_count"] = c.bin_count;
  j["epsilon"] = c.epsilon;
  j["quorum"] = c.quorum;
  j["logic"] = std::string(logic_name(c.logic));
  j["three_valent"] = c.three_valent ? three_valent_json(*c.three_valent) : json(nullptr);
  j["checkpoints"] = c.checkpoints;
  j["trend_window"] = c.trend_window;
  return j;
}

SimConfig config_from(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, "config must be a JSON object");
  SimConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "num_terminals") {
      c.num_terminals = get_u32(v, key);
    } else if (key == "num_identities") {
      c.num_identities = get_u32(v, key);
    } else if (key == "samples_per_identity") {
      c.samples_per_identity = get_u32(v, key);
    } else if (key == "codes_per_enrollment") {
      c.codes_per_enrollment = get_u32(v, key);
    } else if (key == "flip_probability") {
      c.flip_probability = get_number(v, key);
    } else if (key == "master_seed") {
      c.master_seed = get_unsigned(v, key);
    } else if (key == "explosion") {
      if (v.is_null()) {
        c.explosion.reset();
        continue;
      }
      if (!v.is_object()) field_error(key, "expected an object or null");
      ExplosionParams e;
      for (const auto& [k2, v2] : v.items()) {
        const std::string name = "explosion." + k2;
        if (k2 == "fraction") {
          e.fraction = get_number(v2, name);
        } else if (k2 == "center") {
          e.center = get_number(v2, name);
        } else if (k2 == "half_width") {
          e.half_width = get_number(v2, name);
        } else {
          field_error(name, "unknown field");
        }
      }
      c.explosion = e;
    } else if (key == "bin_count") {
      c.bin_count = get_u32(v, key);
    } else if (key == "epsilon") {
      c.epsilon = get_number(v, key);
    } else if (key == "quorum") {
      c.quorum = get_u32(v, key);
    } else if (key == "logic") {
      if (!v.is_string()) field_error(key, "expected a string");
      const auto parsed = parse_logic(v.get<std::string>());
      if (!parsed) field_error(key, "expected \"eight_valent\" or \"three_valent\"");
      c.logic = *parsed;
    } else if (key == "three_valent") {
      if (v.is_null()) {
        c.three_valent.reset();
        continue;
      }
      if (!v.is_object()) field_error(key, "expected an object or null");
      ThreeValentConfig tv;
      for (const auto& [k2, v2] : v.items()) {
        const std::string name = "three_valent." + k2;
        if (k2 == "e1") {
          tv.e1 = get_number(v2, name);
        } else if (k2 == "e2") {
          tv.e2 = get_number(v2, name);
        } else {
          field_error(name, "unknown field");
        }
      }
      c.three_valent = tv;
    } else if (key == "checkpoints") {
      if (!v.is_array()) field_error(key, "expected an array of integers");
      c.checkpoints.clear();
      for (const auto& x : v) c.checkpoints.push_back(get_u32(x, key));
    } else if (key == "trend_window") {
      c.trend_window = get_u32(v, key);
    } else {
      field_error(key, "unknown field");
    }
  }
  c.validate();
  return c;
}

json grammar_json(const Grammar& g) {
  json params = std::holds_alternative<SafetyInterval>(g.logic_params)
                    ? interval_json(std::get<SafetyInterval>(g.logic_params))
                    : three_valent_json(std::get<ThreeValentConfig>(g.logic_params));
  return {{"quorum", g.quorum},
          {"codes_per_enrollment", g.codes_per_enrollment},
          {"similarity_rule", g.similarity_rule},
          {"logic_choice", std::string(logic_name(g.logic_choice))},
          {"logic_params", params},
          {"version", g.version}};
}

json fit_json(const std::optional<TailFit>& fit) {
  if (!fit) return nullptr;
  return {{"slope", fit->slope},
          {"intercept", fit->intercept},
          {"max_residual", fit->max_residual},
          {"points", fit->points}};
}

json stats_json(const LandscapeStats& s) {
  return {{"genuine_total", s.genuine_total},
          {"imposter_total", s.imposter_total},
          {"genuine_in_O", s.genuine_in_O},
          {"imposter_in_O", s.imposter_in_O},
          {"undecidable_percent", s.undecidable_percent},
          {"honest_positive_undecidable_percent", s.honest_positive_undecidable_percent},
          {"honest_negative_undecidable_percent", s.honest_negative_undecidable_percent},
          {"absolute_safety_count", s.absolute_safety_count},
          {"absolute_safety_fraction", s.absolute_safety_fraction},
          {"safety_interval", interval_json(s.safety_interval)},
          {"width", s.width}};
}

json trace_json(const LiarTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"index", s.index},
                     {"kind", std::string(step_kind_name(s.kind))},
                     {"statement", s.statement},
                     {"depends_on", s.depends_on},
                     {"assigns", s.assigns ? json{{"proposition", s.assigns->first},
                                                  {"value", s.assigns->second}}
                                           : json(nullptr)}});
  }
  return {{"score", trace.score},
          {"inconsistent", trace.inconsistent},
          {"verdict", trace.inconsistent ? "inconsistent" : "consistent"},
          {"steps", steps}};
}

LiarTrace trace_from(const json& j) {
  LiarTrace t;
  t.score = j.at("score").get<double>();
  t.inconsistent = j.at("inconsistent").get<bool>();
  for (const auto& s : j.at("steps")) {
    DerivationStep step;
    step.index = s.at("index").get<int>();
    const auto kind = s.at("kind").get<std::string>();
    for (auto k : {StepKind::Premise, StepKind::Bivalence, StepKind::EpSupport,
                   StepKind::Identification}) {
      if (step_kind_name(k) == kind) step.kind = k;
    }
    step.statement = s.at("statement").get<std::string>();
    step.depends_on = s.at("depends_on").get<std::vector<int>>();
    if (!s.at("assigns").is_null()) {
      step.assigns = std::make_pair(s["assigns"].at("proposition").get<std::string>(),
                                    s["assigns"].at("value").get<bool>());
    }
    t.steps.push_back(std::move(step));
  }
  return t;
}

json logic_json(const LogicEvaluation& l) {
  json j{{"logic", std::string(logic_name(l.logic))}, {"verdict", l.verdict}};
  if (l.logic == LogicChoice::EightValent) {
    j["interval"] = l.interval ? interval_json(*l.interval) : json(nullptr);
    j["f0_mass"] = l.f0_mass;
    j["fu_mass"] = l.fu_mass;
    j["f1_mass"] = l.f1_mass;
    j["pa_na_count"] = l.pa_na_count;
  } else {
    j["three_valent"] = l.three_valent ? three_valent_json(*l.three_valent) : json(nullptr);
    j["ep_count"] = l.ep_count;
    j["liar_trace"] = l.sample_trace ? trace_json(*l.sample_trace) : json(nullptr);
  }
  return j;
}

json summary_json(const Summary& s) {
  return {{"epsilon", s.epsilon},
          {"a", opt(s.a)},
          {"b", opt(s.b)},
          {"width", opt(s.width)},
          {"undecidable_percent", opt(s.undecidable_percent)},
          {"honest_positive_undecidable_percent", opt(s.honest_positive_undecidable_percent)},
          {"honest_negative_undecidable_percent", opt(s.honest_negative_undecidable_percent)},
          {"landscape_error", s.landscape_error},
          {"absolute_safety_fraction", s.absolute_safety_fraction},
          {"absolute_safety_count", s.absolute_safety_count},
          {"absolute_safety_calibrated", s.absolute_safety_calibrated},
          {"absolute_safety_target", s.absolute_safety_target},
          {"genuine_total", s.genuine_total},
          {"imposter_total", s.imposter_total},
          {"logic", s.logic ? logic_json(*s.logic) : json(nullptr)}};
}

json parse_or_throw(const std::string& text, ErrorKind kind) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(kind, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

SimConfig parse_config(const std::string& json_text) {
  return config_from(parse_or_throw(json_text, ErrorKind::Configuration));
}

std::string config_to_json(const SimConfig& config) { return config_json(config).dump(kIndent); }

std::string report_to_json(const AggregateReport& r, bool include_runtime) {
  json j;
  j["tool_version"] = r.tool_version;
  j["config"] = config_json(r.config);
  j["grammar"] = grammar_json(r.grammar);
  j["cu_theory"] = {{"identities", r.cu_theory_identities},
                    {"mean_mask_bits", r.cu_theory_mean_mask_bits}};
  j["totals"] = {{"genuine", r.genuine.total()}, {"imposter", r.imposter.total()}};
  json cps = json::array();
  for (const auto& cp : r.checkpoints) {
    cps.push_back({{"terminals", cp.terminals},
                   {"genuine_total", cp.genuine.total()},
                   {"imposter_total", cp.imposter.total()},
                   {"eer", opt(cp.eer)}});
  }
  j["checkpoints"] = cps;
  j["curve"] = {{"bin_count", r.curve.bin_count},
                {"trend_window", r.curve.trend_window},
                {"last_positive_far", opt(r.curve.last_positive_far)},
                {"first_positive_frr", opt(r.curve.first_positive_frr)},
                {"pofa_fit", fit_json(r.curve.pofa_fit)},
                {"pofr_fit", fit_json(r.curve.pofr_fit)},
                {"pofa_unavailable", r.curve.pofa_unavailable},
                {"pofr_unavailable", r.curve.pofr_unavailable}};
  j["safety_interval"] = r.safety_interval ? interval_json(*r.safety_interval) : json(nullptr);
  j["landscape_error"] = r.landscape_error;
  j["landscape"] = r.stats ? stats_json(*r.stats) : json(nullptr);
  j["absolute_safety"] = {{"count", r.safety.count},
                          {"fraction", r.safety.fraction},
                          {"calibrated", true},
                          {"target", kAbsoluteSafetyTarget}};
  j["eer_interval"] = r.eer ? json{{"lo", r.eer->lo},
                                   {"hi", r.eer->hi},
                                   {"crossings", r.eer->crossings},
                                   {"excluded", r.eer->excluded}}
                            : json(nullptr);
  j["logic"] = r.logic.verdict.empty() ? json(nullptr) : logic_json(r.logic);
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"terminal_id", f.terminal_id}, {"message", f.message}});
  }
  j["failures"] = failures;
  if (include_runtime) j["runtime_seconds"] = r.runtime_seconds;
  return j.dump(kIndent);
}

SimConfig config_from_report(const std::string& report_json) {
  const auto j = parse_or_throw(report_json, ErrorKind::Schema);
  if (!j.is_object() || !j.contains("config")) {
    throw Error(ErrorKind::Schema, "report has no config section");
  }
  return config_from(j["config"]);
}

std::string summary_to_json(const Summary& summary) { return summary_json(summary).dump(kIndent); }

std::string landscape_to_json(const LandscapeStats& stats) { return stats_json(stats).dump(kIndent); }

std::string logic_to_json(const LogicEvaluation& logic) { return logic_json(logic).dump(kIndent); }

LogicEvaluation logic_from_json(const std::string& json_text) {
  const auto j = parse_or_throw(json_text, ErrorKind::Schema);
  try {
    LogicEvaluation l;
    const auto choice = parse_logic(j.at("logic").get<std::string>());
    if (!choice) throw Error(ErrorKind::Schema, "decision: unknown logic");
    l.logic = *choice;
    l.verdict = j.at("verdict").get<std::string>();
    if (l.logic == LogicChoice::EightValent) {
      if (!j.at("interval").is_null()) l.interval = interval_from(j["interval"]);
      l.f0_mass = j.at("f0_mass").get<std::uint64_t>();
      l.fu_mass = j.at("fu_mass").get<std::uint64_t>();
      l.f1_mass = j.at("f1_mass").get<std::uint64_t>();
      l.pa_na_count = j.at("pa_na_count").get<std::uint64_t>();
    } else {
      if (!j.at("three_valent").is_null()) {
        l.three_valent = ThreeValentConfig{j["three_valent"].at("e1").get<double>(),
                                           j["three_valent"].at("e2").get<double>()};
      }
      l.ep_count = j.at("ep_count").get<std::uint64_t>();
      if (!j.at("liar_trace").is_null()) l.sample_trace = trace_from(j["liar_trace"]);
    }
    return l;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("decision: ") + e.what());
  }
}

std::string liar_trace_to_json(const LiarTrace& trace) { return trace_json(trace).dump(kIndent); }

std::string verification_to_json(const VerificationReport& report) {
  json laws = json::array();
  for (const auto& l : report.laws) {
    laws.push_back({{"law_name", l.law},
                    {"holds", l.holds},
                    {"cases", l.cases},
                    {"counterexample", l.counterexample ? json(*l.counterexample) : json(nullptr)}});
  }
  return json{{"all_hold", report.all_hold()}, {"failures", report.failures()}, {"laws", laws}}
      .dump(kIndent);
}

}  // namespace iivds
