#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "iivds/error.hpp"
#include "iivds/iivds_sim.hpp"
#include "iivds/serialization.hpp"

namespace iivds::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v, const char* format = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

struct Results {
  fs::path dir;
  SimConfig config;
  ScoreHistogram genuine{ScoreKind::Genuine};
  ScoreHistogram imposter{ScoreKind::Imposter};
};

Results load_results(const fs::path& dir) {
  Results r;
  r.dir = dir;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + ": no such results directory");
  const auto gpath = dir / results::kGenuine;
  const auto ipath = dir / results::kImposter;
  r.genuine = read_histogram(gpath);
  r.imposter = read_histogram(ipath);
  if (r.genuine.kind() != ScoreKind::Genuine) {
    throw Error(ErrorKind::Schema, gpath.string() + ": not a genuine histogram");
  }
  if (r.imposter.kind() != ScoreKind::Imposter) {
    throw Error(ErrorKind::Schema, ipath.string() + ": not an imposter histogram");
  }
  if (r.genuine.total() == 0) throw Error(ErrorKind::Input, gpath.string() + ": genuine histogram is empty");
  if (r.imposter.total() == 0) {
    throw Error(ErrorKind::Input, ipath.string() + ": imposter histogram is empty");
  }
  const auto rpath = dir / results::kReport;
  if (fs::exists(rpath)) {
    r.config = config_from_report(read_text(rpath));
  }
  r.config.bin_count = r.genuine.bin_count();
  return r;
}

// --- gen-db ------------------------------------------------------------------

struct GenDbArgs {
  std::uint32_t identities = 0;
  std::uint32_t samples = 0;
  double flip_prob = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_db(const GenDbArgs& a, std::ostream& out) {
  IrisDatabase db = [&] {
    try {
      return generate_database(a.identities, a.samples, a.flip_prob, a.seed);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }();
  write_database(a.out, db);
  out << "identities: " << db.num_identities() << "\n"
      << "samples per identity: " << db.samples_per_identity() << "\n"
      << "codes: " << db.num_identities() * db.samples_per_identity() << "\n"
      << "bytes: " << fs::file_size(a.out) << "\n";
  return kExitOk;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  unsigned workers = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const SimConfig config = parse_config(read_text(a.config));
  const auto db = generate_database(config.num_identities, config.samples_per_identity,
                                    config.flip_probability, config.master_seed);
  const auto report = run_simulation(config, db, RunOptions{a.workers});
  write_results(a.out, db, report);

  out << "terminals: " << config.num_terminals << "\n"
      << "genuine scores: " << report.genuine.total() << "\n"
      << "imposter scores: " << report.imposter.total() << "\n";
  if (report.safety_interval) {
    out << "safety interval: (" << num(report.safety_interval->a) << ", "
        << num(report.safety_interval->b) << ") width " << num(report.safety_interval->width())
        << "\n";
  } else {
    out << "safety interval: unavailable (" << report.landscape_error << ")\n";
  }
  out << "absolute safety: " << num(100.0 * report.safety.fraction, "%.2f") << "%\n";
  if (!report.failures.empty()) out << "failed terminals: " << report.failures.size() << "\n";
  out << "runtime: " << num(report.runtime_seconds, "%.2f") << " s\n";
  return kExitOk;
}

// --- curves ------------------------------------------------------------------

struct CurvesArgs {
  std::string results;
  std::string out;
};

int cmd_curves(const CurvesArgs& a, std::ostream& out) {
  const auto r = load_results(a.results);
  const auto curve =
      extrapolate_tails(far_frr(r.genuine, r.imposter), r.config.trend_window);
  const fs::path csv = a.out.empty() ? r.dir / results::kCurves : fs::path(a.out);
  write_text(csv, curve_csv(curve));

  out << "wrote " << csv.string() << " (" << curve.grid.size() << " thresholds)\n";
  try {
    const auto si = derive_safety_interval(curve, r.config.epsilon);
    out << "safety interval (epsilon " << num(r.config.epsilon, "%.0e") << "): (" << num(si.a)
        << ", " << num(si.b) << ") width " << num(si.width()) << "\n";
  } catch (const Error& e) {
    out << "safety interval (epsilon " << num(r.config.epsilon, "%.0e")
        << "): unavailable (" << e.what() << ")\n";
  }
  if (const auto eer = eer_crossing(curve)) {
    out << "EER crossing: " << num(*eer) << "\n";
  } else {
    out << "EER crossing: none\n";
  }
  return kExitOk;
}

// --- decide ------------------------------------------------------------------

struct DecideArgs {
  std::string results;
  std::string logic;
  std::optional<double> e1, e2, a, b, epsilon;
};

int cmd_decide(const DecideArgs& d, std::ostream& out) {
  const auto choice = parse_logic(d.logic);
  if (!choice) throw UsageError("--logic must be 3v or 8v");
  if (*choice == LogicChoice::EightValent && (d.e1 || d.e2)) {
    throw UsageError("--e1/--e2 apply to --logic 3v only");
  }
  if (*choice == LogicChoice::ThreeValent && (d.a || d.b || d.epsilon)) {
    throw UsageError("--a/--b/--epsilon apply to --logic 8v only");
  }
  if (d.a.has_value() != d.b.has_value()) throw UsageError("--a and --b must be given together");
  if (d.e1.has_value() != d.e2.has_value()) throw UsageError("--e1 and --e2 must be given together");
  if (d.a && d.epsilon) throw UsageError("give either --a/--b or --epsilon, not both");

  // Parameter checks come before any file is touched.
  if (d.a) {
    const SafetyInterval si{*d.a, *d.b, IntervalDerivation::Configured};
    if (!si.valid()) throw UsageError("interval requires 0 < a < b < 1");
  }
  if (d.e1) {
    if (!(*d.e1 >= 0.0 && *d.e1 < *d.e2 && *d.e2 <= 1.0)) {
      throw UsageError("three-valent cut points require 0 <= e1 < e2 <= 1");
    }
  }
  if (d.epsilon && !(*d.epsilon > 0.0 && *d.epsilon < 1.0)) {
    throw UsageError("--epsilon must lie in (0, 1)");
  }

  const auto r = load_results(d.results);
  LogicEvaluation eval;
  if (*choice == LogicChoice::EightValent) {
    SafetyInterval si;
    if (d.a) {
      si = SafetyInterval{*d.a, *d.b, IntervalDerivation::Configured};
    } else {
      const auto curve =
          extrapolate_tails(far_frr(r.genuine, r.imposter), r.config.trend_window);
      si = derive_safety_interval(curve, d.epsilon.value_or(r.config.epsilon));
    }
    eval = evaluate_8v(r.genuine, r.imposter, si);
  } else {
    ThreeValentConfig tv;
    if (d.e1) {
      tv = ThreeValentConfig{*d.e1, *d.e2};
    } else {
      const auto eer = eer_crossing(far_frr(r.genuine, r.imposter));
      if (!eer) throw Error(ErrorKind::DegenerateLandscape, "no EER crossing to center EP on");
      const double bin = 1.0 / static_cast<double>(r.genuine.bin_count());
      tv = ThreeValentConfig{std::max(0.0, *eer - bin), std::min(1.0, *eer + bin)};
    }
    eval = evaluate_3v(r.genuine, r.imposter, tv);
  }

  write_text(r.dir / results::kDecision, logic_to_json(eval));
  const double total = static_cast<double>(r.genuine.total() + r.imposter.total());
  out << "logic: " << logic_name(eval.logic) << "\n";
  if (eval.logic == LogicChoice::EightValent) {
    out << "interval: (" << num(eval.interval->a) << ", " << num(eval.interval->b) << ")\n"
        << "F0 mass: " << eval.f0_mass << "\n"
        << "Fu mass: " << eval.fu_mass << " (" << num(100.0 * eval.fu_mass / total, "%.3e")
        << "%)\n"
        << "F1 mass: " << eval.f1_mass << "\n"
        << "PA&NA count: " << eval.pa_na_count << "\n";
  } else {
    out << "EP: (" << num(eval.three_valent->e1) << ", " << num(eval.three_valent->e2) << ")\n"
        << "EP-resident scores: " << eval.ep_count << "\n";
    if (eval.sample_trace) {
      write_text(r.dir / results::kLiarTrace, liar_trace_to_json(*eval.sample_trace));
      out << "liar trace: " << (r.dir / results::kLiarTrace).string() << "\n";
    }
  }
  out << "verdict: " << eval.verdict << "\n";
  return eval.pa_na_count == 0 ? kExitOk : kExitFailure;
}

// --- verify-algebra ----------------------------------------------------------

struct VerifyArgs {
  std::string json_out;
};

int cmd_verify_algebra(const VerifyArgs& v, const AlgebraOps& ops, std::ostream& out) {
  out << "psi embedding\n";
  for (auto label : kAllLabels) {
    char row[32];
    std::snprintf(row, sizeof row, "  %-4s %d\n", std::string(label_name(label)).c_str(),
                  psi(label));
    out << row;
  }

  VerificationReport all = verify_boolean_algebra(ops);
  const auto iso = verify_isomorphism(ops);
  all.laws.insert(all.laws.end(), iso.laws.begin(), iso.laws.end());

  out << "\nlaws\n";
  for (const auto& law : all.laws) {
    char row[160];
    std::snprintf(row, sizeof row, "  %-36s %5u cases  %s", law.law.c_str(), law.cases,
                  law.holds ? "pass" : "FAIL");
    out << row;
    if (law.counterexample) {
      const auto& c = *law.counterexample;
      out << "  counterexample (" << c[0] << ", " << c[1] << ", " << c[2] << ")";
    }
    out << "\n";
  }
  out << "\n" << (all.laws.size() - all.failures()) << "/" << all.laws.size() << " laws hold\n";
  if (!v.json_out.empty()) write_text(v.json_out, verification_to_json(all));
  return all.all_hold() ? kExitOk : kExitFailure;
}

// --- report ------------------------------------------------------------------

struct ReportArgs {
  std::string results;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto r = load_results(a.results);
  AggregateReport rep;
  rep.config = r.config;
  rep.grammar = r.config.make_grammar();
  rep.genuine = r.genuine;
  rep.imposter = r.imposter;
  interpret(rep);

  Summary s = summarize(rep);
  s.logic.reset();
  const auto decision = r.dir / results::kDecision;
  if (fs::exists(decision)) s.logic = logic_from_json(read_text(decision));
  write_text(r.dir / results::kSummary, summary_to_json(s));

  auto row = [&](const char* key, const std::string& value) {
    std::string padded = key;
    padded.resize(std::max<std::size_t>(padded.size() + 1, 39), ' ');
    out << padded << value << "\n";
  };
  auto opt = [](const std::optional<double>& v, const char* format) {
    return v ? num(*v, format) : std::string("absent");
  };
  row("epsilon", num(s.epsilon, "%.0e"));
  row("a", opt(s.a, "%.4f"));
  row("b", opt(s.b, "%.4f"));
  row("width", opt(s.width, "%.4f"));
  row("undecidable (%)", opt(s.undecidable_percent, "%.3e"));
  row("  honest positive undecidable (%)", opt(s.honest_positive_undecidable_percent, "%.3e"));
  row("  honest negative undecidable (%)", opt(s.honest_negative_undecidable_percent, "%.3e"));
  if (!s.landscape_error.empty()) row("landscape", s.landscape_error);
  row("absolute safety (%)", num(100.0 * s.absolute_safety_fraction, "%.2f") +
                                 " (calibrated; target " +
                                 num(100.0 * s.absolute_safety_target, "%.2f") + ")");
  row("genuine scores", std::to_string(s.genuine_total));
  row("imposter scores", std::to_string(s.imposter_total));
  row("logic", s.logic ? std::string(logic_name(s.logic->logic)) + ": " + s.logic->verdict
                       : std::string("absent"));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const AlgebraOps& ops) {
  CLI::App app{"Distributed iris verifier simulator"};
  app.name("iivds");
  app.require_subcommand(1, 1);

  GenDbArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-db", "Generate a synthetic iris-code database");
  gen_cmd->add_option("--identities", gen.identities, "Number of identities")->required();
  gen_cmd->add_option("--samples", gen.samples, "Samples per identity")->required();
  gen_cmd->add_option("--flip-prob", gen.flip_prob, "Per-bit flip probability")->required();
  gen_cmd->add_option("--seed", gen.seed, "Master seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output database file")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the terminal network simulation");
  sim_cmd->add_option("--config", sim.config, "Config JSON file")->required();
  sim_cmd->add_option("--out", sim.out, "Results directory")->required();
  sim_cmd->add_option("--workers", sim.workers, "Worker threads (0: IIVDS_WORKERS or all cores)");

  CurvesArgs curves;
  auto* curves_cmd = app.add_subcommand("curves", "Export FAR/FRR/POFA/POFR curves");
  curves_cmd->add_option("--results", curves.results, "Results directory")->required();
  curves_cmd->add_option("--out", curves.out, "CSV path (default: <results>/curves.csv)");

  DecideArgs dec;
  auto* dec_cmd = app.add_subcommand("decide", "Classify all score mass under a logic");
  dec_cmd->add_option("--results", dec.results, "Results directory")->required();
  dec_cmd->add_option("--logic", dec.logic, "3v or 8v")->required();
  dec_cmd->add_option("--e1", dec.e1, "3v: lower EP bound");
  dec_cmd->add_option("--e2", dec.e2, "3v: upper EP bound");
  dec_cmd->add_option("--a", dec.a, "8v: lower safety bound");
  dec_cmd->add_option("--b", dec.b, "8v: upper safety bound");
  dec_cmd->add_option("--epsilon", dec.epsilon, "8v: odds target for a derived interval");

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify-algebra", "Check the Z8 Boolean algebra laws");
  ver_cmd->add_option("--json", ver.json_out, "Also write the report as JSON");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Write summary.json and print the summary");
  rep_cmd->add_option("--results", rep.results, "Results directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_db(gen, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*curves_cmd) return cmd_curves(curves, out);
    if (*dec_cmd) return cmd_decide(dec, out);
    if (*ver_cmd) return cmd_verify_algebra(ver, ops, out);
    if (*rep_cmd) return cmd_report(rep, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::Configuration || e.kind() == ErrorKind::Parameter
               ? kExitUsage
               : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace iivds::cli
