#include "iivds/iivds_sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "byte_io.hpp"
#include "iivds/error.hpp"
#include "iivds/serialization.hpp"

namespace iivds {

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::Configuration, "config field '" + field + "': " + message);
}

}  // namespace

std::string_view logic_name(LogicChoice logic) noexcept {
  return logic == LogicChoice::EightValent ? "eight_valent" : "three_valent";
}

std::optional<LogicChoice> parse_logic(std::string_view name) noexcept {
  if (name == "eight_valent" || name == "8v") return LogicChoice::EightValent;
  if (name == "three_valent" || name == "3v") return LogicChoice::ThreeValent;
  return std::nullopt;
}

void Grammar::validate() const {
  if (codes_per_enrollment < 3 || codes_per_enrollment % 2 == 0) {
    throw Error(ErrorKind::Configuration, "grammar: codes_per_enrollment must be odd and >= 3");
  }
  if (quorum < 3 || quorum > codes_per_enrollment) {
    throw Error(ErrorKind::Configuration, "grammar: quorum must lie in [3, codes_per_enrollment]");
  }
  const bool three = std::holds_alternative<ThreeValentConfig>(logic_params);
  if (three != (logic_choice == LogicChoice::ThreeValent)) {
    throw Error(ErrorKind::Configuration, "grammar: logic_params do not match logic_choice");
  }
  if (three) {
    std::get<ThreeValentConfig>(logic_params).validate();
  } else {
    std::get<SafetyInterval>(logic_params).validate();
  }
}

CentralUnit::CentralUnit(Grammar grammar) : grammar_(std::move(grammar)) { grammar_.validate(); }

void CentralUnit::update(Grammar next) {
  next.validate();
  next.version = grammar_.version + 1;
  grammar_ = std::move(next);
}

const Theory& CentralUnit::evolve_consistent(const IrisDatabase& db) {
  std::vector<DigitalIdentity> identities;
  identities.reserve(db.num_identities());
  for (std::uint32_t id = 0; id < db.num_identities(); ++id) {
    const auto picked = enroll_consistent(db, id, grammar_.codes_per_enrollment);
    identities.push_back(assemble_identity(db, id, picked, grammar_.quorum));
  }
  update(grammar_);
  theory_ = Theory{&db, std::move(identities), grammar_};
  return *theory_;
}

std::vector<Acknowledgment> disseminate_knowledge(const Grammar& cu_grammar,
                                                  std::span<Terminal> terminals) {
  cu_grammar.validate();
  std::vector<Acknowledgment> acks;
  acks.reserve(terminals.size());
  for (auto& t : terminals) {
    t.local_grammar = cu_grammar;
    acks.push_back({t.id, t.local_grammar->version});
  }
  return acks;
}

void ExplosionParams::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) config_error("explosion.fraction", "must lie in [0, 1]");
  if (!(half_width >= 0.0)) config_error("explosion.half_width", "must be >= 0");
  if (!(center >= 0.0 && center <= 1.0)) config_error("explosion.center", "must lie in [0, 1]");
  if (center - half_width < 0.0) {
    config_error("explosion", "center - half_width must be >= 0");
  }
}

double explode_imposters(double score, const ExplosionParams& params, RngStream& stream) {
  if (params.fraction <= 0.0) return score;
  if (!(stream.uniform() < params.fraction)) return score;
  const double tri = stream.uniform() + stream.uniform() - 1.0;
  return std::clamp(params.center + params.half_width * tri, 0.0, 1.0);
}

void SimConfig::validate() const {
  if (num_terminals < 1) config_error("num_terminals", "must be >= 1");
  if (num_identities < 1) config_error("num_identities", "must be >= 1");
  if (codes_per_enrollment < 3 || codes_per_enrollment % 2 == 0) {
    config_error("codes_per_enrollment", "must be odd and >= 3");
  }
  if (codes_per_enrollment >= samples_per_identity) {
    config_error("codes_per_enrollment", "must be < samples_per_identity");
  }
  if (samples_per_identity < 6) config_error("samples_per_identity", "must be >= 6");
  if (!(flip_probability >= 0.0 && flip_probability < 0.5)) {
    config_error("flip_probability", "must lie in [0, 0.5)");
  }
  if (bin_count < 2) config_error("bin_count", "must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) config_error("epsilon", "must lie in (0, 1)");
  if (quorum < 3 || quorum > codes_per_enrollment) {
    config_error("quorum", "must lie in [3, codes_per_enrollment]");
  }
  if (trend_window < 2) config_error("trend_window", "must be >= 2");
  for (auto c : checkpoints) {
    if (c < 1) config_error("checkpoints", "entries must be >= 1");
  }
  if (explosion) explosion->validate();
  if (three_valent) {
    try {
      three_valent->validate();
    } catch (const Error& e) {
      config_error("three_valent", e.what());
    }
  }
}

Grammar SimConfig::make_grammar() const {
  Grammar g;
  g.quorum = quorum;
  g.codes_per_enrollment = codes_per_enrollment;
  g.logic_choice = logic;
  if (logic == LogicChoice::ThreeValent) {
    g.logic_params = three_valent.value_or(ThreeValentConfig{0.45, 0.50});
  } else {
    g.logic_params = SafetyInterval{0.3725, 0.55, IntervalDerivation::Configured};
  }
  return g;
}

TerminalReport run_terminal(std::uint32_t terminal_id, const IrisDatabase& db,
                            const Grammar& grammar, const SimConfig& config,
                            const ScoreVisitor& visitor) {
  grammar.validate();
  RngStream enrollment(config.master_seed, StreamDomain::TerminalEnrollment, terminal_id);
  RngStream explosion(config.master_seed, StreamDomain::TerminalExplosion, terminal_id);

  TerminalReport report;
  report.terminal_id = terminal_id;
  report.grammar_version = grammar.version;
  report.genuine_hist = ScoreHistogram(ScoreKind::Genuine, config.bin_count);
  report.imposter_hist = ScoreHistogram(ScoreKind::Imposter, config.bin_count);

  const auto round =
      enroll_all_random(db, grammar.codes_per_enrollment, grammar.quorum, enrollment);
  for_each_comparison(db, round, [&](double score, bool genuine) {
    if (genuine) {
      report.genuine_hist.record(score);
      ++report.genuine_count;
      if (visitor) visitor(score, ScoreKind::Genuine);
    } else {
      if (config.explosion) score = explode_imposters(score, *config.explosion, explosion);
      report.imposter_hist.record(score);
      ++report.imposter_count;
      if (visitor) visitor(score, ScoreKind::Imposter);
    }
  });
  return report;
}

LogicEvaluation evaluate_8v(const ScoreHistogram& genuine, const ScoreHistogram& imposter,
                            const SafetyInterval& interval) {
  interval.validate();
  LogicEvaluation out;
  out.logic = LogicChoice::EightValent;
  out.interval = interval;
  const auto g = genuine.counts();
  const auto m = imposter.counts();
  for (std::uint32_t i = 0; i < genuine.bin_count(); ++i) {
    const std::uint64_t mass = g[i] + m[i];
    if (mass == 0) continue;
    const double score = genuine.edge(i);
    for (auto polarity : {Polarity::Positive, Polarity::Negative}) {
      const auto outcome = decide(Claim{polarity, 0, 0}, score, interval);
      if (outcome.is_pa_na()) out.pa_na_count += mass;
    }
    switch (decide(Claim{}, score, interval).modal_value()) {
      case ModalValue::F0: out.f0_mass += mass; break;
      case ModalValue::Fu: out.fu_mass += mass; break;
      case ModalValue::F1: out.f1_mass += mass; break;
    }
  }
  out.verdict = out.pa_na_count == 0 ? "almost consistent" : "inconsistent";
  return out;
}

LogicEvaluation evaluate_3v(const ScoreHistogram& genuine, const ScoreHistogram& imposter,
                            const ThreeValentConfig& config) {
  config.validate();
  LogicEvaluation out;
  out.logic = LogicChoice::ThreeValent;
  out.three_valent = config;
  const auto g = genuine.counts();
  const auto m = imposter.counts();
  for (std::uint32_t i = 0; i < genuine.bin_count(); ++i) {
    const std::uint64_t mass = g[i] + m[i];
    if (mass == 0) continue;
    const double score = genuine.edge(i);
    if (classify_3v(score, config) != Verdict3::Undecidable) continue;
    out.ep_count += mass;
    if (!out.sample_trace) out.sample_trace = detect_liar(score, config);
  }
  out.verdict = out.ep_count > 0 ? "inconsistent" : "consistent";
  return out;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("IIVDS_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

AggregateReport run_simulation(const SimConfig& config, const RunOptions& options) {
  config.validate();
  const auto db = generate_database(config.num_identities, config.samples_per_identity,
                                    config.flip_probability, config.master_seed);
  return run_simulation(config, db, options);
}

AggregateReport run_simulation(const SimConfig& config, const IrisDatabase& db,
                               const RunOptions& options) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  CentralUnit cu(config.make_grammar());
  const auto& theory = cu.evolve_consistent(db);

  std::vector<Terminal> terminals(config.num_terminals);
  for (std::uint32_t t = 0; t < config.num_terminals; ++t) terminals[t].id = t;
  disseminate_knowledge(cu.grammar(), terminals);

  std::set<std::uint32_t> checkpoint_at;
  for (auto c : config.checkpoints) {
    if (c < config.num_terminals) checkpoint_at.insert(c);
  }
  checkpoint_at.insert(config.num_terminals);

  AggregateReport report;
  report.config = config;
  report.grammar = cu.grammar();
  report.genuine = ScoreHistogram(ScoreKind::Genuine, config.bin_count);
  report.imposter = ScoreHistogram(ScoreKind::Imposter, config.bin_count);
  report.cu_theory_identities = static_cast<std::uint32_t>(theory.identities.size());
  double mask_sum = 0.0;
  for (const auto& id : theory.identities) mask_sum += id.mask_bits;
  report.cu_theory_mean_mask_bits =
      theory.identities.empty() ? 0.0 : mask_sum / static_cast<double>(theory.identities.size());

  // Completed terminals land in slots; the CU folds the contiguous prefix so
  // that checkpoint k is exactly the merge of terminals [0, k).
  struct Slot {
    bool done = false;
    std::optional<TerminalReport> report;
    std::optional<TerminalFailure> failure;
  };
  std::vector<Slot> slots(config.num_terminals);
  std::mutex mu;
  std::uint32_t merged = 0;
  std::exception_ptr fatal;

  auto drain_locked = [&] {
    while (merged < config.num_terminals && slots[merged].done) {
      auto& slot = slots[merged];
      if (slot.report) {
        if (slot.report->grammar_version != cu.grammar().version) {
          throw std::logic_error("terminal reported a grammar version other than the CU's");
        }
        report.genuine += slot.report->genuine_hist;
        report.imposter += slot.report->imposter_hist;
        slot.report.reset();
      } else if (slot.failure) {
        report.failures.push_back(std::move(*slot.failure));
      }
      ++merged;
      if (checkpoint_at.count(merged)) {
        report.checkpoints.push_back({merged, report.genuine, report.imposter, std::nullopt});
      }
    }
  };

  std::atomic<std::uint32_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint32_t t = next.fetch_add(1);
      if (t >= config.num_terminals) return;
      Slot done;
      done.done = true;
      try {
        done.report = run_terminal(t, db, *terminals[t].local_grammar, config);
      } catch (const std::exception& e) {
        done.failure = TerminalFailure{t, e.what()};
      }
      std::lock_guard lock(mu);
      slots[t] = std::move(done);
      try {
        drain_locked();
      } catch (...) {
        if (!fatal) fatal = std::current_exception();
      }
    }
  };

  const unsigned workers = std::min(resolve_workers(options.workers), config.num_terminals);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  interpret(report);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void interpret(AggregateReport& report) {
  const auto& config = report.config;
  report.safety_interval.reset();
  report.stats.reset();
  report.eer.reset();
  report.landscape_error.clear();

  std::vector<ErrorCurve> checkpoint_curves;
  for (auto& cp : report.checkpoints) {
    cp.eer.reset();
    if (cp.genuine.total() == 0 || cp.imposter.total() == 0) continue;
    auto curve = far_frr(cp.genuine, cp.imposter);
    cp.eer = eer_crossing(curve);
    checkpoint_curves.push_back(std::move(curve));
  }
  if (!checkpoint_curves.empty()) {
    try {
      report.eer = fuzzy_eer(checkpoint_curves);
    } catch (const Error&) {
    }
  }

  if (report.genuine.total() == 0 || report.imposter.total() == 0) {
    report.landscape_error = "no scores were aggregated";
    report.curve = ErrorCurve{};
    return;
  }
  report.safety = absolute_safety(report.genuine, report.imposter);
  report.curve = extrapolate_tails(far_frr(report.genuine, report.imposter), config.trend_window);
  try {
    report.safety_interval = derive_safety_interval(report.curve, config.epsilon);
    report.stats = landscape_stats(report.genuine, report.imposter, *report.safety_interval);
  } catch (const Error& e) {
    report.landscape_error = e.what();
  }

  if (config.logic == LogicChoice::EightValent) {
    // Without a derived interval the CU falls back to the grammar's own.
    const SafetyInterval interval =
        report.safety_interval
            ? *report.safety_interval
            : std::get<SafetyInterval>(report.grammar.logic_params);
    report.logic = evaluate_8v(report.genuine, report.imposter, interval);
  } else {
    ThreeValentConfig tv = std::get<ThreeValentConfig>(report.grammar.logic_params);
    if (!config.three_valent && report.eer) {
      // EP spans the fuzzy EER interval, widened by one bin on each side.
      const double bin = 1.0 / static_cast<double>(config.bin_count);
      tv = ThreeValentConfig{std::max(0.0, report.eer->lo - bin),
                             std::min(1.0, report.eer->hi + bin)};
    }
    report.logic = evaluate_3v(report.genuine, report.imposter, tv);
  }
}

Summary summarize(const AggregateReport& report) {
  Summary s;
  s.epsilon = report.config.epsilon;
  if (report.safety_interval) {
    s.a = report.safety_interval->a;
    s.b = report.safety_interval->b;
    s.width = report.safety_interval->width();
  }
  if (report.stats) {
    s.undecidable_percent = report.stats->undecidable_percent;
    s.honest_positive_undecidable_percent = report.stats->honest_positive_undecidable_percent;
    s.honest_negative_undecidable_percent = report.stats->honest_negative_undecidable_percent;
  }
  s.landscape_error = report.landscape_error;
  s.absolute_safety_count = report.safety.count;
  s.absolute_safety_fraction = report.safety.fraction;
  s.genuine_total = report.genuine.total();
  s.imposter_total = report.imposter.total();
  if (!report.logic.verdict.empty()) s.logic = report.logic;
  return s;
}

void write_results(const std::filesystem::path& dir, const IrisDatabase& db,
                   const AggregateReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_database(dir / results::kDatabase, db);
  write_histogram(dir / results::kGenuine, report.genuine);
  write_histogram(dir / results::kImposter, report.imposter);
  detail::write_text_file(dir / results::kCurves, curve_csv(report.curve));
  detail::write_text_file(dir / results::kReport, report_to_json(report));
  detail::write_text_file(dir / results::kSummary, summary_to_json(summarize(report)));
}

}  // namespace iivds
