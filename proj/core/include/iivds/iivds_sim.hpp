#pragma once

// Star-network simulation: a central unit (CU) holds the grammar, pushes it
// to every terminal (centrifugal knowledge dissemination), terminals run
// random multi-enrollment and matching over the shared database, and the CU
// merges their score histograms and interprets them under a logic.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "iivds/error_analysis.hpp"
#include "iivds/iris_synth.hpp"
#include "iivds/modal_logic.hpp"
#include "iivds/rng.hpp"

namespace iivds {

inline constexpr const char* kToolVersion = "iivds 1.0.0";
inline constexpr const char* kSimilarityRule = "masked-agreement-affine/v1";

enum class LogicChoice : std::uint8_t { ThreeValent, EightValent };

std::string_view logic_name(LogicChoice logic) noexcept;
std::optional<LogicChoice> parse_logic(std::string_view name) noexcept;

using LogicParams = std::variant<ThreeValentConfig, SafetyInterval>;

/// The knowledge K disseminated by the CU.
struct Grammar {
  std::uint32_t quorum = 4;  // identity assembly
  std::uint32_t codes_per_enrollment = 5;
  std::string similarity_rule = kSimilarityRule;
  LogicChoice logic_choice = LogicChoice::EightValent;
  LogicParams logic_params = SafetyInterval{0.3725, 0.55, IntervalDerivation::Configured};
  std::uint64_t version = 1;

  void validate() const;
  friend bool operator==(const Grammar&, const Grammar&) = default;
};

/// T = (V, K): the shared vocabulary, the identities assembled from it and
/// the grammar they were assembled under.
struct Theory {
  const IrisDatabase* vocabulary = nullptr;
  std::vector<DigitalIdentity> identities;
  Grammar grammar;
};

class CentralUnit {
 public:
  explicit CentralUnit(Grammar grammar);

  const Grammar& grammar() const noexcept { return grammar_; }

  /// Installs a new grammar; the version always advances.
  void update(Grammar next);

  /// Consistent-enrollment pass: assembles every identity from the
  /// greedily most coherent samples and records the result as the CU's
  /// theory. Counts as one evolution step.
  const Theory& evolve_consistent(const IrisDatabase& db);
  const std::optional<Theory>& theory() const noexcept { return theory_; }

 private:
  Grammar grammar_;
  std::optional<Theory> theory_;
};

struct Terminal {
  std::uint32_t id = 0;
  std::optional<Grammar> local_grammar;
};

struct Acknowledgment {
  std::uint32_t terminal_id = 0;
  std::uint64_t grammar_version = 0;
  friend bool operator==(const Acknowledgment&, const Acknowledgment&) = default;
};

/// Replaces every terminal's grammar without negotiation.
std::vector<Acknowledgment> disseminate_knowledge(const Grammar& cu_grammar,
                                                  std::span<Terminal> terminals);

struct ExplosionParams {
  double fraction = 0.98;
  double center = 0.3725;
  double half_width = 0.05;

  void validate() const;
};

/// With probability `fraction`, redraws the score from a symmetric
/// triangular distribution on [center - half_width, center + half_width],
/// clamped to [0, 1].
double explode_imposters(double score, const ExplosionParams& params, RngStream& stream);

struct SimConfig {
  std::uint32_t num_terminals = 16;
  std::uint32_t num_identities = 50;
  std::uint32_t samples_per_identity = 25;
  std::uint32_t codes_per_enrollment = 5;
  double flip_probability = 0.1;
  std::uint64_t master_seed = 1;
  std::optional<ExplosionParams> explosion;
  std::uint32_t bin_count = kDefaultBinCount;
  double epsilon = 1e-10;
  // Grammar and interpretation settings.
  std::uint32_t quorum = 4;
  LogicChoice logic = LogicChoice::EightValent;
  std::optional<ThreeValentConfig> three_valent;
  std::vector<std::uint32_t> checkpoints = {100, 200, 300};
  std::uint32_t trend_window = kDefaultTrendWindow;

  void validate() const;
  Grammar make_grammar() const;
};

struct TerminalReport {
  std::uint32_t terminal_id = 0;
  ScoreHistogram genuine_hist{ScoreKind::Genuine};
  ScoreHistogram imposter_hist{ScoreKind::Imposter};
  std::uint64_t genuine_count = 0;
  std::uint64_t imposter_count = 0;
  std::uint64_t grammar_version = 0;
};

/// Receives every recorded score (after the explosion transform).
using ScoreVisitor = std::function<void(double score, ScoreKind kind)>;

TerminalReport run_terminal(std::uint32_t terminal_id, const IrisDatabase& db,
                            const Grammar& grammar, const SimConfig& config,
                            const ScoreVisitor& visitor = {});

struct CheckpointSnapshot {
  std::uint32_t terminals = 0;
  ScoreHistogram genuine{ScoreKind::Genuine};
  ScoreHistogram imposter{ScoreKind::Imposter};
  std::optional<double> eer;
};

struct TerminalFailure {
  std::uint32_t terminal_id = 0;
  std::string message;
};

struct LogicEvaluation {
  LogicChoice logic = LogicChoice::EightValent;
  std::string verdict;
  // 8-valent: modal-value mass per score; pa_na_count checks both claim
  // polarities for every score.
  std::optional<SafetyInterval> interval;
  std::uint64_t f0_mass = 0;
  std::uint64_t fu_mass = 0;
  std::uint64_t f1_mass = 0;
  std::uint64_t pa_na_count = 0;
  // 3-valent
  std::optional<ThreeValentConfig> three_valent;
  std::uint64_t ep_count = 0;
  std::optional<LiarTrace> sample_trace;
};

/// Classifies all histogram mass (bins by lower edge) under one logic.
LogicEvaluation evaluate_8v(const ScoreHistogram& genuine, const ScoreHistogram& imposter,
                            const SafetyInterval& interval);
LogicEvaluation evaluate_3v(const ScoreHistogram& genuine, const ScoreHistogram& imposter,
                            const ThreeValentConfig& config);

struct AggregateReport {
  SimConfig config;
  std::string tool_version = kToolVersion;
  Grammar grammar;
  ScoreHistogram genuine{ScoreKind::Genuine};
  ScoreHistogram imposter{ScoreKind::Imposter};
  std::vector<CheckpointSnapshot> checkpoints;
  ErrorCurve curve;
  std::optional<SafetyInterval> safety_interval;
  std::string landscape_error;
  std::optional<LandscapeStats> stats;
  AbsoluteSafety safety;
  std::optional<EerInterval> eer;
  LogicEvaluation logic;
  std::vector<TerminalFailure> failures;
  std::uint32_t cu_theory_identities = 0;
  double cu_theory_mean_mask_bits = 0.0;
  double runtime_seconds = 0.0;
};

struct RunOptions {
  // 0: IIVDS_WORKERS if set, else hardware concurrency.
  unsigned workers = 0;
};

unsigned resolve_workers(unsigned requested);

AggregateReport run_simulation(const SimConfig& config, const RunOptions& options = {});
AggregateReport run_simulation(const SimConfig& config, const IrisDatabase& db,
                               const RunOptions& options = {});

/// Recomputes curve, safety interval, landscape statistics and the logic
/// evaluation from the merged histograms.
void interpret(AggregateReport& report);

inline constexpr double kAbsoluteSafetyTarget = 0.8383;

struct Summary {
  double epsilon = 0.0;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> width;
  std::optional<double> undecidable_percent;
  std::optional<double> honest_positive_undecidable_percent;
  std::optional<double> honest_negative_undecidable_percent;
  std::string landscape_error;
  double absolute_safety_fraction = 0.0;
  std::uint64_t absolute_safety_count = 0;
  bool absolute_safety_calibrated = true;  // synthetic data, calibrated generator
  double absolute_safety_target = kAbsoluteSafetyTarget;
  std::uint64_t genuine_total = 0;
  std::uint64_t imposter_total = 0;
  std::optional<LogicEvaluation> logic;
};

Summary summarize(const AggregateReport& report);

// --- results directory --------------------------------------------------------

namespace results {
inline constexpr const char* kDatabase = "db.iivd";
inline constexpr const char* kGenuine = "genuine.hist";
inline constexpr const char* kImposter = "imposter.hist";
inline constexpr const char* kCurves = "curves.csv";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kDecision = "decision.json";
inline constexpr const char* kLiarTrace = "liar_trace.json";
}  // namespace results

void write_results(const std::filesystem::path& dir, const IrisDatabase& db,
                   const AggregateReport& report);

}  // namespace iivds
