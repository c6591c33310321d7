#pragma once

// Score histograms, FAR/FRR curves, log-linear tail extrapolation (POFA and
// POFR), fuzzy EER intervals, safety-interval derivation and decision
// landscape statistics.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iivds/modal_logic.hpp"

namespace iivds {

inline constexpr std::uint32_t kDefaultBinCount = 10000;
inline constexpr std::uint32_t kDefaultTrendWindow = 5;

enum class ScoreKind : std::uint8_t { Genuine = 0, Imposter = 1 };

std::string_view kind_name(ScoreKind kind) noexcept;

/// Fixed-bin tally. Bin i covers [i/bin_count, (i+1)/bin_count); the last
/// bin is closed at 1. Edges are computed as i / double(bin_count), so a
/// decimal threshold such as 0.3725 falls exactly on edge 3725.
class ScoreHistogram {
 public:
  explicit ScoreHistogram(ScoreKind kind, std::uint32_t bin_count = kDefaultBinCount);

  static std::uint32_t bin_of(double score, std::uint32_t bin_count);

  void record(double score);
  void add_to_bin(std::uint32_t bin, std::uint64_t count);

  ScoreKind kind() const noexcept { return kind_; }
  std::uint32_t bin_count() const noexcept { return static_cast<std::uint32_t>(counts_.size()); }
  std::uint64_t total() const noexcept { return total_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  double edge(std::uint32_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(counts_.size());
  }
  std::optional<std::uint32_t> lowest_occupied() const noexcept;
  std::optional<std::uint32_t> highest_occupied() const noexcept;

  /// In-place merge; throws Error(Schema) on bin_count/kind mismatch.
  ScoreHistogram& operator+=(const ScoreHistogram& other);

  friend bool operator==(const ScoreHistogram&, const ScoreHistogram&) = default;

 private:
  ScoreKind kind_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

ScoreHistogram merge(const ScoreHistogram& h1, const ScoreHistogram& h2);

inline constexpr std::uint16_t kHistogramFormatVersion = 1;

std::vector<std::uint8_t> serialize_histogram(const ScoreHistogram& h);
ScoreHistogram deserialize_histogram(std::span<const std::uint8_t> bytes);
void write_histogram(const std::filesystem::path& path, const ScoreHistogram& h);
ScoreHistogram read_histogram(const std::filesystem::path& path);

/// Least-squares line through (threshold, log10 rate).
struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  // decades
  std::uint32_t points = 0;

  double log10_at(double t) const noexcept { return intercept + slope * t; }
  double rate_at(double t) const noexcept;
};

/// Throws Error(ExtrapolationUnavailable) with fewer than two points or no
/// threshold spread. Rates must be positive.
TailFit fit_log_linear(std::span<const double> thresholds, std::span<const double> rates);

struct ErrorCurve {
  std::uint32_t bin_count = 0;
  std::vector<double> grid;  // i / bin_count for i in [0, bin_count)
  std::uint64_t genuine_total = 0;
  std::uint64_t imposter_total = 0;
  std::vector<std::uint64_t> imposter_at_or_above;
  std::vector<std::uint64_t> genuine_below;
  std::vector<double> far;
  std::vector<double> frr;

  // Empirical support: FAR > 0 up to grid index last_positive_far; FRR > 0
  // from threshold index first_positive_frr (may equal bin_count, i.e. t=1).
  std::optional<std::uint32_t> last_positive_far;
  std::optional<std::uint32_t> first_positive_frr;

  std::uint32_t trend_window = kDefaultTrendWindow;
  std::optional<TailFit> pofa_fit;
  std::optional<TailFit> pofr_fit;
  std::string pofa_unavailable;  // reason, when pofa_fit is empty after extrapolation
  std::string pofr_unavailable;

  /// Extrapolated odds beyond the empirical support; nullopt inside it or
  /// when no fit is available.
  std::optional<double> pofa(std::size_t i) const;
  std::optional<double> pofr(std::size_t i) const;
};

ErrorCurve far_frr(const ScoreHistogram& genuine, const ScoreHistogram& imposter);

/// Fits log10(FAR) over the last `trend_window` knots of the imposter tail
/// and log10(FRR) over the first `trend_window` knots of the genuine tail.
/// Knots are the thresholds where the empirical rate changes: the lower
/// edge of each occupied imposter bin, the upper edge of each occupied
/// genuine bin. Fewer than two knots leaves the side undefined with a reason.
ErrorCurve extrapolate_tails(ErrorCurve curve, std::uint32_t trend_window = kDefaultTrendWindow);

enum class TailSide : std::uint8_t { Pofa, Pofr };

/// pofa: smallest grid threshold whose false-accept odds are <= target.
/// pofr: largest grid threshold whose false-reject odds are <= target.
/// Empirical rates inside the support, extrapolated odds beyond it.
double inverse_threshold(const ErrorCurve& curve, TailSide side, double target_rate);

/// a = POFR^-1(epsilon), b = POFA^-1(epsilon); throws
/// Error(DegenerateLandscape) unless 0 < a < b < 1.
SafetyInterval derive_safety_interval(const ErrorCurve& curve, double epsilon);

struct EerInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> crossings;
  std::vector<std::size_t> excluded;  // indices of curves without a sign change
};

/// Linear-interpolated FAR/FRR crossing of one curve, if FAR - FRR changes
/// sign from positive to non-positive.
std::optional<double> eer_crossing(const ErrorCurve& curve);
EerInterval fuzzy_eer(std::span<const ErrorCurve> curves);

struct AbsoluteSafety {
  std::uint64_t count = 0;
  double fraction = 0.0;
};

/// Genuine mass in bins strictly above the highest occupied imposter bin.
AbsoluteSafety absolute_safety(const ScoreHistogram& genuine, const ScoreHistogram& imposter);

struct LandscapeStats {
  std::uint64_t genuine_total = 0;
  std::uint64_t imposter_total = 0;
  std::uint64_t genuine_in_O = 0;
  std::uint64_t imposter_in_O = 0;
  double undecidable_percent = 0.0;
  double honest_positive_undecidable_percent = 0.0;
  double honest_negative_undecidable_percent = 0.0;
  std::uint64_t absolute_safety_count = 0;
  double absolute_safety_fraction = 0.0;
  SafetyInterval safety_interval;
  double width = 0.0;
};

/// Bins are classified by their lower edge, so scores in [a, a + 1/bins)
/// count as D. Absolute safety counts genuine bins strictly above the
/// highest occupied imposter bin.
LandscapeStats landscape_stats(const ScoreHistogram& genuine, const ScoreHistogram& imposter,
                               const SafetyInterval& interval);

/// `threshold,far,frr,pofa,pofr` with one row per grid point.
std::string curve_csv(const ErrorCurve& curve);

}  // namespace iivds
