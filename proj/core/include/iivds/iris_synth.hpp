#pragma once

// Synthetic binary iris codes, digital-identity assembly and the
// identity-vs-code similarity functional.
//
// Codes are 16x256 bit matrices packed row-major into 64 little-endian
// 64-bit words: bit (row, col) lives at linear index row*256 + col, which is
// bit (index % 64) of word (index / 64). Serialized byte k therefore holds
// linear bits 8k..8k+7, least significant first.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "iivds/rng.hpp"

namespace iivds {

inline constexpr std::size_t kCodeRows = 16;
inline constexpr std::size_t kCodeCols = 256;
inline constexpr std::size_t kCodeBits = kCodeRows * kCodeCols;
inline constexpr std::size_t kCodeWords = kCodeBits / 64;
inline constexpr std::size_t kCodeBytes = kCodeBits / 8;

using BitBlock = std::array<std::uint64_t, kCodeWords>;

std::size_t popcount(const BitBlock& block) noexcept;

struct IrisCode {
  BitBlock bits{};
  std::uint32_t identity_id = 0;
  std::uint32_t sample_index = 0;

  bool bit(std::size_t row, std::size_t col) const noexcept {
    const std::size_t k = row * kCodeCols + col;
    return (bits[k / 64] >> (k % 64)) & 1U;
  }
  void set_bit(std::size_t row, std::size_t col, bool value) noexcept {
    const std::size_t k = row * kCodeCols + col;
    const std::uint64_t m = std::uint64_t{1} << (k % 64);
    bits[k / 64] = value ? (bits[k / 64] | m) : (bits[k / 64] & ~m);
  }

  friend bool operator==(const IrisCode&, const IrisCode&) = default;
};

/// The shared vocabulary: num_identities x samples_per_identity codes stored
/// in (identity_id, sample_index) order. Immutable once built.
class IrisDatabase {
 public:
  IrisDatabase(std::uint32_t num_identities, std::uint32_t samples_per_identity,
               double flip_probability, std::uint64_t master_seed,
               std::vector<IrisCode> codes);

  std::uint32_t num_identities() const noexcept { return num_identities_; }
  std::uint32_t samples_per_identity() const noexcept { return samples_per_identity_; }
  double flip_probability() const noexcept { return flip_probability_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }

  std::span<const IrisCode> codes() const noexcept { return codes_; }
  std::span<const IrisCode> samples(std::uint32_t identity_id) const;
  const IrisCode& code(std::uint32_t identity_id, std::uint32_t sample_index) const;

  friend bool operator==(const IrisDatabase&, const IrisDatabase&) = default;

 private:
  std::uint32_t num_identities_;
  std::uint32_t samples_per_identity_;
  double flip_probability_;
  std::uint64_t master_seed_;
  std::vector<IrisCode> codes_;
};

/// A template assembled from enrolled codes: per-bit majority plus a mask of
/// positions where at least `quorum` codes agree with the majority.
struct DigitalIdentity {
  std::uint32_t identity_id = 0;
  BitBlock consensus{};
  BitBlock mask{};
  std::vector<std::uint32_t> enrolled_samples;
  std::uint32_t quorum = 0;
  std::uint32_t mask_bits = 0;
};

/// Per identity, a uniform random master code; each sample flips every master
/// bit independently with probability `flip_probability`. Pure function of
/// its arguments.
IrisDatabase generate_database(std::uint32_t num_identities,
                               std::uint32_t samples_per_identity,
                               double flip_probability, std::uint64_t master_seed);

DigitalIdentity assemble_identity(std::span<const IrisCode> codes, std::uint32_t quorum);
DigitalIdentity assemble_identity(const IrisDatabase& db, std::uint32_t identity_id,
                                  std::span<const std::uint32_t> sample_indices,
                                  std::uint32_t quorum);

/// max(0, 2a - 1) where a is the fraction of mask-selected positions on which
/// the probe agrees with the template consensus.
double similarity(const IrisCode& probe, const DigitalIdentity& identity);

std::vector<std::uint32_t> enroll_random(const IrisDatabase& db, std::uint32_t identity_id,
                                         std::uint32_t k, RngStream& stream);

/// Greedy max-mean-agreement selection. Ties go to the lowest sample_index,
/// so the result does not depend on the order of `samples`.
std::vector<std::uint32_t> enroll_consistent(std::span<const IrisCode> samples,
                                             std::uint32_t k);
std::vector<std::uint32_t> enroll_consistent(const IrisDatabase& db,
                                             std::uint32_t identity_id, std::uint32_t k);

/// Raw bit agreement (number of equal positions, 0..4096).
std::uint32_t raw_agreement(const IrisCode& x, const IrisCode& y) noexcept;

// --- matching protocol -----------------------------------------------------

struct EnrollmentRound {
  std::vector<DigitalIdentity> templates;  // indexed by identity_id
};

/// Random multi-enrollment of every identity: `codes_per_enrollment` samples
/// drawn from `stream`, assembled with `quorum`.
EnrollmentRound enroll_all_random(const IrisDatabase& db, std::uint32_t codes_per_enrollment,
                                  std::uint32_t quorum, RngStream& stream);

/// Compares every non-enrolled sample of every identity against all
/// templates of the round. The visitor receives (score, genuine).
void for_each_comparison(const IrisDatabase& db, const EnrollmentRound& round,
                         const std::function<void(double, bool)>& visit);

// --- calibration -----------------------------------------------------------

struct RateAnchor {
  double threshold = 0.0;
  double rate = 0.0;
};

struct CalibrationOptions {
  std::uint32_t num_identities = 50;
  std::uint32_t samples_per_identity = 25;
  std::uint32_t codes_per_enrollment = 5;
  std::uint32_t quorum = 4;
  std::uint32_t iterations = 20;
  double tolerance_decades = 0.5;
};

struct CalibrationProbe {
  double flip_probability = 0.0;
  double far = 0.0;
  double frr = 0.0;
  double far_residual = 0.0;
  double frr_residual = 0.0;
  std::uint64_t genuine_count = 0;
  std::uint64_t imposter_count = 0;

  double residual() const noexcept;
};

struct CalibrationResult {
  double flip_probability = 0.0;
  CalibrationProbe best;
  std::vector<CalibrationProbe> probes;  // evaluation order
  bool attained = false;                 // best residual within tolerance
};

/// Signed log10 residual of an observed tally against a target rate, using
/// 1/total as the resolution floor for zero tallies and zero targets.
double anchor_residual(std::uint64_t hits, std::uint64_t total, double target_rate);

/// Bisection over flip_probability in (0, 0.5) against a FAR anchor and an
/// FRR anchor, each candidate evaluated on a fresh database.
CalibrationResult calibrate_flip_probability(RateAnchor target_far, RateAnchor target_frr,
                                             std::uint64_t trial_budget, std::uint64_t seed,
                                             const CalibrationOptions& options = {});

// --- database file ---------------------------------------------------------

inline constexpr std::uint16_t kDatabaseFormatVersion = 1;

std::vector<std::uint8_t> serialize_database(const IrisDatabase& db);
IrisDatabase deserialize_database(std::span<const std::uint8_t> bytes);
void write_database(const std::filesystem::path& path, const IrisDatabase& db);
IrisDatabase read_database(const std::filesystem::path& path);

}  // namespace iivds
