#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests.
// Oracles recompute from raw scores or raw bits and never call the code
// under test.

#include <cstdint>
#include <span>
#include <vector>

#include "iivds/error_analysis.hpp"
#include "iivds/iris_synth.hpp"
#include "iivds/rng.hpp"

namespace iivds::testing {

/// Imposter histogram with 1e12 scores whose FAR falls one decade per 0.025
/// of threshold: FAR(t) = 10^(-(t - 0.29995) / 0.025) at t = 0.300, 0.325,
/// ..., 0.500, and 0.500 is the last positive point. The 5e-5 offset keeps
/// the 1e-10 crossing on the grid point 0.5500 instead of straddling it.
ScoreHistogram decade_far_imposters();

/// Genuine mirror: FRR(t) = 10^(-8.002 + (t - 0.4225) / 0.025) at the knots
/// 0.4225, 0.4475, ..., 0.5225, so the extrapolated POFR reaches 1e-10 at
/// exactly 0.3725. Remaining mass sits in the top bin.
ScoreHistogram decade_frr_genuines();

/// 1e4 imposter scores: FAR(0.4) = 1e-2 and FAR(0.5) = 1e-4.
ScoreHistogram two_point_imposters();

/// Number of scores >= t and < t, by direct comparison.
std::uint64_t count_at_or_above(std::span<const double> scores, double t);
std::uint64_t count_below(std::span<const double> scores, double t);

/// Scores on a coarse lattice so that many land exactly on bin edges.
std::vector<double> lattice_scores(RngStream& rng, std::size_t n, std::uint32_t bins);
std::vector<double> uniform_scores(RngStream& rng, std::size_t n, double lo, double hi);

ScoreHistogram histogram_of(ScoreKind kind, std::span<const double> scores,
                            std::uint32_t bins = kDefaultBinCount);

IrisCode random_code(RngStream& rng, std::uint32_t identity_id = 0,
                     std::uint32_t sample_index = 0);

/// Per-position vote count over `codes`, from individual bits.
std::vector<int> ones_per_position(std::span<const IrisCode> codes);

}  // namespace iivds::testing
