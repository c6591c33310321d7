#include "support.hpp"

#include <cmath>

namespace iivds::testing {

namespace {

constexpr double kFixtureTotal = 1e12;

std::uint64_t scaled(double rate) {
  return static_cast<std::uint64_t>(std::llround(kFixtureTotal * rate));
}

}  // namespace

ScoreHistogram decade_far_imposters() {
  ScoreHistogram h(ScoreKind::Imposter);
  std::uint64_t above = 0;
  for (std::uint32_t bin = 5000; bin >= 3000; bin -= 250) {
    const double t = bin / 10000.0;
    const std::uint64_t at_or_above = scaled(std::pow(10.0, -(t - 0.29995) / 0.025));
    h.add_to_bin(bin, at_or_above - above);
    above = at_or_above;
  }
  h.add_to_bin(0, static_cast<std::uint64_t>(kFixtureTotal) - above);
  return h;
}

ScoreHistogram decade_frr_genuines() {
  ScoreHistogram h(ScoreKind::Genuine);
  std::uint64_t below = 0;
  for (std::uint32_t upper = 4225; upper <= 5225; upper += 250) {
    const double t = upper / 10000.0;
    const std::uint64_t under = scaled(std::pow(10.0, -8.002 + (t - 0.4225) / 0.025));
    h.add_to_bin(upper - 1, under - below);
    below = under;
  }
  h.add_to_bin(9999, static_cast<std::uint64_t>(kFixtureTotal) - below);
  return h;
}

ScoreHistogram two_point_imposters() {
  ScoreHistogram h(ScoreKind::Imposter);
  h.add_to_bin(0, 9900);
  h.add_to_bin(4000, 99);
  h.add_to_bin(5000, 1);
  return h;
}

std::uint64_t count_at_or_above(std::span<const double> scores, double t) {
  std::uint64_t n = 0;
  for (double s : scores) n += s >= t ? 1 : 0;
  return n;
}

std::uint64_t count_below(std::span<const double> scores, double t) {
  std::uint64_t n = 0;
  for (double s : scores) n += s < t ? 1 : 0;
  return n;
}

std::vector<double> lattice_scores(RngStream& rng, std::size_t n, std::uint32_t bins) {
  std::vector<double> out(n);
  for (auto& s : out) s = static_cast<double>(rng.below(bins + 1)) / bins;
  return out;
}

std::vector<double> uniform_scores(RngStream& rng, std::size_t n, double lo, double hi) {
  std::vector<double> out(n);
  for (auto& s : out) s = lo + (hi - lo) * rng.uniform();
  return out;
}

ScoreHistogram histogram_of(ScoreKind kind, std::span<const double> scores, std::uint32_t bins) {
  ScoreHistogram h(kind, bins);
  for (double s : scores) h.record(s);
  return h;
}

IrisCode random_code(RngStream& rng, std::uint32_t identity_id, std::uint32_t sample_index) {
  IrisCode c;
  c.identity_id = identity_id;
  c.sample_index = sample_index;
  for (std::size_t r = 0; r < kCodeRows; ++r) {
    for (std::size_t col = 0; col < kCodeCols; ++col) c.set_bit(r, col, rng.bernoulli(0.5));
  }
  return c;
}

std::vector<int> ones_per_position(std::span<const IrisCode> codes) {
  std::vector<int> ones(kCodeBits, 0);
  for (const auto& c : codes) {
    for (std::size_t r = 0; r < kCodeRows; ++r) {
      for (std::size_t col = 0; col < kCodeCols; ++col) ones[r * kCodeCols + col] += c.bit(r, col);
    }
  }
  return ones;
}

}  // namespace iivds::testing
