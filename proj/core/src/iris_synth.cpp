#include "iivds/iris_synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "byte_io.hpp"
#include "iivds/error.hpp"

namespace iivds {

namespace {

// Bit-sliced per-position vote counter, enough planes for up to 15 codes.
constexpr std::size_t kCounterPlanes = 4;
constexpr std::uint32_t kMaxEnrolledCodes = (1U << kCounterPlanes) - 1;

struct VoteCounter {
  std::array<BitBlock, kCounterPlanes> planes{};

  void add(const BitBlock& bits) noexcept {
    for (std::size_t w = 0; w < kCodeWords; ++w) {
      std::uint64_t carry = bits[w];
      for (auto& plane : planes) {
        const std::uint64_t t = plane[w] & carry;
        plane[w] ^= carry;
        carry = t;
      }
    }
  }

  // Lanes of word w whose count is >= threshold.
  std::uint64_t at_least(std::size_t w, std::uint32_t threshold) const noexcept {
    if (threshold == 0) return ~std::uint64_t{0};
    if (threshold > kMaxEnrolledCodes) return 0;
    std::uint64_t gt = 0;
    std::uint64_t eq = ~std::uint64_t{0};
    for (std::size_t b = kCounterPlanes; b-- > 0;) {
      const std::uint64_t plane = planes[b][w];
      if ((threshold >> b) & 1U) {
        eq &= plane;
      } else {
        gt |= eq & plane;
        eq &= ~plane;
      }
    }
    return gt | eq;
  }
};

void check_identity(const IrisDatabase& db, std::uint32_t identity_id) {
  if (identity_id >= db.num_identities()) {
    throw Error(ErrorKind::Input, "identity_id " + std::to_string(identity_id) +
                                      " out of range [0, " +
                                      std::to_string(db.num_identities()) + ")");
  }
}

}  // namespace

std::size_t popcount(const BitBlock& block) noexcept {
  std::size_t n = 0;
  for (auto w : block) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

IrisDatabase::IrisDatabase(std::uint32_t num_identities, std::uint32_t samples_per_identity,
                           double flip_probability, std::uint64_t master_seed,
                           std::vector<IrisCode> codes)
    : num_identities_(num_identities),
      samples_per_identity_(samples_per_identity),
      flip_probability_(flip_probability),
      master_seed_(master_seed),
      codes_(std::move(codes)) {
  if (codes_.size() != std::size_t{num_identities_} * samples_per_identity_) {
    throw Error(ErrorKind::Input, "database holds " + std::to_string(codes_.size()) +
                                      " codes, expected num_identities x samples_per_identity");
  }
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    const auto& c = codes_[i];
    if (c.identity_id != i / samples_per_identity_ ||
        c.sample_index != i % samples_per_identity_) {
      throw Error(ErrorKind::Input, "database codes are not in (identity_id, sample_index) order");
    }
  }
}

std::span<const IrisCode> IrisDatabase::samples(std::uint32_t identity_id) const {
  check_identity(*this, identity_id);
  return std::span<const IrisCode>(codes_).subspan(
      std::size_t{identity_id} * samples_per_identity_, samples_per_identity_);
}

const IrisCode& IrisDatabase::code(std::uint32_t identity_id, std::uint32_t sample_index) const {
  if (sample_index >= samples_per_identity_) {
    throw Error(ErrorKind::Input, "sample_index " + std::to_string(sample_index) + " out of range");
  }
  return samples(identity_id)[sample_index];
}

IrisDatabase generate_database(std::uint32_t num_identities, std::uint32_t samples_per_identity,
                               double flip_probability, std::uint64_t master_seed) {
  if (num_identities < 1) throw Error(ErrorKind::Parameter, "num_identities must be >= 1");
  if (samples_per_identity < 6) {
    throw Error(ErrorKind::Parameter, "samples_per_identity must be >= 6 (5 enrolled + 1 test)");
  }
  if (!(flip_probability >= 0.0 && flip_probability < 0.5)) {
    throw Error(ErrorKind::Parameter, "flip_probability must lie in [0, 0.5)");
  }

  std::vector<IrisCode> codes;
  codes.reserve(std::size_t{num_identities} * samples_per_identity);
  for (std::uint32_t id = 0; id < num_identities; ++id) {
    RngStream master_stream(master_seed, StreamDomain::DatabaseMaster, id);
    BitBlock master;
    for (auto& w : master) w = master_stream();

    for (std::uint32_t s = 0; s < samples_per_identity; ++s) {
      IrisCode code;
      code.identity_id = id;
      code.sample_index = s;
      code.bits = master;
      if (flip_probability > 0.0) {
        RngStream noise(master_seed, StreamDomain::DatabaseNoise,
                        std::uint64_t{id} * samples_per_identity + s);
        for (std::size_t k = 0; k < kCodeBits; ++k) {
          if (noise.bernoulli(flip_probability)) {
            code.bits[k / 64] ^= std::uint64_t{1} << (k % 64);
          }
        }
      }
      codes.push_back(code);
    }
  }
  return IrisDatabase(num_identities, samples_per_identity, flip_probability, master_seed,
                      std::move(codes));
}

DigitalIdentity assemble_identity(std::span<const IrisCode> codes, std::uint32_t quorum) {
  const auto n = static_cast<std::uint32_t>(codes.size());
  if (n < 3 || n % 2 == 0) {
    throw Error(ErrorKind::Input,
                "identity assembly needs an odd number (>= 3) of codes, got " + std::to_string(n));
  }
  if (n > kMaxEnrolledCodes) {
    throw Error(ErrorKind::Input, "at most " + std::to_string(kMaxEnrolledCodes) +
                                      " codes per enrollment are supported");
  }
  if (quorum < 3 || quorum > n) {
    throw Error(ErrorKind::Input, "quorum must satisfy 3 <= quorum <= code count");
  }

  DigitalIdentity out;
  out.identity_id = codes.front().identity_id;
  out.quorum = quorum;
  VoteCounter counter;
  for (const auto& c : codes) {
    if (c.identity_id != out.identity_id) {
      throw Error(ErrorKind::Input, "identity assembly given codes of mixed identity_id");
    }
    out.enrolled_samples.push_back(c.sample_index);
    counter.add(c.bits);
  }

  const std::uint32_t majority = n / 2 + 1;
  for (std::size_t w = 0; w < kCodeWords; ++w) {
    out.consensus[w] = counter.at_least(w, majority);
    // quorum agreeing on 1, or quorum agreeing on 0
    const std::uint64_t ones_quorum = counter.at_least(w, quorum);
    const std::uint64_t zeros_quorum = ~counter.at_least(w, n - quorum + 1);
    out.mask[w] = ones_quorum | zeros_quorum;
  }
  out.mask_bits = static_cast<std::uint32_t>(popcount(out.mask));
  return out;
}

DigitalIdentity assemble_identity(const IrisDatabase& db, std::uint32_t identity_id,
                                  std::span<const std::uint32_t> sample_indices,
                                  std::uint32_t quorum) {
  std::vector<IrisCode> codes;
  codes.reserve(sample_indices.size());
  for (auto s : sample_indices) codes.push_back(db.code(identity_id, s));
  return assemble_identity(codes, quorum);
}

double similarity(const IrisCode& probe, const DigitalIdentity& identity) {
  const std::uint32_t selected =
      identity.mask_bits != 0 ? identity.mask_bits
                              : static_cast<std::uint32_t>(popcount(identity.mask));
  if (selected == 0) {
    throw Error(ErrorKind::DegenerateTemplate,
                "template for identity " + std::to_string(identity.identity_id) +
                    " has an empty stability mask");
  }
  std::uint32_t agree = 0;
  for (std::size_t w = 0; w < kCodeWords; ++w) {
    agree += static_cast<std::uint32_t>(
        std::popcount(identity.mask[w] & ~(probe.bits[w] ^ identity.consensus[w])));
  }
  const double score =
      (2.0 * static_cast<double>(agree) - static_cast<double>(selected)) /
      static_cast<double>(selected);
  return std::max(0.0, score);
}

std::uint32_t raw_agreement(const IrisCode& x, const IrisCode& y) noexcept {
  std::uint32_t differ = 0;
  for (std::size_t w = 0; w < kCodeWords; ++w) {
    differ += static_cast<std::uint32_t>(std::popcount(x.bits[w] ^ y.bits[w]));
  }
  return static_cast<std::uint32_t>(kCodeBits) - differ;
}

std::vector<std::uint32_t> enroll_random(const IrisDatabase& db, std::uint32_t identity_id,
                                         std::uint32_t k, RngStream& stream) {
  check_identity(db, identity_id);
  const std::uint32_t n = db.samples_per_identity();
  if (k > n) {
    throw Error(ErrorKind::Input, "cannot enroll " + std::to_string(k) + " of " +
                                      std::to_string(n) + " samples");
  }
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0U);
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::uint32_t>(stream.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::uint32_t> enroll_consistent(std::span<const IrisCode> samples,
                                             std::uint32_t k) {
  if (k > samples.size()) {
    throw Error(ErrorKind::Input, "cannot enroll " + std::to_string(k) + " of " +
                                      std::to_string(samples.size()) + " samples");
  }
  if (k == 0) return {};

  std::vector<const IrisCode*> sorted;
  for (const auto& s : samples) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const IrisCode* x, const IrisCode* y) {
    return x->sample_index < y->sample_index;
  });
  const std::size_t n = sorted.size();
  if (n == 1) return {sorted[0]->sample_index};

  std::vector<std::uint32_t> agree(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      agree[i * n + j] = agree[j * n + i] = raw_agreement(*sorted[i], *sorted[j]);
    }
  }

  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (agree[i * n + j] > agree[bi * n + bj]) {
        bi = i;
        bj = j;
      }
    }
  }

  std::vector<bool> taken(n, false);
  std::vector<std::size_t> chosen{bi};
  taken[bi] = true;
  if (k >= 2) {
    chosen.push_back(bj);
    taken[bj] = true;
  }
  while (chosen.size() < k) {
    // mean over the same chosen set, so comparing sums is equivalent
    std::size_t best = n;
    std::uint64_t best_sum = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (taken[c]) continue;
      std::uint64_t sum = 0;
      for (auto s : chosen) sum += agree[c * n + s];
      if (best == n || sum > best_sum) {
        best = c;
        best_sum = sum;
      }
    }
    chosen.push_back(best);
    taken[best] = true;
  }

  std::vector<std::uint32_t> out;
  out.reserve(chosen.size());
  for (auto c : chosen) out.push_back(sorted[c]->sample_index);
  return out;
}

std::vector<std::uint32_t> enroll_consistent(const IrisDatabase& db, std::uint32_t identity_id,
                                             std::uint32_t k) {
  return enroll_consistent(db.samples(identity_id), k);
}

EnrollmentRound enroll_all_random(const IrisDatabase& db, std::uint32_t codes_per_enrollment,
                                  std::uint32_t quorum, RngStream& stream) {
  EnrollmentRound round;
  round.templates.reserve(db.num_identities());
  for (std::uint32_t id = 0; id < db.num_identities(); ++id) {
    const auto picked = enroll_random(db, id, codes_per_enrollment, stream);
    round.templates.push_back(assemble_identity(db, id, picked, quorum));
  }
  return round;
}

void for_each_comparison(const IrisDatabase& db, const EnrollmentRound& round,
                         const std::function<void(double, bool)>& visit) {
  const std::uint32_t spi = db.samples_per_identity();
  std::vector<bool> enrolled(spi);
  for (std::uint32_t id = 0; id < db.num_identities(); ++id) {
    std::fill(enrolled.begin(), enrolled.end(), false);
    for (auto s : round.templates.at(id).enrolled_samples) enrolled[s] = true;
    for (std::uint32_t s = 0; s < spi; ++s) {
      if (enrolled[s]) continue;
      const IrisCode& probe = db.code(id, s);
      for (const auto& tmpl : round.templates) {
        visit(similarity(probe, tmpl), tmpl.identity_id == id);
      }
    }
  }
}

double CalibrationProbe::residual() const noexcept {
  return std::max(std::abs(far_residual), std::abs(frr_residual));
}

double anchor_residual(std::uint64_t hits, std::uint64_t total, double target_rate) {
  if (total == 0) throw Error(ErrorKind::Input, "anchor evaluated on an empty tally");
  const double resolution = 1.0 / static_cast<double>(total);
  if (hits == 0) {
    // Unobserved: consistent with any target at or below the resolution.
    return target_rate <= resolution ? 0.0 : std::log10(resolution / target_rate);
  }
  const double observed = static_cast<double>(hits) / static_cast<double>(total);
  if (target_rate <= 0.0) return std::log10(observed / resolution);
  return std::log10(observed / target_rate);
}

CalibrationResult calibrate_flip_probability(RateAnchor target_far, RateAnchor target_frr,
                                             std::uint64_t trial_budget, std::uint64_t seed,
                                             const CalibrationOptions& options) {
  for (const auto& anchor : {target_far, target_frr}) {
    if (!(anchor.threshold >= 0.0 && anchor.threshold < 1.0) ||
        !(anchor.rate >= 0.0 && anchor.rate < 1.0)) {
      throw Error(ErrorKind::Parameter, "calibration anchors need threshold and rate in [0, 1)");
    }
  }
  if (trial_budget < 100000) {
    throw Error(ErrorKind::Parameter, "calibration budget must be >= 1e5 comparisons");
  }
  if (options.iterations == 0) throw Error(ErrorKind::Parameter, "iterations must be >= 1");

  auto evaluate = [&](double p, std::uint64_t idx) {
    const auto db = generate_database(options.num_identities, options.samples_per_identity, p,
                                      derive_seed(seed, StreamDomain::Calibration, 2 * idx));
    RngStream stream(seed, StreamDomain::Calibration, 2 * idx + 1);
    CalibrationProbe probe;
    probe.flip_probability = p;
    std::uint64_t far_hits = 0, frr_hits = 0;
    while (probe.genuine_count + probe.imposter_count < trial_budget) {
      const auto round =
          enroll_all_random(db, options.codes_per_enrollment, options.quorum, stream);
      for_each_comparison(db, round, [&](double score, bool genuine) {
        if (genuine) {
          ++probe.genuine_count;
          if (score < target_frr.threshold) ++frr_hits;
        } else {
          ++probe.imposter_count;
          if (score >= target_far.threshold) ++far_hits;
        }
      });
    }
    probe.far = static_cast<double>(far_hits) / static_cast<double>(probe.imposter_count);
    probe.frr = static_cast<double>(frr_hits) / static_cast<double>(probe.genuine_count);
    probe.far_residual = anchor_residual(far_hits, probe.imposter_count, target_far.rate);
    probe.frr_residual = anchor_residual(frr_hits, probe.genuine_count, target_frr.rate);
    return probe;
  };

  CalibrationResult result;
  double lo = 0.0, hi = 0.5;
  for (std::uint32_t it = 0; it < options.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto probe = evaluate(mid, it);
    result.probes.push_back(probe);
    // Both rates grow with flip probability.
    if (probe.far_residual + probe.frr_residual >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  result.best = *std::min_element(
      result.probes.begin(), result.probes.end(), [](const auto& x, const auto& y) {
        if (x.residual() != y.residual()) return x.residual() < y.residual();
        return x.flip_probability < y.flip_probability;
      });
  result.flip_probability = result.best.flip_probability;
  result.attained = result.best.residual() <= options.tolerance_decades;
  return result;
}

std::vector<std::uint8_t> serialize_database(const IrisDatabase& db) {
  detail::ByteWriter out;
  out.put_magic("IIVD");
  out.put_u16(kDatabaseFormatVersion);
  out.put_u32(db.num_identities());
  out.put_u32(db.samples_per_identity());
  out.put_f64(db.flip_probability());
  out.put_u64(db.master_seed());
  for (const auto& code : db.codes()) {
    for (auto w : code.bits) out.put_u64(w);
  }
  return std::move(out.bytes());
}

IrisDatabase deserialize_database(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "database");
  in.expect_magic("IIVD");
  const auto version = in.u16();
  if (version != kDatabaseFormatVersion) {
    throw Error(ErrorKind::Schema, "unsupported database format version " + std::to_string(version));
  }
  const auto ids = in.u32();
  const auto spi = in.u32();
  const double p = in.f64();
  const auto seed = in.u64();
  const std::uint64_t count = std::uint64_t{ids} * spi;
  if (in.remaining() != count * kCodeBytes) {
    throw Error(ErrorKind::Schema, "database payload size does not match header");
  }
  std::vector<IrisCode> codes(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    codes[i].identity_id = static_cast<std::uint32_t>(i / spi);
    codes[i].sample_index = static_cast<std::uint32_t>(i % spi);
    for (auto& w : codes[i].bits) w = in.u64();
  }
  return IrisDatabase(ids, spi, p, seed, std::move(codes));
}

void write_database(const std::filesystem::path& path, const IrisDatabase& db) {
  detail::write_file_bytes(path, serialize_database(db));
}

IrisDatabase read_database(const std::filesystem::path& path) {
  return deserialize_database(detail::read_file_bytes(path));
}

}  // namespace iivds
