#include "iivds/error_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "byte_io.hpp"
#include "iivds/error.hpp"

namespace iivds {

std::string_view kind_name(ScoreKind kind) noexcept {
  return kind == ScoreKind::Genuine ? "genuine" : "imposter";
}

ScoreHistogram::ScoreHistogram(ScoreKind kind, std::uint32_t bin_count) : kind_(kind) {
  if (bin_count == 0) throw Error(ErrorKind::Parameter, "bin_count must be >= 1");
  counts_.assign(bin_count, 0);
}

std::uint32_t ScoreHistogram::bin_of(double score, std::uint32_t bin_count) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorKind::Input, "score " + std::to_string(score) + " outside [0, 1]");
  }
  const double bins = static_cast<double>(bin_count);
  if (score == 1.0) return bin_count - 1;
  auto i = static_cast<std::uint32_t>(std::min(std::floor(score * bins), bins - 1.0));
  // Settle against the exact edges i / bins.
  while (i > 0 && static_cast<double>(i) / bins > score) --i;
  while (i + 1 < bin_count && static_cast<double>(i + 1) / bins <= score) ++i;
  return i;
}

void ScoreHistogram::record(double score) {
  ++counts_[bin_of(score, bin_count())];
  ++total_;
}

void ScoreHistogram::add_to_bin(std::uint32_t bin, std::uint64_t count) {
  if (bin >= counts_.size()) throw Error(ErrorKind::Input, "bin index out of range");
  counts_[bin] += count;
  total_ += count;
}

std::optional<std::uint32_t> ScoreHistogram::lowest_occupied() const noexcept {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] != 0) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

std::optional<std::uint32_t> ScoreHistogram::highest_occupied() const noexcept {
  for (std::size_t i = counts_.size(); i-- > 0;) {
    if (counts_[i] != 0) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

ScoreHistogram& ScoreHistogram::operator+=(const ScoreHistogram& other) {
  if (other.kind_ != kind_ || other.counts_.size() != counts_.size()) {
    throw Error(ErrorKind::Schema, "cannot merge histograms of different kind or bin_count");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

ScoreHistogram merge(const ScoreHistogram& h1, const ScoreHistogram& h2) {
  ScoreHistogram out = h1;
  out += h2;
  return out;
}

std::vector<std::uint8_t> serialize_histogram(const ScoreHistogram& h) {
  detail::ByteWriter out;
  out.put_magic("IIVH");
  out.put_u16(kHistogramFormatVersion);
  out.put_u8(static_cast<std::uint8_t>(h.kind()));
  out.put_u32(h.bin_count());
  for (auto c : h.counts()) out.put_u64(c);
  return std::move(out.bytes());
}

ScoreHistogram deserialize_histogram(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "histogram");
  in.expect_magic("IIVH");
  const auto version = in.u16();
  if (version != kHistogramFormatVersion) {
    throw Error(ErrorKind::Schema, "unsupported histogram version " + std::to_string(version));
  }
  const auto kind = in.u8();
  if (kind > 1) throw Error(ErrorKind::Schema, "unknown histogram kind " + std::to_string(kind));
  const auto bins = in.u32();
  if (bins == 0 || in.remaining() != std::size_t{bins} * 8) {
    throw Error(ErrorKind::Schema, "histogram payload size does not match bin_count");
  }
  ScoreHistogram h(static_cast<ScoreKind>(kind), bins);
  for (std::uint32_t i = 0; i < bins; ++i) {
    const auto c = in.u64();
    if (c != 0) h.add_to_bin(i, c);
  }
  return h;
}

void write_histogram(const std::filesystem::path& path, const ScoreHistogram& h) {
  detail::write_file_bytes(path, serialize_histogram(h));
}

ScoreHistogram read_histogram(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  try {
    return deserialize_histogram(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.filename().string() + ": " + e.what());
  }
}

double TailFit::rate_at(double t) const noexcept { return std::pow(10.0, log10_at(t)); }

TailFit fit_log_linear(std::span<const double> thresholds, std::span<const double> rates) {
  if (thresholds.size() != rates.size()) {
    throw Error(ErrorKind::Input, "fit needs matching threshold and rate counts");
  }
  const std::size_t n = thresholds.size();
  if (n < 2) {
    throw Error(ErrorKind::ExtrapolationUnavailable,
                "fewer than 2 positive points for the log-linear trend");
  }
  std::vector<double> y(n);
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rates[i] > 0.0)) throw Error(ErrorKind::Input, "log-linear fit needs positive rates");
    y[i] = std::log10(rates[i]);
    mt += thresholds[i];
    my += y[i];
  }
  mt /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (thresholds[i] - mt) * (thresholds[i] - mt);
    sxy += (thresholds[i] - mt) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw Error(ErrorKind::ExtrapolationUnavailable, "trend points share a single threshold");
  }
  TailFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mt;
  fit.points = static_cast<std::uint32_t>(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.max_residual = std::max(fit.max_residual, std::abs(y[i] - fit.log10_at(thresholds[i])));
  }
  return fit;
}

std::optional<double> ErrorCurve::pofa(std::size_t i) const {
  if (!pofa_fit || !last_positive_far || i >= grid.size() || i <= *last_positive_far) {
    return std::nullopt;
  }
  return pofa_fit->rate_at(grid[i]);
}

std::optional<double> ErrorCurve::pofr(std::size_t i) const {
  if (!pofr_fit || !first_positive_frr || i >= grid.size() || i >= *first_positive_frr) {
    return std::nullopt;
  }
  return pofr_fit->rate_at(grid[i]);
}

ErrorCurve far_frr(const ScoreHistogram& genuine, const ScoreHistogram& imposter) {
  if (genuine.kind() != ScoreKind::Genuine || imposter.kind() != ScoreKind::Imposter) {
    throw Error(ErrorKind::Schema, "far_frr expects (genuine, imposter) histograms");
  }
  if (genuine.bin_count() != imposter.bin_count()) {
    throw Error(ErrorKind::Schema, "genuine and imposter histograms differ in bin_count");
  }
  if (genuine.total() == 0) throw Error(ErrorKind::Input, "genuine histogram is empty");
  if (imposter.total() == 0) throw Error(ErrorKind::Input, "imposter histogram is empty");

  const std::uint32_t bins = genuine.bin_count();
  ErrorCurve c;
  c.bin_count = bins;
  c.genuine_total = genuine.total();
  c.imposter_total = imposter.total();
  c.grid.resize(bins);
  c.imposter_at_or_above.resize(bins);
  c.genuine_below.resize(bins);
  c.far.resize(bins);
  c.frr.resize(bins);

  const auto g = genuine.counts();
  const auto m = imposter.counts();
  std::uint64_t below = 0;
  for (std::uint32_t i = 0; i < bins; ++i) {
    c.grid[i] = static_cast<double>(i) / static_cast<double>(bins);
    c.genuine_below[i] = below;
    below += g[i];
  }
  std::uint64_t above = 0;
  for (std::uint32_t i = bins; i-- > 0;) {
    above += m[i];
    c.imposter_at_or_above[i] = above;
  }
  const auto gt = static_cast<double>(c.genuine_total);
  const auto it = static_cast<double>(c.imposter_total);
  for (std::uint32_t i = 0; i < bins; ++i) {
    c.far[i] = static_cast<double>(c.imposter_at_or_above[i]) / it;
    c.frr[i] = static_cast<double>(c.genuine_below[i]) / gt;
  }
  c.last_positive_far = imposter.highest_occupied();
  if (auto lo = genuine.lowest_occupied()) c.first_positive_frr = *lo + 1;
  return c;
}

ErrorCurve extrapolate_tails(ErrorCurve curve, std::uint32_t trend_window) {
  if (trend_window < 2) throw Error(ErrorKind::Parameter, "trend_window must be >= 2");
  curve.trend_window = trend_window;
  curve.pofa_fit.reset();
  curve.pofr_fit.reset();
  curve.pofa_unavailable.clear();
  curve.pofr_unavailable.clear();
  const std::uint32_t bins = curve.bin_count;
  const auto bins_d = static_cast<double>(bins);

  // Imposter knots, highest first.
  std::vector<double> ft, fr;
  for (std::uint32_t i = bins; i-- > 0 && ft.size() < trend_window;) {
    const std::uint64_t next = i + 1 < bins ? curve.imposter_at_or_above[i + 1] : 0;
    if (curve.imposter_at_or_above[i] > next) {
      ft.push_back(curve.grid[i]);
      fr.push_back(curve.far[i]);
    }
  }
  try {
    curve.pofa_fit = fit_log_linear(ft, fr);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ExtrapolationUnavailable) throw;
    curve.pofa_unavailable = e.what();
  }

  // Genuine knots, lowest first. Knot for bin j sits at its upper edge.
  std::vector<double> rt, rr;
  const auto gt = static_cast<double>(curve.genuine_total);
  for (std::uint32_t j = 0; j < bins && rt.size() < trend_window; ++j) {
    const std::uint64_t upto = j + 1 < bins ? curve.genuine_below[j + 1] : curve.genuine_total;
    if (upto > curve.genuine_below[j]) {
      rt.push_back(static_cast<double>(j + 1) / bins_d);
      rr.push_back(static_cast<double>(upto) / gt);
    }
  }
  try {
    curve.pofr_fit = fit_log_linear(rt, rr);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ExtrapolationUnavailable) throw;
    curve.pofr_unavailable = e.what();
  }
  return curve;
}

namespace {

[[noreturn]] void unavailable(std::string_view side, const std::string& why) {
  throw Error(ErrorKind::ExtrapolationUnavailable,
              std::string(side) + " extrapolation unavailable" +
                  (why.empty() ? std::string() : ": " + why));
}

}  // namespace

double inverse_threshold(const ErrorCurve& curve, TailSide side, double target_rate) {
  if (!(target_rate > 0.0 && target_rate <= 1.0)) {
    throw Error(ErrorKind::Parameter, "target rate must lie in (0, 1]");
  }
  const std::size_t bins = curve.grid.size();
  if (side == TailSide::Pofa) {
    for (std::size_t i = 0; i < bins; ++i) {
      double rate;
      if (curve.last_positive_far && i <= *curve.last_positive_far) {
        rate = curve.far[i];
      } else {
        if (!curve.pofa_fit) unavailable("POFA", curve.pofa_unavailable);
        rate = curve.pofa_fit->rate_at(curve.grid[i]);
      }
      if (rate <= target_rate) return curve.grid[i];
    }
  } else {
    for (std::size_t i = bins; i-- > 0;) {
      double rate;
      if (curve.first_positive_frr && i >= *curve.first_positive_frr) {
        rate = curve.frr[i];
      } else {
        if (!curve.pofr_fit) unavailable("POFR", curve.pofr_unavailable);
        rate = curve.pofr_fit->rate_at(curve.grid[i]);
      }
      if (rate <= target_rate) return curve.grid[i];
    }
  }
  throw Error(ErrorKind::OutOfRange, std::string(side == TailSide::Pofa ? "POFA" : "POFR") +
                                         " never reaches " + std::to_string(target_rate) +
                                         " on the threshold grid");
}

SafetyInterval derive_safety_interval(const ErrorCurve& curve, double epsilon) {
  SafetyInterval si;
  si.a = inverse_threshold(curve, TailSide::Pofr, epsilon);
  si.b = inverse_threshold(curve, TailSide::Pofa, epsilon);
  si.derivation = IntervalDerivation::Statistical;
  if (!si.valid()) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "degenerate landscape: a = POFR^-1(%g) = %.4f, b = POFA^-1(%g) = %.4f", epsilon,
                  si.a, epsilon, si.b);
    throw Error(ErrorKind::DegenerateLandscape, buf);
  }
  return si;
}

std::optional<double> eer_crossing(const ErrorCurve& curve) {
  const std::size_t n = std::min({curve.grid.size(), curve.far.size(), curve.frr.size()});
  if (n == 0) return std::nullopt;
  double prev = curve.far[0] - curve.frr[0];
  if (!(prev > 0.0)) return std::nullopt;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = curve.far[i] - curve.frr[i];
    if (d <= 0.0) {
      if (d == 0.0) return curve.grid[i];
      return curve.grid[i - 1] + (curve.grid[i] - curve.grid[i - 1]) * prev / (prev - d);
    }
    prev = d;
  }
  return std::nullopt;
}

EerInterval fuzzy_eer(std::span<const ErrorCurve> curves) {
  if (curves.empty()) throw Error(ErrorKind::Input, "fuzzy EER needs at least one curve");
  EerInterval out;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    if (auto t = eer_crossing(curves[k])) {
      out.crossings.push_back(*t);
    } else {
      out.excluded.push_back(k);
    }
  }
  if (out.crossings.empty()) {
    throw Error(ErrorKind::Input, "no curve has a FAR/FRR crossing");
  }
  const auto [lo, hi] = std::minmax_element(out.crossings.begin(), out.crossings.end());
  out.lo = *lo;
  out.hi = *hi;
  return out;
}

LandscapeStats landscape_stats(const ScoreHistogram& genuine, const ScoreHistogram& imposter,
                               const SafetyInterval& interval) {
  interval.validate();
  if (genuine.kind() != ScoreKind::Genuine || imposter.kind() != ScoreKind::Imposter ||
      genuine.bin_count() != imposter.bin_count()) {
    throw Error(ErrorKind::Schema, "landscape_stats expects matching (genuine, imposter) histograms");
  }
  if (genuine.total() == 0) throw Error(ErrorKind::Input, "genuine histogram is empty");
  if (imposter.total() == 0) throw Error(ErrorKind::Input, "imposter histogram is empty");

  LandscapeStats s;
  s.genuine_total = genuine.total();
  s.imposter_total = imposter.total();
  s.safety_interval = interval;
  s.width = interval.width();

  const auto g = genuine.counts();
  const auto m = imposter.counts();
  for (std::uint32_t i = 0; i < genuine.bin_count(); ++i) {
    const double e = genuine.edge(i);
    if (e > interval.a && e < interval.b) {
      s.genuine_in_O += g[i];
      s.imposter_in_O += m[i];
    }
  }
  s.honest_positive_undecidable_percent =
      100.0 * static_cast<double>(s.genuine_in_O) / static_cast<double>(s.genuine_total);
  s.honest_negative_undecidable_percent =
      100.0 * static_cast<double>(s.imposter_in_O) / static_cast<double>(s.imposter_total);
  s.undecidable_percent =
      s.honest_positive_undecidable_percent + s.honest_negative_undecidable_percent;

  const auto safe = absolute_safety(genuine, imposter);
  s.absolute_safety_count = safe.count;
  s.absolute_safety_fraction = safe.fraction;
  return s;
}

AbsoluteSafety absolute_safety(const ScoreHistogram& genuine, const ScoreHistogram& imposter) {
  if (genuine.bin_count() != imposter.bin_count()) {
    throw Error(ErrorKind::Schema, "genuine and imposter histograms differ in bin_count");
  }
  if (genuine.total() == 0) throw Error(ErrorKind::Input, "genuine histogram is empty");
  AbsoluteSafety out;
  const auto top = imposter.highest_occupied();
  const std::uint32_t from = top ? *top + 1 : 0;
  const auto g = genuine.counts();
  for (std::uint32_t i = from; i < genuine.bin_count(); ++i) out.count += g[i];
  out.fraction = static_cast<double>(out.count) / static_cast<double>(genuine.total());
  return out;
}

std::string curve_csv(const ErrorCurve& curve) {
  std::string out = "threshold,far,frr,pofa,pofr\n";
  out.reserve(out.size() + curve.grid.size() * 64);
  char buf[128];
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    int n = std::snprintf(buf, sizeof buf, "%.6f,%.5e,%.5e,", curve.grid[i], curve.far[i],
                          curve.frr[i]);
    out.append(buf, static_cast<std::size_t>(n));
    if (auto v = curve.pofa(i)) {
      n = std::snprintf(buf, sizeof buf, "%.5e", *v);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back(',');
    if (auto v = curve.pofr(i)) {
      n = std::snprintf(buf, sizeof buf, "%.5e", *v);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace iivds
