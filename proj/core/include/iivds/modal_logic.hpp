#pragma once

// Two candidate logics for interpreting similarity scores.
//
//  * The 3-valent reading splits [0,1] into MPD, EP and MPI with
//    EP = MPD ∩ MPI. Any score inside EP supports a Liar-style derivation,
//    which detect_liar() emits as a checkable trace.
//  * The 8-valent reading embeds the interval truth values E, D, O, I into
//    Z8 via psi and computes with the complement n, meet p and join s.
//    The decision map built on a safety interval (a, b) never yields the
//    PA&NA state.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iivds {

// --- Z8 Boolean algebra ----------------------------------------------------

enum class Label8 : std::uint8_t { E, D, O, I, OD, ID, IO, IOD };

inline constexpr std::array<Label8, 8> kAllLabels = {
    Label8::E, Label8::D, Label8::O, Label8::I, Label8::OD, Label8::ID, Label8::IO, Label8::IOD};

std::string_view label_name(Label8 label) noexcept;
std::optional<Label8> parse_label(std::string_view name) noexcept;

std::uint8_t psi(Label8 label) noexcept;
Label8 psi_inv(int residue);

struct TruthValue8 {
  std::uint8_t residue = 0;

  static TruthValue8 of(Label8 label) noexcept { return {psi(label)}; }
  Label8 label() const { return psi_inv(residue); }
  friend bool operator==(TruthValue8, TruthValue8) = default;
};

/// n(a) = b  <=>  a + b = 7
std::uint8_t complement_n(int x);
/// Sum over bit positions 0..2 of 2^k [x mod 2^(k+1) >= 2^k][y mod 2^(k+1) >= 2^k].
std::uint8_t meet_p(int x, int y);
/// s(x, y) = n(p(n(x), n(y)))
std::uint8_t join_s(int x, int y);

/// The operations under verification. Swappable so that tests (and the
/// fault-injection build of the CLI) can check that broken algebras are
/// caught.
struct AlgebraOps {
  std::uint8_t (*n)(int) = &complement_n;
  std::uint8_t (*p)(int, int) = &meet_p;
  std::uint8_t (*s)(int, int) = &join_s;
};

struct LawResult {
  std::string law;
  bool holds = true;
  std::uint32_t cases = 0;
  std::optional<std::array<int, 3>> counterexample;  // unused slots are 0
};

struct VerificationReport {
  std::vector<LawResult> laws;

  bool all_hold() const noexcept;
  std::size_t failures() const noexcept;
};

VerificationReport verify_boolean_algebra(const AlgebraOps& ops = {});
VerificationReport verify_isomorphism(const AlgebraOps& ops = {});

// --- 8-valent decision map ---------------------------------------------------

enum class IntervalDerivation : std::uint8_t { Statistical, Configured };

/// D = [0, a], O = (a, b), I = [b, 1].
struct SafetyInterval {
  double a = 0.0;
  double b = 0.0;
  // Thresholds inferred from data are a statistical claim, not a theorem.
  IntervalDerivation derivation = IntervalDerivation::Statistical;

  double width() const noexcept { return b - a; }
  bool valid() const noexcept;
  /// Throws Error(Configuration) unless 0 < a < b < 1.
  void validate() const;
  friend bool operator==(const SafetyInterval&, const SafetyInterval&) = default;
};

TruthValue8 classify_8v(double score, const SafetyInterval& interval);

enum class Polarity : std::uint8_t { Positive, Negative };
enum class Verdict : std::uint8_t { Accepted, Rejected };
enum class ModalValue : std::uint8_t { F0, Fu, F1 };

std::string_view modal_name(ModalValue v) noexcept;

struct Claim {
  Polarity polarity = Polarity::Positive;
  std::uint32_t code_ref = 0;
  std::uint32_t identity_ref = 0;
};

/// Both verdicts are functions of the modal value, so (PA, NA) has no
/// representation.
class DecisionOutcome {
 public:
  explicit constexpr DecisionOutcome(ModalValue modal) noexcept : modal_(modal) {}

  constexpr ModalValue modal_value() const noexcept { return modal_; }
  constexpr Verdict positive_verdict() const noexcept {
    return modal_ == ModalValue::F1 ? Verdict::Accepted : Verdict::Rejected;
  }
  constexpr Verdict negative_verdict() const noexcept {
    return modal_ == ModalValue::F0 ? Verdict::Accepted : Verdict::Rejected;
  }
  constexpr Verdict verdict_for(const Claim& claim) const noexcept {
    return claim.polarity == Polarity::Positive ? positive_verdict() : negative_verdict();
  }
  constexpr bool is_pa_na() const noexcept {
    return positive_verdict() == Verdict::Accepted && negative_verdict() == Verdict::Accepted;
  }

 private:
  ModalValue modal_;
};

DecisionOutcome decide(const Claim& claim, double score, const SafetyInterval& interval);

// --- 3-valent logic ----------------------------------------------------------

/// MPD = [0, e2), MPI = (e1, 1], EP = (e1, e2).
struct ThreeValentConfig {
  double e1 = 0.0;
  double e2 = 0.0;

  void validate() const;
  friend bool operator==(const ThreeValentConfig&, const ThreeValentConfig&) = default;
};

enum class Verdict3 : std::uint8_t { Different, Undecidable, Similar };

std::string_view verdict3_name(Verdict3 v) noexcept;

Verdict3 classify_3v(double score, const ThreeValentConfig& config);

enum class StepKind : std::uint8_t { Premise, Bivalence, EpSupport, Identification };

std::string_view step_kind_name(StepKind k) noexcept;

struct DerivationStep {
  int index = 0;
  StepKind kind = StepKind::Premise;
  std::string statement;
  std::vector<int> depends_on;
  // Truth assignment the step commits to, if any: proposition -> value.
  std::optional<std::pair<std::string, bool>> assigns;
};

struct LiarTrace {
  double score = 0.0;
  std::vector<DerivationStep> steps;
  bool inconsistent = true;
};

std::optional<LiarTrace> detect_liar(double score, const ThreeValentConfig& config);

/// Structural and propositional check of a trace: four ordered steps with
/// backward-only dependencies, p assigned true by bivalence, N(C,I) assigned
/// true by EP support, and the identification p = N(C,I) together with the
/// definition p = not N(C,I) having no 2-valued model.
bool check_liar_trace(const LiarTrace& trace, const ThreeValentConfig& config);

}  // namespace iivds
