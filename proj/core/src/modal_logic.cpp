#include "iivds/modal_logic.hpp"

#include <string>

#include "iivds/error.hpp"

namespace iivds {

namespace {

constexpr std::array<std::string_view, 8> kLabelNames = {"E",  "D",  "O",  "I",
                                                         "OD", "ID", "IO", "IOD"};
// psi table: E D O I OD ID IO IOD -> 0 1 2 4 3 5 6 7
constexpr std::array<std::uint8_t, 8> kPsi = {0, 1, 2, 4, 3, 5, 6, 7};

void check_residue(int x) {
  if (x < 0 || x > 7) {
    throw Error(ErrorKind::Input, "residue " + std::to_string(x) + " is not in Z8");
  }
}

class ReportBuilder {
 public:
  explicit ReportBuilder(VerificationReport& report) : report_(report) {}

  // Laws are addressed by index; later law() calls may reallocate.
  std::size_t law(std::string name) {
    report_.laws.emplace_back();
    report_.laws.back().law = std::move(name);
    return report_.laws.size() - 1;
  }

  void check(std::size_t index, bool ok, int x, int y = 0, int z = 0) {
    auto& law = report_.laws[index];
    ++law.cases;
    if (!ok && law.holds) {
      law.holds = false;
      law.counterexample = std::array<int, 3>{x, y, z};
    }
  }

 private:
  VerificationReport& report_;
};

// Atoms of the subset oracle.
constexpr unsigned kAtomD = 1, kAtomO = 2, kAtomI = 4;

unsigned atoms_of(Label8 label) {
  unsigned set = 0;
  for (char c : label_name(label)) {
    if (c == 'D') set |= kAtomD;
    if (c == 'O') set |= kAtomO;
    if (c == 'I') set |= kAtomI;
  }
  return set;
}

Label8 label_of_atoms(unsigned set) {
  for (auto l : kAllLabels) {
    if (atoms_of(l) == set) return l;
  }
  throw Error(ErrorKind::Input, "no label for atom set");
}

}  // namespace

std::string_view label_name(Label8 label) noexcept {
  return kLabelNames[static_cast<std::size_t>(label)];
}

std::optional<Label8> parse_label(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<Label8>(i);
  }
  return std::nullopt;
}

std::uint8_t psi(Label8 label) noexcept { return kPsi[static_cast<std::size_t>(label)]; }

Label8 psi_inv(int residue) {
  check_residue(residue);
  for (std::size_t i = 0; i < kPsi.size(); ++i) {
    if (kPsi[i] == residue) return static_cast<Label8>(i);
  }
  throw Error(ErrorKind::Input, "psi table is not onto");  // unreachable
}

std::uint8_t complement_n(int x) {
  check_residue(x);
  return static_cast<std::uint8_t>(7 - x);
}

std::uint8_t meet_p(int x, int y) {
  check_residue(x);
  check_residue(y);
  int c = 0;
  for (int k = 0; k <= 2; ++k) {
    const int pow_k = 1 << k;
    const int modulus = 1 << (k + 1);
    const int x_has = (x % modulus) >= pow_k ? 1 : 0;
    const int y_has = (y % modulus) >= pow_k ? 1 : 0;
    c += pow_k * x_has * y_has;
  }
  return static_cast<std::uint8_t>(c);
}

std::uint8_t join_s(int x, int y) {
  return complement_n(meet_p(complement_n(x), complement_n(y)));
}

bool VerificationReport::all_hold() const noexcept { return failures() == 0; }

std::size_t VerificationReport::failures() const noexcept {
  std::size_t n = 0;
  for (const auto& l : laws) n += l.holds ? 0 : 1;
  return n;
}

VerificationReport verify_boolean_algebra(const AlgebraOps& ops) {
  VerificationReport report;
  ReportBuilder rb(report);
  const auto n = ops.n;
  const auto p = ops.p;
  const auto s = ops.s;
  auto in_range = [](int v) { return v >= 0 && v <= 7; };

  const auto closure = rb.law("closure");
  const auto involution = rb.law("involution n(n(x)) = x");
  const auto idem_p = rb.law("idempotence p(x,x) = x");
  const auto idem_s = rb.law("idempotence s(x,x) = x");
  const auto ident_p = rb.law("identity p(x,7) = x");
  const auto ident_s = rb.law("identity s(x,0) = x");
  const auto bound_p = rb.law("annihilator p(x,0) = 0");
  const auto bound_s = rb.law("annihilator s(x,7) = 7");
  const auto compl_p = rb.law("complement p(x,n(x)) = 0");
  const auto compl_s = rb.law("complement s(x,n(x)) = 7");
  for (int x = 0; x < 8; ++x) {
    rb.check(closure, in_range(n(x)), x);
    rb.check(involution, n(n(x)) == x, x);
    rb.check(idem_p, p(x, x) == x, x);
    rb.check(idem_s, s(x, x) == x, x);
    rb.check(ident_p, p(x, 7) == x, x);
    rb.check(ident_s, s(x, 0) == x, x);
    rb.check(bound_p, p(x, 0) == 0, x);
    rb.check(bound_s, s(x, 7) == 7, x);
    rb.check(compl_p, p(x, n(x)) == 0, x);
    rb.check(compl_s, s(x, n(x)) == 7, x);
  }

  const auto comm_p = rb.law("commutativity p");
  const auto comm_s = rb.law("commutativity s");
  const auto absorb_ps = rb.law("absorption p(x,s(x,y)) = x");
  const auto absorb_sp = rb.law("absorption s(x,p(x,y)) = x");
  const auto demorgan_p = rb.law("De Morgan n(p(x,y)) = s(n(x),n(y))");
  const auto demorgan_s = rb.law("De Morgan n(s(x,y)) = p(n(x),n(y))");
  const auto conj_oracle = rb.law("p equals bitwise conjunction");
  const auto disj_oracle = rb.law("s equals bitwise disjunction");
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      rb.check(closure, in_range(p(x, y)) && in_range(s(x, y)), x, y);
      rb.check(comm_p, p(x, y) == p(y, x), x, y);
      rb.check(comm_s, s(x, y) == s(y, x), x, y);
      rb.check(absorb_ps, p(x, s(x, y)) == x, x, y);
      rb.check(absorb_sp, s(x, p(x, y)) == x, x, y);
      rb.check(demorgan_p, n(p(x, y)) == s(n(x), n(y)), x, y);
      rb.check(demorgan_s, n(s(x, y)) == p(n(x), n(y)), x, y);
      rb.check(conj_oracle, p(x, y) == (x & y), x, y);
      rb.check(disj_oracle, s(x, y) == (x | y), x, y);
    }
  }

  const auto assoc_p = rb.law("associativity p");
  const auto assoc_s = rb.law("associativity s");
  const auto dist_ps = rb.law("distributivity p over s");
  const auto dist_sp = rb.law("distributivity s over p");
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      for (int z = 0; z < 8; ++z) {
        rb.check(assoc_p, p(p(x, y), z) == p(x, p(y, z)), x, y, z);
        rb.check(assoc_s, s(s(x, y), z) == s(x, s(y, z)), x, y, z);
        rb.check(dist_ps, p(x, s(y, z)) == s(p(x, y), p(x, z)), x, y, z);
        rb.check(dist_sp, s(x, p(y, z)) == p(s(x, y), s(x, z)), x, y, z);
      }
    }
  }
  return report;
}

VerificationReport verify_isomorphism(const AlgebraOps& ops) {
  VerificationReport report;
  ReportBuilder rb(report);

  const auto bijection = rb.law("psi is a bijection onto Z8");
  unsigned seen = 0;
  for (auto l : kAllLabels) seen |= 1U << psi(l);
  for (auto l : kAllLabels) {
    rb.check(bijection, seen == 0xFF && psi_inv(psi(l)) == l, psi(l));
  }

  constexpr unsigned kUniverse = kAtomD | kAtomO | kAtomI;
  const auto hom_union = rb.law("psi(X u Y) = s(psi X, psi Y)");
  const auto hom_inter = rb.law("psi(X n Y) = p(psi X, psi Y)");
  const auto hom_compl = rb.law("psi(C X) = n(psi X)");
  for (auto x : kAllLabels) {
    const unsigned ax = atoms_of(x);
    rb.check(hom_compl, psi(label_of_atoms(kUniverse & ~ax)) == ops.n(psi(x)), psi(x));
    for (auto y : kAllLabels) {
      const unsigned ay = atoms_of(y);
      rb.check(hom_union, psi(label_of_atoms(ax | ay)) == ops.s(psi(x), psi(y)), psi(x),
               psi(y));
      rb.check(hom_inter, psi(label_of_atoms(ax & ay)) == ops.p(psi(x), psi(y)), psi(x),
               psi(y));
    }
  }
  return report;
}

bool SafetyInterval::valid() const noexcept { return 0.0 < a && a < b && b < 1.0; }

void SafetyInterval::validate() const {
  if (!valid()) {
    throw Error(ErrorKind::Configuration, "safety interval requires 0 < a < b < 1, got a=" +
                                              std::to_string(a) + " b=" + std::to_string(b));
  }
}

TruthValue8 classify_8v(double score, const SafetyInterval& interval) {
  interval.validate();
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorKind::Input, "score " + std::to_string(score) + " outside [0, 1]");
  }
  if (score <= interval.a) return TruthValue8::of(Label8::D);
  if (score < interval.b) return TruthValue8::of(Label8::O);
  return TruthValue8::of(Label8::I);
}

std::string_view modal_name(ModalValue v) noexcept {
  switch (v) {
    case ModalValue::F0: return "F0";
    case ModalValue::Fu: return "Fu";
    case ModalValue::F1: return "F1";
  }
  return "?";
}

DecisionOutcome decide(const Claim& /*claim*/, double score, const SafetyInterval& interval) {
  switch (classify_8v(score, interval).label()) {
    case Label8::D: return DecisionOutcome(ModalValue::F0);
    case Label8::O: return DecisionOutcome(ModalValue::Fu);
    default: return DecisionOutcome(ModalValue::F1);
  }
}

void ThreeValentConfig::validate() const {
  if (!(e1 < e2) || e1 < 0.0 || e2 > 1.0) {
    throw Error(ErrorKind::Configuration, "3-valent config requires 0 <= e1 < e2 <= 1, got e1=" +
                                              std::to_string(e1) + " e2=" + std::to_string(e2));
  }
}

std::string_view verdict3_name(Verdict3 v) noexcept {
  switch (v) {
    case Verdict3::Different: return "different";
    case Verdict3::Undecidable: return "undecidable";
    case Verdict3::Similar: return "similar";
  }
  return "?";
}

Verdict3 classify_3v(double score, const ThreeValentConfig& config) {
  config.validate();
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorKind::Input, "score " + std::to_string(score) + " outside [0, 1]");
  }
  if (score <= config.e1) return Verdict3::Different;
  if (score < config.e2) return Verdict3::Undecidable;
  return Verdict3::Similar;
}

std::string_view step_kind_name(StepKind k) noexcept {
  switch (k) {
    case StepKind::Premise: return "premise";
    case StepKind::Bivalence: return "bivalence";
    case StepKind::EpSupport: return "ep_support";
    case StepKind::Identification: return "identification";
  }
  return "?";
}

std::optional<LiarTrace> detect_liar(double score, const ThreeValentConfig& config) {
  if (classify_3v(score, config) != Verdict3::Undecidable) return std::nullopt;

  LiarTrace trace;
  trace.score = score;
  trace.steps.push_back({1, StepKind::Premise,
                         "score " + std::to_string(score) + " lies in EP = (" +
                             std::to_string(config.e1) + ", " + std::to_string(config.e2) +
                             "); the system accepts P(C,I)",
                         {},
                         std::pair<std::string, bool>{"P(C,I)", true}});
  trace.steps.push_back({2, StepKind::Bivalence,
                         "2-valent logic: p := \"N(C,I) is false\" is true",
                         {1},
                         std::pair<std::string, bool>{"p", true}});
  trace.steps.push_back({3, StepKind::EpSupport,
                         "EP = MPD n MPI, so N(C,I) is also true",
                         {1},
                         std::pair<std::string, bool>{"N(C,I)", true}});
  trace.steps.push_back({4, StepKind::Identification,
                         "p and N(C,I) are both true, so p == N(C,I) and p == \"p is false\"",
                         {2, 3},
                         std::nullopt});
  trace.inconsistent = true;
  return trace;
}

bool check_liar_trace(const LiarTrace& trace, const ThreeValentConfig& config) {
  if (!trace.inconsistent || trace.steps.size() != 4) return false;
  if (classify_3v(trace.score, config) != Verdict3::Undecidable) return false;

  static constexpr std::array<StepKind, 4> kExpected = {
      StepKind::Premise, StepKind::Bivalence, StepKind::EpSupport, StepKind::Identification};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& step = trace.steps[i];
    if (step.index != static_cast<int>(i) + 1 || step.kind != kExpected[i]) return false;
    for (int dep : step.depends_on) {
      if (dep < 1 || dep >= step.index) return false;
    }
  }

  // Values committed by steps 2 and 3.
  const auto& p_step = trace.steps[1].assigns;
  const auto& n_step = trace.steps[2].assigns;
  if (!p_step || p_step->first != "p" || !n_step || n_step->first != "N(C,I)") return false;
  const bool p = p_step->second;
  const bool n = n_step->second;
  if (!(p && n)) return false;

  // Step 4: p == N(C,I) holds under the assignment; with the definition
  // p := not N(C,I) this reads p == not p, which has no 2-valued model.
  const bool identification_holds = (p == n);
  bool liar_satisfiable = false;
  for (bool v : {false, true}) liar_satisfiable = liar_satisfiable || (v == !v);
  const bool definition_violated = (p != !n);
  return identification_holds && !liar_satisfiable && definition_violated;
}

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Input: return "input";
    case ErrorKind::DegenerateTemplate: return "degenerate_template";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
    case ErrorKind::ExtrapolationUnavailable: return "extrapolation_unavailable";
    case ErrorKind::OutOfRange: return "out_of_range";
    case ErrorKind::DegenerateLandscape: return "degenerate_landscape";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::CalibrationFailure: return "calibration_failure";
  }
  return "unknown";
}

}  // namespace iivds
