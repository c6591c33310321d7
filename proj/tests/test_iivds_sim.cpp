#include <gtest/gtest.h>

#include <cmath>

#include "iivds/error.hpp"
#include "iivds/iivds_sim.hpp"
#include "iivds/serialization.hpp"
#include "support.hpp"

namespace iivds {
namespace {

SimConfig small_config() {
  SimConfig c;
  c.num_terminals = 8;
  c.num_identities = 10;
  c.samples_per_identity = 8;
  c.flip_probability = 0.2;
  c.master_seed = 7;
  c.checkpoints = {2, 5};
  return c;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Input;
}

std::string config_error_message(const SimConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

TEST(Dissemination, EveryTerminalGetsTheCuGrammar) {
  Grammar g;
  g.version = 3;
  std::vector<Terminal> terminals(5);
  for (std::uint32_t i = 0; i < 5; ++i) terminals[i].id = i;
  const auto acks = disseminate_knowledge(g, terminals);
  ASSERT_EQ(acks.size(), 5U);
  for (std::uint32_t i = 0; i < 5; ++i) {
    EXPECT_EQ(acks[i], (Acknowledgment{i, 3}));
    EXPECT_EQ(terminals[i].local_grammar, g);
  }
}

TEST(Dissemination, OverwritesLocalGrammarAndIsIdempotent) {
  Grammar stale;
  stale.version = 7;
  stale.quorum = 3;
  Grammar g;
  g.version = 3;
  std::vector<Terminal> terminals(2);
  terminals[1].id = 1;
  terminals[1].local_grammar = stale;
  disseminate_knowledge(g, terminals);
  EXPECT_EQ(terminals[1].local_grammar, g);
  const auto again = disseminate_knowledge(g, terminals);
  EXPECT_EQ(terminals[0].local_grammar, g);
  EXPECT_EQ(again[1].grammar_version, 3U);
}

TEST(CentralUnit, UpdateAndEvolutionAdvanceVersion) {
  CentralUnit cu(Grammar{});
  EXPECT_EQ(cu.grammar().version, 1U);
  Grammar same = cu.grammar();
  cu.update(same);
  EXPECT_EQ(cu.grammar().version, 2U);
  const auto db = generate_database(4, 8, 0.1, 1);
  const auto& theory = cu.evolve_consistent(db);
  EXPECT_EQ(cu.grammar().version, 3U);
  EXPECT_EQ(theory.grammar, cu.grammar());
  EXPECT_EQ(theory.identities.size(), 4U);
  EXPECT_EQ(theory.vocabulary, &db);
  for (const auto& id : theory.identities) {
    EXPECT_EQ(id.enrolled_samples, enroll_consistent(db, id.identity_id, 5));
  }
}

TEST(Terminal, CountsAndDeterminism) {
  const auto cfg = small_config();
  const auto db = generate_database(cfg.num_identities, cfg.samples_per_identity,
                                    cfg.flip_probability, cfg.master_seed);
  const auto g = cfg.make_grammar();
  const auto r1 = run_terminal(3, db, g, cfg);
  const auto r2 = run_terminal(3, db, g, cfg);
  const auto other = run_terminal(4, db, g, cfg);
  // Each identity keeps samples - codes_per_enrollment probes.
  EXPECT_EQ(r1.genuine_count, 10U * 3);
  EXPECT_EQ(r1.imposter_count, 10U * 3 * 9);
  EXPECT_EQ(r1.genuine_hist.total(), r1.genuine_count);
  EXPECT_EQ(r1.genuine_hist, r2.genuine_hist);
  EXPECT_EQ(r1.imposter_hist, r2.imposter_hist);
  EXPECT_NE(r1.imposter_hist, other.imposter_hist);
  EXPECT_EQ(r1.grammar_version, g.version);
}

TEST(Terminal, VisitorSeesEveryRecordedScore) {
  auto cfg = small_config();
  cfg.explosion = ExplosionParams{};
  const auto db = generate_database(cfg.num_identities, cfg.samples_per_identity,
                                    cfg.flip_probability, cfg.master_seed);
  ScoreHistogram g(ScoreKind::Genuine), i(ScoreKind::Imposter);
  const auto r = run_terminal(0, db, cfg.make_grammar(), cfg, [&](double s, ScoreKind k) {
    (k == ScoreKind::Genuine ? g : i).record(s);
  });
  EXPECT_EQ(g, r.genuine_hist);
  EXPECT_EQ(i, r.imposter_hist);
}

TEST(Terminal, NoiselessGenuineScoresAreOne) {
  auto cfg = small_config();
  cfg.flip_probability = 0.0;
  const auto db = generate_database(cfg.num_identities, cfg.samples_per_identity, 0.0, 1);
  const auto r = run_terminal(0, db, cfg.make_grammar(), cfg);
  EXPECT_EQ(r.genuine_hist.counts()[cfg.bin_count - 1], r.genuine_count);
}

TEST(Explosion, ZeroFractionIsIdentity) {
  RngStream rng(1, StreamDomain::Test, 20);
  const ExplosionParams p{0.0, 0.3725, 0.05};
  for (double s : {0.0, 0.1, 0.5, 1.0}) EXPECT_EQ(explode_imposters(s, p, rng), s);
}

TEST(Explosion, FullFractionZeroWidthGivesCenter) {
  RngStream rng(1, StreamDomain::Test, 21);
  const ExplosionParams p{1.0, 0.3725, 0.0};
  for (int i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(explode_imposters(0.9, p, rng), 0.3725);
}

TEST(Explosion, WindowMassAndTriangularShape) {
  RngStream rng(1, StreamDomain::Test, 22);
  const ExplosionParams p{0.98, 0.3725, 0.05};
  const int n = 100000;
  int inside = 0, inner_half = 0;
  for (int i = 0; i < n; ++i) {
    const double s = explode_imposters(0.9, p, rng);
    const double d = std::abs(s - p.center);
    inside += d <= p.half_width;
    inner_half += d <= p.half_width / 2;
  }
  // Binomial(1e5, 0.98) has sd 4.4e-4; the inner half of a triangle holds 3/4.
  EXPECT_GE(inside, n * 95 / 100);
  EXPECT_NEAR(inside / double(n), 0.98, 0.003);
  EXPECT_NEAR(inner_half / double(n), 0.98 * 0.75, 0.006);
}

TEST(Explosion, ClampedToUnitInterval) {
  RngStream rng(1, StreamDomain::Test, 23);
  const ExplosionParams p{1.0, 0.98, 0.02};
  for (int i = 0; i < 1000; ++i) {
    const double s = explode_imposters(0.0, p, rng);
    ASSERT_GE(s, 0.96);
    ASSERT_LE(s, 1.0);
  }
}

TEST(Simulation, CheckpointEqualsFreshRun) {
  const auto cfg = small_config();
  const auto full = run_simulation(cfg, RunOptions{2});
  ASSERT_EQ(full.checkpoints.size(), 3U);
  for (const auto& cp : full.checkpoints) {
    auto fresh_cfg = cfg;
    fresh_cfg.num_terminals = cp.terminals;
    fresh_cfg.checkpoints = {};
    const auto fresh = run_simulation(fresh_cfg, RunOptions{1});
    EXPECT_EQ(cp.genuine, fresh.genuine) << cp.terminals;
    EXPECT_EQ(cp.imposter, fresh.imposter) << cp.terminals;
  }
  EXPECT_EQ(full.checkpoints.back().terminals, 8U);
}

TEST(Simulation, WorkerCountDoesNotChangeReport) {
  auto cfg = small_config();
  cfg.explosion = ExplosionParams{};
  const auto one = report_to_json(run_simulation(cfg, RunOptions{1}), false);
  for (unsigned w : {4U, 8U}) {
    EXPECT_EQ(report_to_json(run_simulation(cfg, RunOptions{w}), false), one) << w;
  }
}

TEST(Simulation, HistogramsMatchSumOfTerminals) {
  const auto cfg = small_config();
  const auto db = generate_database(cfg.num_identities, cfg.samples_per_identity,
                                    cfg.flip_probability, cfg.master_seed);
  const auto report = run_simulation(cfg, db, RunOptions{3});
  ScoreHistogram g(ScoreKind::Genuine), i(ScoreKind::Imposter);
  for (std::uint32_t t = 0; t < cfg.num_terminals; ++t) {
    const auto r = run_terminal(t, db, report.grammar, cfg);
    g += r.genuine_hist;
    i += r.imposter_hist;
  }
  EXPECT_EQ(report.genuine, g);
  EXPECT_EQ(report.imposter, i);
  EXPECT_EQ(report.grammar.version, 2U);
  EXPECT_EQ(report.cu_theory_identities, cfg.num_identities);
  EXPECT_TRUE(report.failures.empty());
}

TEST(Config, ValidationNamesTheField) {
  auto c = small_config();
  c.num_terminals = 0;
  EXPECT_NE(config_error_message(c).find("num_terminals"), std::string::npos);
  c = small_config();
  c.flip_probability = 0.5;
  EXPECT_NE(config_error_message(c).find("flip_probability"), std::string::npos);
  c = small_config();
  c.codes_per_enrollment = 4;
  EXPECT_NE(config_error_message(c).find("codes_per_enrollment"), std::string::npos);
  c = small_config();
  c.explosion = ExplosionParams{1.5, 0.3725, 0.05};
  EXPECT_NE(config_error_message(c).find("explosion.fraction"), std::string::npos);
  c = small_config();
  c.three_valent = ThreeValentConfig{0.5, 0.4};
  EXPECT_NE(config_error_message(c).find("three_valent"), std::string::npos);
  c = small_config();
  c.epsilon = 0.0;
  EXPECT_NE(config_error_message(c).find("epsilon"), std::string::npos);
  EXPECT_EQ(kind_of([&] { run_simulation(c); }), ErrorKind::Configuration);
}

TEST(Logic, ThreeValentVerdictAndTrace) {
  auto cfg = small_config();
  cfg.logic = LogicChoice::ThreeValent;
  cfg.three_valent = ThreeValentConfig{0.0, 0.99};
  const auto report = run_simulation(cfg, RunOptions{1});
  EXPECT_EQ(report.logic.logic, LogicChoice::ThreeValent);
  EXPECT_EQ(report.logic.verdict, "inconsistent");
  EXPECT_GT(report.logic.ep_count, 0U);
  ASSERT_TRUE(report.logic.sample_trace);
  EXPECT_TRUE(check_liar_trace(*report.logic.sample_trace, *cfg.three_valent));
}

TEST(Logic, ThreeValentOracleCount) {
  ScoreHistogram g(ScoreKind::Genuine, 100), i(ScoreKind::Imposter, 100);
  for (double s : {0.9, 0.47, 0.46}) g.record(s);
  for (double s : {0.1, 0.48}) i.record(s);
  const auto e = evaluate_3v(g, i, ThreeValentConfig{0.45, 0.50});
  EXPECT_EQ(e.ep_count, 3U);
  const auto none = evaluate_3v(g, i, ThreeValentConfig{0.95, 0.96});
  EXPECT_EQ(none.ep_count, 0U);
  EXPECT_EQ(none.verdict, "consistent");
  EXPECT_FALSE(none.sample_trace);
}

TEST(Logic, EightValentNeverPaNa) {
  RngStream rng(1, StreamDomain::Test, 24);
  const auto gen = testing::uniform_scores(rng, 20000, 0.0, 1.0);
  const auto imp = testing::uniform_scores(rng, 20000, 0.0, 1.0);
  const auto e = evaluate_8v(testing::histogram_of(ScoreKind::Genuine, gen),
                             testing::histogram_of(ScoreKind::Imposter, imp),
                             SafetyInterval{0.3725, 0.55});
  EXPECT_EQ(e.pa_na_count, 0U);
  EXPECT_EQ(e.verdict, "almost consistent");
  EXPECT_EQ(e.f0_mass + e.fu_mass + e.f1_mass, 40000U);
}

TEST(Summary, AbsoluteSafetyIsFlaggedCalibrated) {
  const auto report = run_simulation(small_config(), RunOptions{1});
  const auto s = summarize(report);
  EXPECT_TRUE(s.absolute_safety_calibrated);
  EXPECT_DOUBLE_EQ(s.absolute_safety_target, 0.8383);
  EXPECT_EQ(s.genuine_total, report.genuine.total());
  EXPECT_EQ(s.absolute_safety_count, absolute_safety(report.genuine, report.imposter).count);
}

}  // namespace
}  // namespace iivds
