// Runs the flip-probability calibration against the FAR/FRR anchors and
// writes every probe to a JSON fixture.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "iivds/error.hpp"
#include "iivds/iris_synth.hpp"

namespace {

nlohmann::json probe_json(const iivds::CalibrationProbe& p) {
  return {{"flip_probability", p.flip_probability},
          {"far", p.far},
          {"frr", p.frr},
          {"far_residual", p.far_residual},
          {"frr_residual", p.frr_residual},
          {"residual", p.residual()},
          {"genuine_count", p.genuine_count},
          {"imposter_count", p.imposter_count}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrate the synthetic generator's flip probability"};
  iivds::RateAnchor far{0.475, 3.79e-8};
  iivds::RateAnchor frr{0.55, 2.70e-4};
  std::uint64_t budget = 2'000'000;
  std::uint64_t seed = 1;
  iivds::CalibrationOptions options;
  std::string out = "calibration.json";
  app.add_option("--far-threshold", far.threshold);
  app.add_option("--far-rate", far.rate);
  app.add_option("--frr-threshold", frr.threshold);
  app.add_option("--frr-rate", frr.rate);
  app.add_option("--budget", budget, "Comparison budget across all probes");
  app.add_option("--seed", seed);
  app.add_option("--iterations", options.iterations);
  app.add_option("--quorum", options.quorum);
  app.add_option("--out", out);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  iivds::CalibrationResult result;
  try {
    result = iivds::calibrate_flip_probability(far, frr, budget, seed, options);
  } catch (const iivds::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == iivds::ErrorKind::Parameter ? 2 : 1;
  }

  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : result.probes) probes.push_back(probe_json(p));
  const nlohmann::json doc{
      {"anchors",
       {{"far", {{"threshold", far.threshold}, {"rate", far.rate}}},
        {"frr", {{"threshold", frr.threshold}, {"rate", frr.rate}}}}},
      {"seed", seed},
      {"trial_budget", budget},
      {"options",
       {{"num_identities", options.num_identities},
        {"samples_per_identity", options.samples_per_identity},
        {"codes_per_enrollment", options.codes_per_enrollment},
        {"quorum", options.quorum},
        {"iterations", options.iterations},
        {"tolerance_decades", options.tolerance_decades}}},
      {"flip_probability", result.flip_probability},
      {"attained", result.attained},
      {"best", probe_json(result.best)},
      {"probes", probes}};
  std::ofstream file(out, std::ios::trunc);
  file << doc.dump(2) << "\n";
  if (!file) {
    std::cerr << "error: cannot write " << out << "\n";
    return 1;
  }
  std::cout << "flip_probability " << result.flip_probability << " residual "
            << result.best.residual() << (result.attained ? " (attained)" : " (not attained)")
            << "\n";
  return result.attained ? 0 : 1;
}
