#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "icscream/error.hpp"
#include "icscream/pipeline.hpp"
#include "icscream/synthetic.hpp"

namespace {

int report_error(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screening, GP metamodelling and exceedance mapping for black-box simulators"};
  app.require_subcommand(1);

  icscream::RunOptions run;
  std::uint64_t seed_value = 0;
  const auto add_study = [&](CLI::App* cmd) {
    cmd->add_option("--config", run.config, "Study config (JSON)")->required();
    cmd->add_option("--out", run.out, "Report directory")->required();
    cmd->add_option("--seed", seed_value, "Overrides the config seed");
  };
  auto* screen = app.add_subcommand("screen", "HSIC / target-HSIC screening");
  auto* fit = app.add_subcommand("fit", "Sequential GP fit on the screening ranking");
  auto* validate = app.add_subcommand("validate", "Cross-validation diagnostics");
  auto* map = app.add_subcommand("map", "Conditional exceedance map over the penalize pair");
  auto* all = app.add_subcommand("run-all", "screen, fit, validate and map");
  for (auto* cmd : {screen, fit, validate, map, all}) add_study(cmd);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic study with known ground truth");
  std::string function = "bell-interaction";
  std::optional<std::size_t> d_total;
  std::size_t n = 300;
  std::uint64_t synth_seed = 0;
  std::optional<double> gamma;
  std::filesystem::path synth_out;
  synth->add_option("--function", function, "additive-linear, ishigami-extended or bell-interaction");
  synth->add_option("--d", d_total, "Total number of inputs");
  synth->add_option("--n", n, "Sample size");
  synth->add_option("--seed", synth_seed, "Sample seed");
  synth->add_option("--gamma", gamma, "bell-interaction: interaction strength");
  synth->add_option("--out", synth_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      icscream::SyntheticSpec spec;
      switch (icscream::parse_synthetic_function(function)) {
        case icscream::SyntheticFunction::additive_linear:
          spec = icscream::SyntheticSpec::additive_linear_default(d_total.value_or(50), n, synth_seed);
          break;
        case icscream::SyntheticFunction::ishigami_extended:
          spec = icscream::SyntheticSpec::ishigami_default(d_total.value_or(10), n, synth_seed);
          break;
        case icscream::SyntheticFunction::bell_interaction:
          spec = icscream::SyntheticSpec::bell_default(d_total.value_or(20), n, synth_seed);
          break;
      }
      if (gamma) spec.bell.gamma = *gamma;
      icscream::cmd_synth(spec, synth_out);
      return 0;
    }
    for (auto* cmd : {screen, fit, validate, map, all}) {
      if (cmd->parsed() && cmd->count("--seed") > 0) run.seed = seed_value;
    }
    if (screen->parsed()) icscream::cmd_screen(run);
    if (fit->parsed()) icscream::cmd_fit(run);
    if (validate->parsed()) icscream::cmd_validate(run);
    if (map->parsed()) icscream::cmd_map(run);
    if (all->parsed()) icscream::run_all(run);
  } catch (const icscream::Error& e) {
    return report_error(std::string(icscream::to_string(e.kind())), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io_error", e.what());
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what());
  }
  return 0;
}
