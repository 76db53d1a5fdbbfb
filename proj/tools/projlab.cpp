// projlab: run simulator experiments from a JSON config.
// Exit codes: 0 success, 2 usage or config error, 3 runtime error.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "projlab/commands.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file (defaults apply when omitted)");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "root seed, overrides the config");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

projlab::CommandContext context(const CommonFlags& f) {
  projlab::CommandContext ctx;
  if (!f.config.empty()) ctx.config = projlab::load_config(f.config);
  if (f.seed) ctx.config.seed = *f.seed;
  ctx.out_dir = f.out;
  ctx.jobs = f.jobs;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projector-based adversarial patch simulator"};
  app.set_version_flag("--version", std::string(projlab::kToolVersion));
  app.require_subcommand(1);

  CommonFlags flags;
  std::string model_path, image_path;

  auto* attack = app.add_subcommand("attack", "learn one patch for the configured scene and scenario");
  auto* sweep = app.add_subcommand("sweep", "lumens x lux x distance x angle grid with per-factor ANOVA");
  auto* norms = app.add_subcommand("norms", "scenario suite and per-scenario perturbation norms");
  auto* surface = app.add_subcommand("surface", "projection attack across surface colors");
  auto* transfer = app.add_subcommand("transfer", "cross-detector transfer matrix");
  auto* cm = app.add_subcommand("countermeasure", "projection-detection classifier");
  cm->require_subcommand(1);
  auto* cm_train = cm->add_subcommand("train", "generate frames, train and evaluate");
  auto* cm_eval = cm->add_subcommand("eval", "evaluate a saved model on a fresh seeded set");
  auto* cm_gate = cm->add_subcommand("gate", "pass or flag one PPM frame");
  for (auto* c : {attack, sweep, norms, surface, transfer, cm_train, cm_eval, cm_gate}) add_common(c, flags);
  cm_eval->add_option("--model", model_path, "model container")->required();
  cm_gate->add_option("--model", model_path, "model container")->required();
  cm_gate->add_option("--image", image_path, "PPM frame")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const projlab::CommandContext ctx = context(flags);
    if (*attack) projlab::cmd_attack(ctx);
    else if (*sweep) projlab::cmd_sweep(ctx);
    else if (*norms) projlab::cmd_norms(ctx);
    else if (*surface) projlab::cmd_surface(ctx);
    else if (*transfer) projlab::cmd_transfer(ctx);
    else if (*cm_train) projlab::cmd_countermeasure_train(ctx);
    else if (*cm_eval) projlab::cmd_countermeasure_eval(ctx, model_path);
    else if (*cm_gate) std::cout << to_string(projlab::cmd_countermeasure_gate(ctx, model_path, image_path).decision) << "\n";
  } catch (const projlab::Error& e) {
    std::cerr << "projlab: " << e.what() << "\n";
    return e.code() == projlab::ErrorCode::Config ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "projlab: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
