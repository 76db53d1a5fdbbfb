#include <gtest/gtest.h>

#include <filesystem>

#include "projlab/commands.hpp"

using namespace projlab;

namespace {

std::filesystem::path fresh(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("projlab_cmd_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) { return detail::read_all(p); }

std::size_t data_rows(const std::string& csv) {
  std::size_t n = 0;
  for (std::size_t i = 0; (i = csv.find("\r\n", i)) != std::string::npos; i += 2) ++n;
  return n - 1;
}

RunConfig tiny() {
  RunConfig c;
  c.digital_attack.max_iters = 3;
  c.physical_attack.max_iters = 2;
  c.physical_attack.eval_captures = 2;
  return c;
}

}  // namespace

TEST(Commands, AttackWritesFourFilesAndIsReproducible) {
  CommandContext ctx{tiny(), fresh("attack1"), 1};
  const auto files = cmd_attack(ctx);
  for (const char* f : {"trace.json", "patch.ppm", "record.json", "manifest.json"})
    EXPECT_TRUE(std::filesystem::exists(ctx.out_dir / f)) << f;
  EXPECT_NE(std::find(files.begin(), files.end(), "config.json"), files.end());
  CommandContext again{tiny(), fresh("attack2"), 1};
  cmd_attack(again);
  EXPECT_EQ(slurp(ctx.out_dir / "record.json"), slurp(again.out_dir / "record.json"));
  EXPECT_EQ(slurp(ctx.out_dir / "trace.json"), slurp(again.out_dir / "trace.json"));
}

TEST(Commands, ReplayFromEchoedConfig) {
  CommandContext ctx{tiny(), fresh("replay1"), 1};
  ctx.config.seed = 99;
  cmd_attack(ctx);
  CommandContext replay{load_config((ctx.out_dir / "config.json").string()), fresh("replay2"), 1};
  cmd_attack(replay);
  EXPECT_EQ(slurp(ctx.out_dir / "record.json"), slurp(replay.out_dir / "record.json"));
}

TEST(Commands, SingleCellSweepIsDegenerate) {
  RunConfig c = tiny();
  c.sweep = {{6000}, {100}, {0.5}, {0}};
  CommandContext ctx{c, fresh("sweep1"), 1};
  cmd_sweep(ctx);
  EXPECT_EQ(data_rows(slurp(ctx.out_dir / "grid.csv")), 1u);
  const Json anova = Json::parse(slurp(ctx.out_dir / "anova.json"));
  for (const auto& f : anova["factors"]) EXPECT_TRUE(f["degenerate"].get<bool>());
}

TEST(Commands, NormsWithoutAttacksAreZero) {
  RunConfig c = tiny();
  c.suite.objects = {ObjectId::Car};
  c.suite.scenarios = {Scenario::Clean};
  CommandContext ctx{c, fresh("norms"), 1};
  cmd_norms(ctx);
  const std::string csv = slurp(ctx.out_dir / "norms.csv");
  EXPECT_EQ(csv,
            "scenario,count,mean_l2,mean_linf,mean_l0_pct\r\n"
            "dl_da,0,0,0,0\r\ndl_pa,0,0,0,0\r\npl_pa,0,0,0,0\r\n");
}

TEST(Commands, JobsDoNotChangeOutput) {
  RunConfig c = tiny();
  c.sweep = {{1800, 6000}, {100}, {0.5}, {0, 20}};
  CommandContext one{c, fresh("jobs1"), 1}, two{c, fresh("jobs2"), 2};
  cmd_sweep(one);
  cmd_sweep(two);
  EXPECT_EQ(slurp(one.out_dir / "grid.csv"), slurp(two.out_dir / "grid.csv"));
  EXPECT_EQ(slurp(one.out_dir / "anova.json"), slurp(two.out_dir / "anova.json"));
}

TEST(Commands, CleanScenarioRejectedForAttack) {
  RunConfig c = tiny();
  c.attack.scenario = Scenario::Clean;
  CommandContext ctx{c, fresh("clean"), 1};
  try {
    cmd_attack(ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(Commands, CountermeasureTrainEvalGate) {
  RunConfig c = tiny();
  c.countermeasure.n_patched = 30;
  c.countermeasure.n_unpatched = 30;
  c.countermeasure.eval_n_patched = 10;
  c.countermeasure.eval_n_unpatched = 10;
  c.countermeasure.train.epochs_max = 40;
  c.countermeasure.write_frames = false;
  CommandContext ctx{c, fresh("cm"), 1};
  cmd_countermeasure_train(ctx);
  for (const char* f : {"model.bin", "eval.json", "history.csv", "dataset.jsonl"})
    EXPECT_TRUE(std::filesystem::exists(ctx.out_dir / f)) << f;
  const std::string model = (ctx.out_dir / "model.bin").string();
  CommandContext ev{c, fresh("cm_eval"), 1};
  cmd_countermeasure_eval(ev, model);
  EXPECT_TRUE(std::filesystem::exists(ev.out_dir / "eval.json"));
  const auto frame = ctx.out_dir / "frame.ppm";
  write_ppm(frame, render_clean(default_scene(ObjectId::Car)));
  CommandContext g{c, fresh("cm_gate"), 1};
  g.config.countermeasure.gate_threshold = 0.0;
  EXPECT_EQ(cmd_countermeasure_gate(g, model, frame.string()).decision, GateDecision::Flag);
}
