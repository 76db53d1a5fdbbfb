#pragma once

// Experiment commands behind the projlab CLI. Each writes its outputs into
// `out_dir` and returns the file names it wrote (relative to out_dir).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "projlab/config.hpp"
#include "projlab/detector_io.hpp"
#include "projlab/report.hpp"

namespace projlab {

inline constexpr const char* kToolVersion = "projlab 1.0.0";

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir;
  int jobs = 1;
};

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    require(!ec, ErrorCode::Io, "cannot create output directory " + dir_.string());
  }
  void text(const std::string& name, const std::string& content) {
    detail::write_all(dir_ / name, content);
    files_.push_back(name);
  }
  void json(const std::string& name, const Json& j) { text(name, json_text(j)); }
  void ppm(const std::string& name, const Image& img) {
    write_ppm(dir_ / name, img);
    files_.push_back(name);
  }
  void binary(const std::string& name, const Container& c) {
    write_container((dir_ / name).string(), c);
    files_.push_back(name);
  }
  const std::filesystem::path& path() const noexcept { return dir_; }
  const std::vector<std::string>& files() const noexcept { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

// ---------------------------------------------------------------------------
// Seed fan-out: every consumer of randomness gets its own derived seed.

inline std::uint64_t derived_seed(std::uint64_t root, std::uint64_t tag) { return mix64(root ^ stream_id({0xF00D, tag})); }

enum SeedTag : std::uint64_t {
  kSeedAttack = 1,
  kSeedLinear = 2,
  kSeedTrainSet = 3,
  kSeedTrainSplit = 4,
  kSeedEvalSet = 5,
  kSeedChannel = 6,
};

/// Config with the root seed pushed into every seeded sub-config.
inline RunConfig seeded(RunConfig c) {
  c.digital_attack.seed = derived_seed(c.seed, kSeedAttack);
  c.physical_attack.seed = derived_seed(c.seed, kSeedAttack);
  c.channel.seed = derived_seed(c.seed, kSeedChannel);
  return c;
}

inline std::shared_ptr<const TemplateDetector> make_template_detector(const RunConfig& c) {
  TemplateDetectorModel m = make_template_model({kAllObjects.begin(), kAllObjects.end()}, c.detector.pyramid);
  m.slope = c.detector.slope;
  m.offset = c.detector.offset;
  return std::make_shared<TemplateDetector>(std::move(m), c.detector.report_threshold);
}

inline std::shared_ptr<const LinearDetector> make_linear_from_config(const RunConfig& c) {
  return std::make_shared<LinearDetector>(make_linear_detector({kAllObjects.begin(), kAllObjects.end()},
                                                               derived_seed(c.seed, kSeedLinear), c.linear.per_class,
                                                               c.linear.epochs, c.linear.lr,
                                                               c.detector.report_threshold));
}

/// Each object at its catalog distance and size, lit and surfaced like `base`.
inline std::vector<SceneConfig> suite_scenes(const SceneConfig& base, const std::vector<ObjectId>& objects) {
  std::vector<SceneConfig> out;
  for (ObjectId o : objects) {
    const SceneConfig d = default_scene(o);
    SceneConfig s = base;
    s.object = o;
    s.object_size_m = d.object_size_m;
    s.distance_m = d.distance_m;
    out.push_back(s);
  }
  return out;
}

inline Json manifest_json(const std::string& command, const RunConfig& c, const std::vector<std::string>& files,
                          double wall_s) {
  return {{"command", command},
          {"config", config_to_json(c)},
          {"seed", c.seed},
          {"tool_version", kToolVersion},
          {"outputs", files},
          {"wall_time_s", wall_s}};
}

namespace detail {

/// Runs `body`, then writes config.json (the resolved config, usable as a
/// replay input) and manifest.json.
template <class Body>
std::vector<std::string> run_command(const std::string& name, const CommandContext& ctx, Body&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  OutputDir out(ctx.out_dir);
  const RunConfig cfg = seeded(ctx.config);
  body(cfg, out);
  out.json("config.json", config_to_json(ctx.config));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<std::string> files = out.files();
  files.push_back("manifest.json");
  out.json("manifest.json", manifest_json(name, ctx.config, files, wall));
  return files;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline std::vector<std::string> cmd_attack(const CommandContext& ctx) {
  return detail::run_command("attack", ctx, [&](const RunConfig& c, OutputDir& out) {
    const Scenario sc = c.attack.scenario;
    require(sc != Scenario::Clean, ErrorCode::Config, "attack.scenario must be dl_da, dl_pa or pl_pa");
    const auto det = make_template_detector(c);
    const std::optional<StereoRig> rig = c.attack.stereo ? std::optional<StereoRig>(c.stereo) : std::nullopt;
    AttackTrace trace;
    ExperimentRecord rec;
    if (sc == Scenario::PlPa) {
      trace = run_papla_trace(c.scene, *det, c.physical_attack, c.channel);
      rec = papla_record(c.scene, *det, trace, c.physical_attack, c.channel, rig);
    } else {
      trace = run_dl_da(c.scene, *det, c.digital_attack);
      rec = sc == Scenario::DlDa ? dl_da_record(c.scene, *det, trace, c.digital_attack.seed, rig)
                                 : run_dl_pa(c.scene, *det, trace, c.digital_attack, c.channel, rig);
    }
    Json t = trace_json(trace);
    t["config"] = config_to_json(c);
    out.json("trace.json", t);
    out.ppm("patch.ppm", trace.final_patch.raster);
    out.json("record.json", record_json(rec));
  });
}

inline std::vector<std::string> cmd_sweep(const CommandContext& ctx) {
  return detail::run_command("sweep", ctx, [&](const RunConfig& c, OutputDir& out) {
    const auto det = make_template_detector(c);
    SweepConfig sc;
    sc.base = c.scene;
    sc.levels = c.sweep;
    sc.attack = c.physical_attack;
    sc.channel = c.channel;
    sc.jobs = ctx.jobs;
    const SweepResult r = run_factor_sweep(sc, *det);
    out.text("grid.csv", sweep_grid_csv(r.cells));
    Json anova = Json::array();
    for (const FactorSummary& f : r.factors) anova.push_back(anova_json(f.anova));
    out.json("anova.json", {{"factors", anova}});
    out.text("box_stats.csv", box_stats_csv(r.factors));
  });
}

inline std::vector<std::string> cmd_norms(const CommandContext& ctx) {
  return detail::run_command("norms", ctx, [&](const RunConfig& c, OutputDir& out) {
    const auto det = make_template_detector(c);
    SuiteConfig s;
    s.scenes = suite_scenes(c.scene, c.suite.objects);
    s.scenarios = c.suite.scenarios;
    s.digital = c.digital_attack;
    s.physical = c.physical_attack;
    s.channel = c.channel;
    s.rig = c.stereo;
    s.stereo = c.suite.stereo;
    s.jobs = ctx.jobs;
    const std::vector<ExperimentRecord> records = run_scenario_suite(s, *det);
    out.text("records.csv", records_csv(records));
    out.text("norms.csv", norms_csv(run_norms_comparison(records)));
  });
}

inline std::vector<std::string> cmd_surface(const CommandContext& ctx) {
  return detail::run_command("surface", ctx, [&](const RunConfig& c, OutputDir& out) {
    const auto det = make_template_detector(c);
    SurfaceConfig sc;
    sc.base = suite_scenes(c.scene, {c.surface.object}).front();
    sc.colors = c.surface.colors;
    sc.repeats = c.surface.repeats;
    sc.attack = c.physical_attack;
    sc.channel = c.channel;
    sc.jobs = ctx.jobs;
    out.text("surface.csv", surface_csv(run_surface_study(sc, *det)));
  });
}

inline std::vector<std::string> cmd_transfer(const CommandContext& ctx) {
  return detail::run_command("transfer", ctx, [&](const RunConfig& c, OutputDir& out) {
    std::vector<NamedDetector> dets;
    for (const std::string& name : c.transfer.detectors) {
      if (name == "template") dets.push_back({name, make_template_detector(c)});
      else dets.push_back({name, make_linear_from_config(c)});
    }
    TransferConfig tc;
    tc.objects = c.transfer.objects;
    tc.methods = c.transfer.methods;
    tc.scenarios = c.transfer.scenarios;
    tc.digital = c.digital_attack;
    tc.physical = c.physical_attack;
    tc.nap_tv_weight = c.transfer.nap_tv_weight;
    tc.nap_palette = c.transfer.nap_palette;
    tc.channel = c.channel;
    tc.jobs = ctx.jobs;
    const TransferResult r = run_transfer_matrix(tc, dets);
    out.text("transfer_cells.csv", transfer_cells_csv(r.cells));
    out.text("transfer_averages.csv", transfer_averages_csv(r.averages));
  });
}

// ---------------------------------------------------------------------------
// Countermeasure

inline std::vector<LabeledFrame> countermeasure_training_set(const RunConfig& c, int jobs) {
  const auto& cm = c.countermeasure;
  return generate_dataset(cm.n_patched, cm.n_unpatched, cm.ranges, derived_seed(c.seed, kSeedTrainSet), c.channel, jobs);
}

inline std::vector<LabeledFrame> countermeasure_eval_set(const RunConfig& c, int jobs) {
  const auto& cm = c.countermeasure;
  return generate_dataset(cm.eval_n_patched, cm.eval_n_unpatched, cm.ranges, derived_seed(c.seed, kSeedEvalSet),
                          c.channel, jobs);
}

inline std::vector<std::string> cmd_countermeasure_train(const CommandContext& ctx) {
  return detail::run_command("countermeasure train", ctx, [&](const RunConfig& c, OutputDir& out) {
    const std::vector<LabeledFrame> frames = countermeasure_training_set(c, ctx.jobs);
    std::string manifest;
    if (c.countermeasure.write_frames) std::filesystem::create_directories(out.path() / "frames");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "frames/frame_%04zu.ppm", i);
      Json line = {{"index", i}, {"label", to_string(frames[i].label)}, {"provenance", provenance_json(frames[i].provenance)}};
      line["path"] = c.countermeasure.write_frames ? Json(name) : Json(nullptr);
      if (c.countermeasure.write_frames) out.ppm(name, frames[i].image);
      manifest += line.dump() + "\n";
    }
    out.text("dataset.jsonl", manifest);
    RngStream split(derived_seed(c.seed, kSeedTrainSplit), 0);
    const ClassifierModel model = train_classifier(frames, c.countermeasure.train, split);
    out.binary("model.bin", classifier_to_container(model));
    out.text("history.csv", history_csv(model.history));
    const EpochStats& best = model.history[static_cast<std::size_t>(model.best_epoch - 1)];
    out.json("eval.json", {{"best_epoch", model.best_epoch},
                           {"epochs_run", model.epochs_run},
                           {"val_loss", best.val_loss},
                           {"val_accuracy", best.val_accuracy},
                           {"val_auc", best.val_auc},
                           {"held_out", eval_report_json(evaluate(model, countermeasure_eval_set(c, ctx.jobs)))}});
  });
}

inline std::vector<std::string> cmd_countermeasure_eval(const CommandContext& ctx, const std::string& model_path) {
  const ClassifierModel model = classifier_from_container(read_container(model_path));
  return detail::run_command("countermeasure eval", ctx, [&](const RunConfig& c, OutputDir& out) {
    out.json("eval.json", eval_report_json(evaluate(model, countermeasure_eval_set(c, ctx.jobs))));
  });
}

struct GateOutcome {
  GateDecision decision{};
  double score = 0.0;
  std::vector<std::string> files;
};

inline GateOutcome cmd_countermeasure_gate(const CommandContext& ctx, const std::string& model_path,
                                           const std::string& image_path) {
  const ClassifierModel model = classifier_from_container(read_container(model_path));
  const Image img = read_ppm(image_path);
  GateOutcome g;
  g.score = classifier_score(model, img);
  g.decision = gate(img, model, ctx.config.countermeasure.gate_threshold);
  g.files = detail::run_command("countermeasure gate", ctx, [&](const RunConfig& c, OutputDir& out) {
    out.json("gate.json", {{"decision", to_string(g.decision)},
                           {"score", g.score},
                           {"threshold", c.countermeasure.gate_threshold}});
  });
  return g;
}

}  // namespace projlab
