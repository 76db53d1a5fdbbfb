#pragma once

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "projlab/attack.hpp"
#include "projlab/stats.hpp"

namespace projlab {

// ---------------------------------------------------------------------------
// Environmental factor sweep

struct SweepLevels {
  std::vector<double> lumens{1800, 3000, 6000};
  std::vector<double> lux{100, 200, 400};
  std::vector<double> distance_m{0.5, 1.0, 1.5};
  std::vector<double> angle_deg{-20, 0, 20};

  std::size_t cell_count() const { return lumens.size() * lux.size() * distance_m.size() * angle_deg.size(); }
};

struct SweepConfig {
  SceneConfig base = standard_scenes({ObjectId::Car}).front();
  SweepLevels levels;
  AttackConfig attack = AttackConfig::physical();
  ChannelParams channel;
  int jobs = 1;
};

struct SweepCell {
  double lumens = 0, lux = 0, distance_m = 0, angle_deg = 0;
  std::uint64_t seed = 0;
  double clean_conf = 0.0;
  double patched_conf = 0.0;
  std::optional<double> reduction;
  int iterations = 0;
};

struct FactorSummary {
  std::string factor;
  std::vector<double> levels;
  std::vector<BoxStats> boxes;  ///< per level, over detectable cells
  AnovaResult anova;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<FactorSummary> factors;  ///< lumens, lux, distance_m, angle_deg
};

inline std::string format_level(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::vector<double> cell_factor_values(const SweepCell& c) { return {c.lumens, c.lux, c.distance_m, c.angle_deg}; }

inline const std::vector<std::string>& sweep_factor_names() {
  static const std::vector<std::string> names{"lumens", "lux", "distance_m", "angle_deg"};
  return names;
}

/// Per-factor grouping of cell reductions, pooling the other factors.
/// Cells whose clean object went undetected are left out.
inline std::vector<FactorSummary> summarize_sweep(const std::vector<SweepCell>& cells, const SweepLevels& lv) {
  const std::vector<std::vector<double>> levels{lv.lumens, lv.lux, lv.distance_m, lv.angle_deg};
  std::vector<FactorSummary> out;
  for (std::size_t f = 0; f < levels.size(); ++f) {
    FactorSummary s;
    s.factor = sweep_factor_names()[f];
    s.anova.factor = s.factor;
    std::vector<std::vector<double>> groups;
    for (double level : levels[f]) {
      std::vector<double> g;
      for (const SweepCell& c : cells)
        if (c.reduction && cell_factor_values(c)[f] == level) g.push_back(*c.reduction);
      s.levels.push_back(level);
      s.boxes.push_back(g.empty() ? BoxStats{} : box_stats(g));
      groups.push_back(std::move(g));
    }
    const bool testable = groups.size() >= 2 && std::all_of(groups.begin(), groups.end(),
                                                            [](const auto& g) { return g.size() >= 2; });
    if (testable) {
      const std::string name = s.anova.factor;
      s.anova = anova_oneway(groups);
      s.anova.factor = name;
    } else {
      s.anova.degenerate = true;
      for (const auto& g : groups) s.anova.group_medians.push_back(g.empty() ? 0.0 : median(g));
    }
    for (double level : levels[f]) s.anova.levels.push_back(format_level(level));
    out.push_back(std::move(s));
  }
  return out;
}

/// PL-PA attack on every grid cell, each with its own seed.
inline SweepResult run_factor_sweep(const SweepConfig& cfg, const Detector& det) {
  const SweepLevels& lv = cfg.levels;
  std::vector<SweepCell> cells;
  for (double lm : lv.lumens)
    for (double lx : lv.lux)
      for (double d : lv.distance_m)
        for (double a : lv.angle_deg) {
          SweepCell c;
          c.lumens = lm;
          c.lux = lx;
          c.distance_m = d;
          c.angle_deg = a;
          cells.push_back(c);
        }
  parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
    SweepCell& c = cells[i];
    SceneConfig scene = cfg.base;
    scene.projector_lumens = c.lumens;
    scene.ambient_lux = c.lux;
    scene.distance_m = c.distance_m;
    scene.angle_deg = c.angle_deg;
    AttackConfig attack = cfg.attack;
    attack.seed = mix64(cfg.attack.seed ^ stream_id({0x5EE9, i}));
    c.seed = attack.seed;
    const PaplaResult r = run_papla(scene, det, attack, cfg.channel);
    c.clean_conf = r.record.clean_conf;
    c.patched_conf = r.record.patched_conf;
    c.reduction = r.record.reduction;
    c.iterations = r.trace.iterations;
  });
  SweepResult out;
  out.factors = summarize_sweep(cells, lv);
  out.cells = std::move(cells);
  return out;
}

// ---------------------------------------------------------------------------
// Surface color study

struct NamedAlbedo {
  std::string name;
  Rgb albedo;
};

inline std::vector<NamedAlbedo> default_surface_colors() {
  return {{"white", {1, 1, 1}},           {"gray_0.9", {0.9, 0.9, 0.9}}, {"gray_0.7", {0.7, 0.7, 0.7}},
          {"gray_0.5", {0.5, 0.5, 0.5}},  {"gray_0.3", {0.3, 0.3, 0.3}}, {"gray_0.1", {0.1, 0.1, 0.1}},
          {"dark_blue", {0.1, 0.1, 0.35}}, {"black", {0, 0, 0}}};
}

struct SurfaceConfig {
  SceneConfig base = standard_scenes({ObjectId::StopSign}).front();
  std::vector<NamedAlbedo> colors = default_surface_colors();
  int repeats = 3;
  AttackConfig attack = AttackConfig::physical();
  ChannelParams channel;
  int jobs = 1;
};

struct SurfaceRow {
  std::string name;
  Rgb albedo{};
  std::vector<double> reductions;  ///< one per detectable repeat
  double mean_reduction = 0.0;
  int undetected = 0;
};

inline std::vector<SurfaceRow> run_surface_study(const SurfaceConfig& cfg, const Detector& det) {
  require(cfg.repeats >= 1, ErrorCode::InvalidArgument, "repeats must be >= 1");
  const std::size_t reps = static_cast<std::size_t>(cfg.repeats);
  std::vector<std::optional<double>> results(cfg.colors.size() * reps);
  parallel_for(results.size(), cfg.jobs, [&](std::size_t i) {
    SceneConfig scene = cfg.base;
    scene.surface_albedo = cfg.colors[i / reps].albedo;
    AttackConfig attack = cfg.attack;
    attack.seed = mix64(cfg.attack.seed ^ stream_id({0x5C0F, i % reps}));
    results[i] = run_papla(scene, det, attack, cfg.channel).record.reduction;
  });
  std::vector<SurfaceRow> rows;
  for (std::size_t c = 0; c < cfg.colors.size(); ++c) {
    SurfaceRow row{cfg.colors[c].name, cfg.colors[c].albedo, {}, 0.0, 0};
    for (std::size_t r = 0; r < reps; ++r) {
      if (const auto& v = results[c * reps + r]) row.reductions.push_back(*v);
      else ++row.undetected;
    }
    if (!row.reductions.empty()) row.mean_reduction = mean(row.reductions);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Norm comparison across scenarios

struct ScenarioNorms {
  Scenario scenario{};
  std::size_t count = 0;
  double l2 = 0.0, linf = 0.0, l0_pct = 0.0;  ///< averages
};

/// Average norms(patched, clean) for each attack scenario; all-zero rows when a
/// scenario has no records.
inline std::vector<ScenarioNorms> run_norms_comparison(const std::vector<ExperimentRecord>& records) {
  std::vector<ScenarioNorms> out;
  for (Scenario sc : {Scenario::DlDa, Scenario::DlPa, Scenario::PlPa}) {
    ScenarioNorms s{sc};
    for (const ExperimentRecord& r : records) {
      if (r.scenario != sc) continue;
      const NormTriple n = norms(r.patched_image, r.clean_image);
      s.l2 += n.l2;
      s.linf += n.linf;
      s.l0_pct += n.l0_pct;
      ++s.count;
    }
    if (s.count) {
      s.l2 /= static_cast<double>(s.count);
      s.linf /= static_cast<double>(s.count);
      s.l0_pct /= static_cast<double>(s.count);
    }
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transferability matrix

struct NamedDetector {
  std::string name;
  std::shared_ptr<const Detector> detector;
};

struct TransferConfig {
  std::vector<ObjectId> objects{ObjectId::Car, ObjectId::StopSign, ObjectId::PottedPlant, ObjectId::Cup};
  std::vector<AttackMethod> methods{AttackMethod::DPatchLike, AttackMethod::NapLike};
  std::vector<Scenario> scenarios{Scenario::DlDa, Scenario::PlPa};
  AttackConfig digital = AttackConfig::digital();
  AttackConfig physical = AttackConfig::physical();
  double nap_tv_weight = 0.002;
  std::vector<Rgb> nap_palette;
  ChannelParams channel;
  int jobs = 1;
};

struct TransferCell {
  AttackMethod method{};
  Scenario scenario{};
  std::string source;
  std::string target;
  ObjectId object{};
  double clean_conf = 0.0;
  double patched_conf = 0.0;
  std::optional<double> conf_diff_pct;  ///< empty: clean object not detected ("-")
};

struct TransferAverage {
  AttackMethod method{};
  Scenario scenario{};
  double mean_conf_diff_pct = 0.0;
  std::size_t cells = 0;     ///< cells contributing to the mean
  std::size_t excluded = 0;  ///< "-" cells
};

struct TransferResult {
  std::vector<TransferCell> cells;
  std::vector<TransferAverage> averages;
};

inline AttackConfig with_method(AttackConfig cfg, AttackMethod m, double tv, const std::vector<Rgb>& palette) {
  cfg.method = m;
  if (m == AttackMethod::NapLike) {
    cfg.tv_weight = tv;
    cfg.palette = palette;
  }
  return cfg;
}

inline std::vector<TransferAverage> transfer_averages(const std::vector<TransferCell>& cells, const TransferConfig& cfg) {
  std::vector<TransferAverage> out;
  for (AttackMethod m : cfg.methods)
    for (Scenario sc : cfg.scenarios) {
      TransferAverage a{m, sc};
      for (const TransferCell& c : cells) {
        if (c.method != m || c.scenario != sc) continue;
        if (!c.conf_diff_pct) {
          ++a.excluded;
          continue;
        }
        a.mean_conf_diff_pct += *c.conf_diff_pct;
        ++a.cells;
      }
      if (a.cells) a.mean_conf_diff_pct /= static_cast<double>(a.cells);
      out.push_back(a);
    }
  return out;
}

/// Patches learned against each source detector, evaluated on every detector.
inline TransferResult run_transfer_matrix(const TransferConfig& cfg, const std::vector<NamedDetector>& detectors) {
  require(detectors.size() >= 2, ErrorCode::InvalidArgument, "transfer matrix needs at least two detectors");
  struct Job {
    AttackMethod method;
    Scenario scenario;
    std::size_t source;
    ObjectId object;
  };
  std::vector<Job> jobs;
  for (AttackMethod m : cfg.methods)
    for (Scenario sc : cfg.scenarios) {
      require(sc == Scenario::DlDa || sc == Scenario::PlPa, ErrorCode::InvalidArgument,
              "transfer scenarios are dl_da and pl_pa");
      for (std::size_t s = 0; s < detectors.size(); ++s)
        for (ObjectId o : cfg.objects) jobs.push_back({m, sc, s, o});
    }
  std::vector<std::vector<TransferCell>> per_job(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    const SceneConfig scene = standard_scenes({job.object}).front();
    const Detector& src = *detectors[job.source].detector;
    const bool digital = job.scenario == Scenario::DlDa;
    const AttackConfig attack =
        with_method(digital ? cfg.digital : cfg.physical, job.method, cfg.nap_tv_weight, cfg.nap_palette);
    const AttackTrace trace = digital ? run_dl_da(scene, src, attack) : run_papla_trace(scene, src, attack, cfg.channel);
    for (const NamedDetector& target : detectors) {
      const Evaluation ev =
          digital ? evaluate_application(scene, *target.detector, Application::Digital, &trace.final_patch,
                                         ChannelParams::ideal(), 1, attack.seed, std::nullopt)
                  : evaluate_application(scene, *target.detector, Application::Projection, &trace.final_patch,
                                         cfg.channel, attack.eval_captures, attack.seed, std::nullopt);
      TransferCell cell{job.method, job.scenario, detectors[job.source].name, target.name, job.object,
                        ev.clean_conf, ev.patched_conf, std::nullopt};
      if (ev.clean_conf > 0.0) cell.conf_diff_pct = reduction_pct(ev.clean_conf, ev.patched_conf);
      per_job[j].push_back(std::move(cell));
    }
  });
  TransferResult out;
  for (auto& v : per_job)
    for (auto& c : v) out.cells.push_back(std::move(c));
  out.averages = transfer_averages(out.cells, cfg);
  return out;
}

}  // namespace projlab
