#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "projlab/channel.hpp"
#include "projlab/detector.hpp"
#include "projlab/metrics.hpp"
#include "projlab/patch.hpp"
#include "projlab/scene.hpp"

namespace projlab {

enum class AttackMethod { DPatchLike, NapLike };
enum class UpdateRule { Spsa, FiniteDifference };
enum class Scenario { Clean, DlDa, DlPa, PlPa };

inline constexpr std::array<Scenario, 4> kAllScenarios{Scenario::Clean, Scenario::DlDa, Scenario::DlPa,
                                                       Scenario::PlPa};

inline std::string_view to_string(AttackMethod m) { return m == AttackMethod::NapLike ? "nap_like" : "dpatch_like"; }

inline AttackMethod parse_method(std::string_view s) {
  if (s == "dpatch_like") return AttackMethod::DPatchLike;
  if (s == "nap_like") return AttackMethod::NapLike;
  fail(ErrorCode::InvalidArgument, "unknown attack method: " + std::string(s));
}

inline std::string_view to_string(UpdateRule u) { return u == UpdateRule::Spsa ? "spsa" : "finite_difference"; }

inline UpdateRule parse_update_rule(std::string_view s) {
  if (s == "spsa") return UpdateRule::Spsa;
  if (s == "finite_difference") return UpdateRule::FiniteDifference;
  fail(ErrorCode::InvalidArgument, "unknown update rule: " + std::string(s));
}

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Clean: return "clean";
    case Scenario::DlDa: return "dl_da";
    case Scenario::DlPa: return "dl_pa";
    case Scenario::PlPa: return "pl_pa";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view s) {
  for (Scenario sc : kAllScenarios)
    if (to_string(sc) == s) return sc;
  fail(ErrorCode::InvalidArgument, "unknown scenario: " + std::string(s));
}

struct AttackConfig {
  AttackMethod method = AttackMethod::DPatchLike;
  UpdateRule update = UpdateRule::Spsa;
  int max_iters = 1000;
  double step_size = 5.0 / 255.0;
  int captures_per_update = 4;
  double spsa_c = 0.05;
  int spsa_samples = 1;
  int fd_block = 1;  ///< coordinates perturbed together in finite-difference mode
  double tv_weight = 0.0;
  std::vector<Rgb> palette;
  double palette_weight = 1.0;
  double early_stop_conf = 0.0;
  int patch_side = 8;
  int eval_captures = 10;
  std::uint64_t seed = 1;

  static AttackConfig digital() { return {}; }

  static AttackConfig physical() {
    AttackConfig c;
    c.max_iters = 50;
    c.step_size = 1.0;
    return c;
  }

  void validate() const {
    require(max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be >= 1");
    require(step_size >= 0.0, ErrorCode::InvalidArgument, "step_size must be non-negative");
    require(captures_per_update >= 1 && eval_captures >= 1, ErrorCode::InvalidArgument,
            "capture counts must be >= 1");
    require(spsa_c > 0.0, ErrorCode::InvalidArgument, "spsa_c must be positive");
    require(spsa_samples >= 1 && fd_block >= 1, ErrorCode::InvalidArgument, "spsa_samples and fd_block must be >= 1");
    require(tv_weight >= 0.0 && palette_weight >= 0.0, ErrorCode::InvalidArgument, "regularizer weights must be non-negative");
    require(early_stop_conf >= 0.0 && early_stop_conf <= 1.0, ErrorCode::InvalidArgument,
            "early_stop_conf must lie in [0,1]");
    require(patch_side >= 2, ErrorCode::InvalidArgument, "patch_side must be >= 2");
  }
};

struct AttackTrace {
  Scenario scenario = Scenario::DlDa;
  std::uint64_t seed = 0;
  std::vector<double> confidences;  ///< detector confidence at the start of each iteration
  Patch final_patch;
  int iterations = 0;
};

/// One (object, scenario, camera) measurement.
struct ExperimentRecord {
  ObjectId object{};
  Scenario scenario = Scenario::Clean;
  bool stereo = false;
  std::uint64_t seed = 0;
  double clean_conf = 0.0;
  double patched_conf = 0.0;
  std::optional<double> reduction;  ///< empty when the clean object was not detected
  NormTriple norms;                 ///< noiseless patched render against the clean render
  Image clean_image;
  Image patched_image;
};

// ---------------------------------------------------------------------------
// Objective

/// Anisotropic total variation summed over channels.
inline double total_variation(const Image& img) {
  double tv = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = img.at(x, y, c);
        if (x + 1 < img.width()) tv += std::abs(img.at(x + 1, y, c) - v);
        if (y + 1 < img.height()) tv += std::abs(img.at(x, y + 1, c) - v);
      }
  return tv;
}

/// Mean over pixels of the squared RGB distance to the nearest palette color;
/// 0 for an empty palette.
inline double palette_distance(const Image& img, const std::vector<Rgb>& palette) {
  if (palette.empty()) return 0.0;
  double sum = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (const Rgb& p : palette) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) d += (img.at(x, y, c) - p[c]) * (img.at(x, y, c) - p[c]);
        best = std::min(best, d);
      }
      sum += best;
    }
  return sum / static_cast<double>(img.pixel_count());
}

inline double attack_loss(double conf, const Patch& patch, const AttackConfig& cfg) {
  if (cfg.method == AttackMethod::DPatchLike) return conf;
  double loss = conf;
  if (cfg.tv_weight > 0.0) loss += cfg.tv_weight * total_variation(patch.raster);
  if (!cfg.palette.empty()) loss += cfg.palette_weight * palette_distance(patch.raster, cfg.palette);
  return loss;
}

// ---------------------------------------------------------------------------
// Gradient estimators

/// SPSA estimate of grad f at x: mean over `samples` Rademacher directions of
/// [f(x + c d) - f(x - c d)] / (2 c d_i).
template <class F>
std::vector<double> spsa_gradient(F&& f, const std::vector<double>& x, double c, int samples, RngStream& rng) {
  require(c > 0.0 && samples >= 1, ErrorCode::InvalidArgument, "spsa requires c > 0 and samples >= 1");
  std::vector<double> g(x.size(), 0.0), delta(x.size()), xp(x.size()), xm(x.size());
  for (int s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      delta[i] = rng.rademacher();
      xp[i] = x[i] + c * delta[i];
      xm[i] = x[i] - c * delta[i];
    }
    const double diff = f(xp) - f(xm);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] += diff / (2.0 * c * delta[i]);
  }
  for (double& v : g) v /= samples;
  return g;
}

/// Central finite differences, perturbing `block` consecutive coordinates at a time.
template <class F>
std::vector<double> fd_gradient(F&& f, const std::vector<double>& x, double c, int block) {
  require(c > 0.0 && block >= 1, ErrorCode::InvalidArgument, "finite differences require c > 0 and block >= 1");
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t b = 0; b < x.size(); b += static_cast<std::size_t>(block)) {
    const std::size_t e = std::min(x.size(), b + static_cast<std::size_t>(block));
    std::vector<double> xp = x, xm = x;
    for (std::size_t i = b; i < e; ++i) {
      xp[i] += c;
      xm[i] -= c;
    }
    const double d = (f(xp) - f(xm)) / (2.0 * c);
    for (std::size_t i = b; i < e; ++i) g[i] = d;
  }
  return g;
}

inline std::vector<double> patch_vector(const Patch& p) {
  return {p.raster.data().begin(), p.raster.data().end()};
}

/// Patch with `v` written into its raster, clamped to [0,1].
inline Patch patch_from_vector(const Patch& like, const std::vector<double>& v) {
  Patch out = like;
  auto d = out.raster.data();
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = static_cast<float>(clamp01(v[i]));
  return out;
}

using PatchObjective = std::function<double(const Patch&)>;

/// One descent step: patch <- clamp(patch - step_size * g). Perturbed patches
/// are clamped to [0,1] before the objective sees them.
inline Patch spsa_step(const PatchObjective& objective, const Patch& patch, const AttackConfig& cfg,
                       RngStream& rng) {
  const std::vector<double> x = patch_vector(patch);
  auto f = [&](const std::vector<double>& v) { return objective(patch_from_vector(patch, v)); };
  const std::vector<double> g = cfg.update == UpdateRule::Spsa
                                    ? spsa_gradient(f, x, cfg.spsa_c, cfg.spsa_samples, rng)
                                    : fd_gradient(f, x, cfg.spsa_c, cfg.fd_block);
  std::vector<double> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] - cfg.step_size * g[i];
  return patch_from_vector(patch, next);
}

// ---------------------------------------------------------------------------
// Scenarios

namespace detail {

inline RngStream attack_stream(std::uint64_t seed, ObjectId obj, std::string_view tag) {
  std::uint64_t h = 0;
  for (char ch : tag) h = h * 131 + static_cast<unsigned char>(ch);
  return RngStream(seed, stream_id({static_cast<std::uint64_t>(obj), h}));
}

/// Iterate: measure, record, maybe stop, update.
inline AttackTrace optimize(Scenario scenario, const std::function<double(const Patch&)>& measure,
                            const PatchObjective& objective, Patch patch, const AttackConfig& cfg,
                            RngStream& rng) {
  AttackTrace trace;
  trace.scenario = scenario;
  trace.seed = cfg.seed;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double conf = measure(patch);
    trace.confidences.push_back(conf);
    ++trace.iterations;
    if (conf <= cfg.early_stop_conf) break;
    patch = spsa_step(objective, patch, cfg, rng);
  }
  trace.final_patch = std::move(patch);
  return trace;
}

inline double mean_capture_conf(const Detector& det, const Image& scene, ObjectId label,
                                const ChannelParams& ch, int n, RngStream& rng) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += det.confidence(capture(scene, ch, rng), label);
  return sum / n;
}

}  // namespace detail

/// Digital learning: optimize against the noiseless digital composite.
inline AttackTrace run_dl_da(const SceneConfig& scene, const Detector& det, const AttackConfig& cfg) {
  cfg.validate();
  const SceneRenderer r(scene);
  RngStream init = detail::attack_stream(cfg.seed, scene.object, "init");
  RngStream rng = detail::attack_stream(cfg.seed, scene.object, "dl_da");
  const ObjectId label = scene.object;
  auto measure = [&](const Patch& p) { return det.confidence(r.digital(p), label); };
  auto objective = [&](const Patch& p) { return attack_loss(measure(p), p, cfg); };
  return detail::optimize(Scenario::DlDa, measure, objective, init_random_patch(cfg.patch_side, init), cfg, rng);
}

/// The physical loop: project, capture a batch, update.
inline AttackTrace run_papla_trace(const SceneConfig& scene, const Detector& det, const AttackConfig& cfg,
                                   const ChannelParams& channel) {
  cfg.validate();
  channel.validate();
  const SceneRenderer r(scene);
  RngStream init = detail::attack_stream(cfg.seed, scene.object, "init");
  RngStream rng = detail::attack_stream(cfg.seed, scene.object, "pl_pa");
  RngStream cam = detail::attack_stream(cfg.seed, scene.object, "pl_pa_camera");
  const ObjectId label = scene.object;
  auto batch = [&](const Patch& p, bool with_loss) {
    const Image lit = r.projection(p);
    double sum = 0.0;
    for (int k = 0; k < cfg.captures_per_update; ++k) {
      const double conf = det.confidence(capture(lit, channel, cam), label);
      sum += with_loss ? attack_loss(conf, p, cfg) : conf;
    }
    return sum / cfg.captures_per_update;
  };
  auto measure = [&](const Patch& p) { return batch(p, false); };
  auto objective = [&](const Patch& p) { return batch(p, true); };
  return detail::optimize(Scenario::PlPa, measure, objective, init_random_patch(cfg.patch_side, init), cfg, rng);
}

/// Evaluation of an application on one camera (mono) or the stereo rig.
struct Evaluation {
  double clean_conf = 0.0;
  double patched_conf = 0.0;
  Image clean_image;
  Image patched_image;
};

/// Mean confidence over eval_captures fresh frames. The left lens of the
/// stereo rig shares the monocular camera stream, so stereo >= mono holds
/// capture by capture.
inline Evaluation evaluate_application(const SceneConfig& scene, const Detector& det, Application app,
                                       const Patch* patch, const ChannelParams& channel, int captures,
                                       std::uint64_t seed, const std::optional<StereoRig>& rig) {
  const ObjectId label = scene.object;
  Evaluation ev;
  const SceneRenderer mono(scene);
  ev.clean_image = mono.clean();
  ev.patched_image = render_with(mono, app, patch);
  auto measure = [&](const Image& left_img, const Image* right_img, std::string_view tag) {
    RngStream left = detail::attack_stream(seed, label, std::string(tag) + "_eval");
    RngStream right = detail::attack_stream(seed, label, std::string(tag) + "_eval_right");
    double sum = 0.0;
    for (int i = 0; i < captures; ++i) {
      double c = det.confidence(capture(left_img, channel, left), label);
      if (right_img) c = std::max(c, det.confidence(capture(*right_img, channel, right), label));
      sum += c;
    }
    return sum / captures;
  };
  if (!rig) {
    ev.clean_conf = measure(ev.clean_image, nullptr, "clean");
    ev.patched_conf = app == Application::Clean ? ev.clean_conf : measure(ev.patched_image, nullptr, "patched");
  } else {
    const auto [l, r] = stereo_renderers(scene, *rig);
    const Image rc = r.clean();
    ev.clean_conf = measure(l.clean(), &rc, "clean");
    const Image rp = render_with(r, app, patch);
    ev.patched_conf = app == Application::Clean ? ev.clean_conf : measure(render_with(l, app, patch), &rp, "patched");
  }
  return ev;
}

inline ExperimentRecord make_record(const SceneConfig& scene, Scenario scenario, bool stereo, std::uint64_t seed,
                                    Evaluation ev) {
  ExperimentRecord rec;
  rec.object = scene.object;
  rec.scenario = scenario;
  rec.stereo = stereo;
  rec.seed = seed;
  rec.clean_conf = ev.clean_conf;
  rec.patched_conf = ev.patched_conf;
  if (ev.clean_conf > 0.0) rec.reduction = reduction_pct(ev.clean_conf, ev.patched_conf);
  rec.norms = norms(ev.patched_image, ev.clean_image);
  rec.clean_image = std::move(ev.clean_image);
  rec.patched_image = std::move(ev.patched_image);
  return rec;
}

/// DL-DA record: noiseless digital composite against the noiseless clean render.
inline ExperimentRecord dl_da_record(const SceneConfig& scene, const Detector& det, const AttackTrace& trace,
                                     std::uint64_t seed, const std::optional<StereoRig>& rig = std::nullopt) {
  return make_record(scene, Scenario::DlDa, rig.has_value(), seed,
                     evaluate_application(scene, det, Application::Digital, &trace.final_patch,
                                          ChannelParams::ideal(), 1, seed, rig));
}

/// Printed sticker of a digitally learned patch, captured through the channel.
inline ExperimentRecord run_dl_pa(const SceneConfig& scene, const Detector& det, const AttackTrace& digital,
                                  const AttackConfig& cfg, const ChannelParams& channel,
                                  const std::optional<StereoRig>& rig = std::nullopt) {
  const Patch printed = print_patch(digital.final_patch, channel);
  return make_record(scene, Scenario::DlPa, rig.has_value(), cfg.seed,
                     evaluate_application(scene, det, Application::Sticker, &printed, channel, cfg.eval_captures,
                                          cfg.seed, rig));
}

inline ExperimentRecord run_dl_pa(const SceneConfig& scene, const Detector& det, const AttackConfig& cfg,
                                  const ChannelParams& channel) {
  return run_dl_pa(scene, det, run_dl_da(scene, det, cfg), cfg, channel);
}

struct PaplaResult {
  AttackTrace trace;
  ExperimentRecord record;
};

inline ExperimentRecord papla_record(const SceneConfig& scene, const Detector& det, const AttackTrace& trace,
                                     const AttackConfig& cfg, const ChannelParams& channel,
                                     const std::optional<StereoRig>& rig = std::nullopt) {
  return make_record(scene, Scenario::PlPa, rig.has_value(), cfg.seed,
                     evaluate_application(scene, det, Application::Projection, &trace.final_patch, channel,
                                          cfg.eval_captures, cfg.seed, rig));
}

inline PaplaResult run_papla(const SceneConfig& scene, const Detector& det, const AttackConfig& cfg,
                             const ChannelParams& channel) {
  PaplaResult out{run_papla_trace(scene, det, cfg, channel), {}};
  out.record = papla_record(scene, det, out.trace, cfg, channel);
  return out;
}

struct SuiteConfig {
  std::vector<SceneConfig> scenes;  ///< one per object
  std::vector<Scenario> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
  AttackConfig digital = AttackConfig::digital();
  AttackConfig physical = AttackConfig::physical();
  ChannelParams channel;
  StereoRig rig;
  bool stereo = true;
  int jobs = 1;
};

/// Standard suite scenes: white surface, 100 lux, full-power projector, each
/// object at its catalog distance.
inline std::vector<SceneConfig> standard_scenes(const std::vector<ObjectId>& objects) {
  std::vector<SceneConfig> out;
  for (ObjectId o : objects) {
    SceneConfig s = default_scene(o);
    s.surface_albedo = {1, 1, 1};
    s.ambient_lux = 100;
    s.projector_lumens = 6000;
    out.push_back(s);
  }
  return out;
}

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. Results land in
/// index order, so output does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Records per (object, scenario), monocular then stereo when enabled.
inline std::vector<ExperimentRecord> run_scenario_suite(const SuiteConfig& suite, const Detector& det) {
  std::vector<std::vector<ExperimentRecord>> per_scene(suite.scenes.size());
  const auto has = [&](Scenario s) {
    return std::find(suite.scenarios.begin(), suite.scenarios.end(), s) != suite.scenarios.end();
  };
  parallel_for(suite.scenes.size(), suite.jobs, [&](std::size_t i) {
    const SceneConfig& scene = suite.scenes[i];
    std::vector<std::optional<StereoRig>> cams{std::nullopt};
    if (suite.stereo) cams.push_back(suite.rig);
    std::optional<AttackTrace> digital, physical;
    if (has(Scenario::DlDa) || has(Scenario::DlPa)) digital = run_dl_da(scene, det, suite.digital);
    if (has(Scenario::PlPa)) physical = run_papla_trace(scene, det, suite.physical, suite.channel);
    auto& out = per_scene[i];
    for (Scenario sc : suite.scenarios)
      for (const auto& cam : cams) {
        switch (sc) {
          case Scenario::Clean:
            out.push_back(make_record(scene, sc, cam.has_value(), suite.physical.seed,
                                      evaluate_application(scene, det, Application::Clean, nullptr, suite.channel,
                                                           suite.physical.eval_captures, suite.physical.seed, cam)));
            break;
          case Scenario::DlDa:
            out.push_back(dl_da_record(scene, det, *digital, suite.digital.seed, cam));
            break;
          case Scenario::DlPa:
            out.push_back(run_dl_pa(scene, det, *digital, suite.digital, suite.channel, cam));
            break;
          case Scenario::PlPa:
            out.push_back(papla_record(scene, det, *physical, suite.physical, suite.channel, cam));
            break;
        }
      }
  });
  std::vector<ExperimentRecord> all;
  for (auto& v : per_scene)
    for (auto& r : v) all.push_back(std::move(r));
  return all;
}

}  // namespace projlab
