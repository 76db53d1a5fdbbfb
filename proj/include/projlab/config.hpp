#pragma once

// Run configuration: one JSON document per run. Unknown keys are errors.
// A top-level "include" (string or array of strings, resolved relative to
// the including file) is merged first; keys in the including file win.
// The schema is documented in docs/config.md.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "projlab/countermeasure.hpp"
#include "projlab/studies.hpp"

namespace projlab {

using Json = nlohmann::json;

struct DetectorSettings {
  TemplatePyramidOptions pyramid;
  double slope = 12.0;
  double offset = -9.0;
  double report_threshold = 0.25;
};

struct LinearSettings {
  int per_class = 200;
  int epochs = 300;
  double lr = 0.5;
};

struct AttackCommandSettings {
  Scenario scenario = Scenario::PlPa;
  bool stereo = false;
};

struct SuiteSettings {
  std::vector<ObjectId> objects{ObjectId::Car, ObjectId::StopSign, ObjectId::PottedPlant, ObjectId::Cup};
  std::vector<Scenario> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
  bool stereo = true;
};

struct SurfaceSettings {
  ObjectId object = ObjectId::StopSign;  // detail stays visible on a black body
  std::vector<NamedAlbedo> colors = default_surface_colors();
  int repeats = 3;
};

struct TransferSettings {
  std::vector<ObjectId> objects{ObjectId::Car, ObjectId::StopSign, ObjectId::PottedPlant, ObjectId::Cup};
  std::vector<AttackMethod> methods{AttackMethod::DPatchLike, AttackMethod::NapLike};
  std::vector<Scenario> scenarios{Scenario::DlDa, Scenario::PlPa};
  std::vector<std::string> detectors{"template", "linear"};
  double nap_tv_weight = 0.002;
  std::vector<Rgb> nap_palette;
};

struct CountermeasureSettings {
  int n_patched = 338;
  int n_unpatched = 324;
  int eval_n_patched = 100;
  int eval_n_unpatched = 100;
  VariationRanges ranges;
  TrainOptions train;
  double gate_threshold = 0.5;
  bool write_frames = true;
};

struct RunConfig {
  std::uint64_t seed = 1;
  SceneConfig scene = standard_scenes({ObjectId::Car}).front();
  ChannelParams channel;
  DetectorSettings detector;
  LinearSettings linear;
  AttackConfig digital_attack = AttackConfig::digital();
  AttackConfig physical_attack = AttackConfig::physical();
  StereoRig stereo;
  AttackCommandSettings attack;
  SuiteSettings suite;
  SweepLevels sweep;
  SurfaceSettings surface;
  TransferSettings transfer;
  CountermeasureSettings countermeasure;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::Config, path + ": " + what);
}

/// Walks one JSON object, remembering which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_fail(path_, "expected an object");
  }

  const Json* find(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out) {
    if (const Json* v = find(key)) out = convert<T>(*v, sub(key));
  }

  template <class T, class Parse>
  void get_enum(const std::string& key, T& out, Parse parse) {
    if (const Json* v = find(key)) out = parse_with<T>(*v, sub(key), parse);
  }

  template <class T, class Parse>
  void get_enum_list(const std::string& key, std::vector<T>& out, Parse parse) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) config_fail(sub(key), "expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(parse_with<T>((*v)[i], sub(key) + "[" + std::to_string(i) + "]", parse));
    }
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.count(k)) config_fail(path_, "unknown key '" + k + "'");
  }

  template <class T>
  static T convert(const Json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) config_fail(path, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) config_fail(path, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) config_fail(path, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<long long>() < 0) config_fail(path, "expected a non-negative integer");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) config_fail(path, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, Rgb>) {
      if (!v.is_array() || v.size() != 3) config_fail(path, "expected an [r, g, b] array");
      return {convert<double>(v[0], path), convert<double>(v[1], path), convert<double>(v[2], path)};
    } else {
      if (!v.is_array()) config_fail(path, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

 private:
  template <class T, class Parse>
  static T parse_with(const Json& v, const std::string& path, Parse parse) {
    if (!v.is_string()) config_fail(path, "expected a string");
    try {
      return parse(v.get<std::string>());
    } catch (const Error& e) {
      config_fail(path, e.what());
    }
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_scene(ObjectReader& r, SceneConfig& s) {
  r.get_enum("object", s.object, [](const std::string& v) { return parse_object(v); });
  r.get("object_size_m", s.object_size_m);
  r.get("surface_albedo", s.surface_albedo);
  r.get("ambient_lux", s.ambient_lux);
  r.get("projector_lumens", s.projector_lumens);
  r.get("distance_m", s.distance_m);
  r.get("angle_deg", s.angle_deg);
  r.get_enum("background", s.background, [](const std::string& v) { return parse_background(v); });
  r.get("canvas_width", s.canvas_width);
  r.get("canvas_height", s.canvas_height);
  r.get("focal_px", s.focal_px);
  r.get("gain_max", s.gain_max);
  r.get("ambient_ref_lux", s.ambient_ref_lux);
  r.get("lumens_ref", s.lumens_ref);
}

inline void read_channel(ObjectReader& r, ChannelParams& c) {
  r.get("sensor_sigma", c.sensor_sigma);
  r.get("shot_floor", c.shot_floor);
  if (const Json* m = r.find("print_matrix")) {
    const auto v = ObjectReader::convert<std::vector<double>>(*m, r.sub("print_matrix"));
    if (v.size() != 9) config_fail(r.sub("print_matrix"), "expected 9 numbers");
    std::copy(v.begin(), v.end(), c.print_matrix.begin());
  }
  r.get("print_gamma", c.print_gamma);
  r.get("print_quant_levels", c.print_quant_levels);
}

inline void read_attack(ObjectReader& r, AttackConfig& a) {
  r.get_enum("method", a.method, [](const std::string& v) { return parse_method(v); });
  r.get_enum("update", a.update, [](const std::string& v) { return parse_update_rule(v); });
  r.get("max_iters", a.max_iters);
  r.get("step_size", a.step_size);
  r.get("captures_per_update", a.captures_per_update);
  r.get("spsa_c", a.spsa_c);
  r.get("spsa_samples", a.spsa_samples);
  r.get("fd_block", a.fd_block);
  r.get("tv_weight", a.tv_weight);
  r.get("palette", a.palette);
  r.get("palette_weight", a.palette_weight);
  r.get("early_stop_conf", a.early_stop_conf);
  r.get("patch_side", a.patch_side);
  r.get("eval_captures", a.eval_captures);
}

template <class Fn>
void with_section(ObjectReader& parent, const std::string& key, Fn&& fn) {
  if (const Json* v = parent.find(key)) {
    ObjectReader r(*v, parent.sub(key));
    fn(r);
    r.finish();
  }
}

inline void read_config(const Json& j, RunConfig& c) {
  ObjectReader r(j, "config");
  r.find("include");
  r.get("seed", c.seed);
  with_section(r, "scene", [&](ObjectReader& s) { read_scene(s, c.scene); });
  with_section(r, "channel", [&](ObjectReader& s) { read_channel(s, c.channel); });
  with_section(r, "detector", [&](ObjectReader& s) {
    s.get("slope", c.detector.slope);
    s.get("offset", c.detector.offset);
    s.get("report_threshold", c.detector.report_threshold);
    s.get("levels", c.detector.pyramid.levels);
    s.get("min_side", c.detector.pyramid.min_side);
    s.get("min_area", c.detector.pyramid.min_area);
    s.get("margin_px", c.detector.pyramid.margin_px);
    s.get("blur_passes", c.detector.pyramid.blur_passes);
    s.get("body_tints", c.detector.pyramid.body_tints);
    s.get_enum("reference_background", c.detector.pyramid.background,
               [](const std::string& v) { return parse_background(v); });
  });
  with_section(r, "linear_detector", [&](ObjectReader& s) {
    s.get("per_class", c.linear.per_class);
    s.get("epochs", c.linear.epochs);
    s.get("lr", c.linear.lr);
  });
  with_section(r, "digital_attack", [&](ObjectReader& s) { read_attack(s, c.digital_attack); });
  with_section(r, "physical_attack", [&](ObjectReader& s) { read_attack(s, c.physical_attack); });
  with_section(r, "stereo", [&](ObjectReader& s) {
    s.get("baseline_m", c.stereo.baseline_m);
    s.get("left_offset_deg", c.stereo.left_offset_deg);
    s.get("right_offset_deg", c.stereo.right_offset_deg);
  });
  with_section(r, "attack", [&](ObjectReader& s) {
    s.get_enum("scenario", c.attack.scenario, [](const std::string& v) { return parse_scenario(v); });
    s.get("stereo", c.attack.stereo);
  });
  with_section(r, "suite", [&](ObjectReader& s) {
    s.get_enum_list("objects", c.suite.objects, [](const std::string& v) { return parse_object(v); });
    s.get_enum_list("scenarios", c.suite.scenarios, [](const std::string& v) { return parse_scenario(v); });
    s.get("stereo", c.suite.stereo);
  });
  with_section(r, "sweep", [&](ObjectReader& s) {
    s.get("lumens", c.sweep.lumens);
    s.get("lux", c.sweep.lux);
    s.get("distance_m", c.sweep.distance_m);
    s.get("angle_deg", c.sweep.angle_deg);
  });
  with_section(r, "surface", [&](ObjectReader& s) {
    s.get("repeats", c.surface.repeats);
    s.get_enum("object", c.surface.object, [](const std::string& v) { return parse_object(v); });
    if (const Json* v = s.find("colors")) {
      if (!v->is_array()) config_fail(s.sub("colors"), "expected an array");
      c.surface.colors.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        ObjectReader e((*v)[i], s.sub("colors") + "[" + std::to_string(i) + "]");
        NamedAlbedo a;
        e.get("name", a.name);
        e.get("albedo", a.albedo);
        e.finish();
        c.surface.colors.push_back(a);
      }
    }
  });
  with_section(r, "transfer", [&](ObjectReader& s) {
    s.get_enum_list("objects", c.transfer.objects, [](const std::string& v) { return parse_object(v); });
    s.get_enum_list("methods", c.transfer.methods, [](const std::string& v) { return parse_method(v); });
    s.get_enum_list("scenarios", c.transfer.scenarios, [](const std::string& v) { return parse_scenario(v); });
    s.get("detectors", c.transfer.detectors);
    s.get("nap_tv_weight", c.transfer.nap_tv_weight);
    s.get("nap_palette", c.transfer.nap_palette);
  });
  with_section(r, "countermeasure", [&](ObjectReader& s) {
    auto& cm = c.countermeasure;
    s.get("n_patched", cm.n_patched);
    s.get("n_unpatched", cm.n_unpatched);
    s.get("eval_n_patched", cm.eval_n_patched);
    s.get("eval_n_unpatched", cm.eval_n_unpatched);
    s.get("gate_threshold", cm.gate_threshold);
    s.get("write_frames", cm.write_frames);
    with_section(s, "ranges", [&](ObjectReader& v) {
      v.get_enum_list("objects", cm.ranges.objects, [](const std::string& x) { return parse_object(x); });
      v.get_enum_list("backgrounds", cm.ranges.backgrounds, [](const std::string& x) { return parse_background(x); });
      v.get("distance_lo", cm.ranges.distance_lo);
      v.get("distance_hi", cm.ranges.distance_hi);
      v.get("angle_lo", cm.ranges.angle_lo);
      v.get("angle_hi", cm.ranges.angle_hi);
      v.get("lux_lo", cm.ranges.lux_lo);
      v.get("lux_hi", cm.ranges.lux_hi);
      v.get("lumens_lo", cm.ranges.lumens_lo);
      v.get("lumens_hi", cm.ranges.lumens_hi);
      v.get("albedo_lo", cm.ranges.albedo_lo);
      v.get("albedo_hi", cm.ranges.albedo_hi);
      v.get("patch_side", cm.ranges.patch_side);
    });
    with_section(s, "train", [&](ObjectReader& t) {
      t.get("epochs_max", cm.train.epochs_max);
      t.get("lr", cm.train.lr);
      t.get("l2_weight", cm.train.l2_weight);
      t.get("patience", cm.train.patience);
      t.get("min_delta", cm.train.min_delta);
      t.get("val_split", cm.train.val_split);
    });
  });
  r.finish();
}

inline void validate_config(const RunConfig& c) {
  auto check = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      fail(ErrorCode::Config, e.what());
    }
  };
  check([&] { c.scene.validate(); });
  check([&] { c.channel.validate(); });
  check([&] { c.digital_attack.validate(); });
  check([&] { c.physical_attack.validate(); });
  check([&] { c.stereo.validate(); });
  const auto nonempty = [](bool ok, const char* what) { require(ok, ErrorCode::Config, what); };
  nonempty(c.detector.slope > 0, "detector.slope must be positive");
  nonempty(c.detector.pyramid.levels >= 1, "detector.levels must be >= 1");
  nonempty(!c.detector.pyramid.body_tints.empty() &&
               std::all_of(c.detector.pyramid.body_tints.begin(), c.detector.pyramid.body_tints.end(),
                           [](double t) { return t >= 0 && t <= 1; }),
           "detector.body_tints must be a non-empty list of values in [0, 1]");
  nonempty(!c.suite.objects.empty(), "suite.objects must not be empty");
  nonempty(!c.sweep.lumens.empty() && !c.sweep.lux.empty() && !c.sweep.distance_m.empty() && !c.sweep.angle_deg.empty(),
           "every sweep factor needs at least one level");
  nonempty(c.surface.repeats >= 1 && !c.surface.colors.empty(), "surface needs colors and repeats >= 1");
  nonempty(c.transfer.detectors.size() >= 2, "transfer needs at least two detectors");
  for (const std::string& d : c.transfer.detectors)
    nonempty(d == "template" || d == "linear", "transfer.detectors entries must be 'template' or 'linear'");
  for (Scenario s : c.transfer.scenarios)
    nonempty(s == Scenario::DlDa || s == Scenario::PlPa, "transfer.scenarios must be dl_da or pl_pa");
  nonempty(c.countermeasure.n_patched >= 1 && c.countermeasure.n_unpatched >= 1 &&
               c.countermeasure.eval_n_patched >= 1 && c.countermeasure.eval_n_unpatched >= 1,
           "countermeasure counts must be >= 1");
  nonempty(!c.countermeasure.ranges.objects.empty() && !c.countermeasure.ranges.backgrounds.empty(),
           "countermeasure ranges need objects and backgrounds");
  nonempty(c.linear.per_class >= 2 && c.linear.epochs >= 1 && c.linear.lr > 0, "linear_detector settings out of range");
}

inline Json load_json_with_includes(const std::filesystem::path& path, int depth) {
  if (depth > 16) config_fail(path.string(), "include nesting too deep");
  std::ifstream f(path);
  if (!f) config_fail(path.string(), "cannot open config file");
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::parse_error& e) {
    config_fail(path.string(), std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_fail(path.string(), "top level must be an object");
  const auto it = j.find("include");
  if (it == j.end()) return j;
  std::vector<std::string> includes;
  if (it->is_string()) includes.push_back(it->get<std::string>());
  else if (it->is_array()) includes = ObjectReader::convert<std::vector<std::string>>(*it, path.string() + ".include");
  else config_fail(path.string(), "include must be a string or an array of strings");
  Json merged = Json::object();
  for (const std::string& inc : includes) merged.merge_patch(load_json_with_includes(path.parent_path() / inc, depth + 1));
  j.erase("include");
  merged.merge_patch(j);
  return merged;
}

}  // namespace detail

/// Resolved JSON document (includes merged) for a config file.
inline Json load_config_json(const std::string& path) { return detail::load_json_with_includes(path, 0); }

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  detail::read_config(j, c);
  detail::validate_config(c);
  return c;
}

inline RunConfig load_config(const std::string& path) { return config_from_json(load_config_json(path)); }

// ---------------------------------------------------------------------------
// Echo: the fully resolved configuration, defaults included.

inline Json rgb_json(const Rgb& c) { return Json::array({c[0], c[1], c[2]}); }

inline Json attack_json(const AttackConfig& a) {
  Json pal = Json::array();
  for (const Rgb& c : a.palette) pal.push_back(rgb_json(c));
  return {{"method", to_string(a.method)},
          {"update", to_string(a.update)},
          {"max_iters", a.max_iters},
          {"step_size", a.step_size},
          {"captures_per_update", a.captures_per_update},
          {"spsa_c", a.spsa_c},
          {"spsa_samples", a.spsa_samples},
          {"fd_block", a.fd_block},
          {"tv_weight", a.tv_weight},
          {"palette", pal},
          {"palette_weight", a.palette_weight},
          {"early_stop_conf", a.early_stop_conf},
          {"patch_side", a.patch_side},
          {"eval_captures", a.eval_captures}};
}

inline Json scene_json(const SceneConfig& s) {
  return {{"object", to_string(s.object)},
          {"object_size_m", s.object_size_m},
          {"surface_albedo", rgb_json(s.surface_albedo)},
          {"ambient_lux", s.ambient_lux},
          {"projector_lumens", s.projector_lumens},
          {"distance_m", s.distance_m},
          {"angle_deg", s.angle_deg},
          {"background", to_string(s.background)},
          {"canvas_width", s.canvas_width},
          {"canvas_height", s.canvas_height},
          {"focal_px", s.focal_px},
          {"gain_max", s.gain_max},
          {"ambient_ref_lux", s.ambient_ref_lux},
          {"lumens_ref", s.lumens_ref}};
}

template <class T, class Fn>
Json names_json(const std::vector<T>& v, Fn&& name) {
  Json out = Json::array();
  for (const T& x : v) out.push_back(std::string(name(x)));
  return out;
}

inline Json config_to_json(const RunConfig& c) {
  const auto obj = [](ObjectId o) { return to_string(o); };
  const auto scen = [](Scenario s) { return to_string(s); };
  Json colors = Json::array();
  for (const NamedAlbedo& a : c.surface.colors) colors.push_back({{"name", a.name}, {"albedo", rgb_json(a.albedo)}});
  Json nap_palette = Json::array();
  for (const Rgb& p : c.transfer.nap_palette) nap_palette.push_back(rgb_json(p));
  const auto& cm = c.countermeasure;
  return {
      {"seed", c.seed},
      {"scene", scene_json(c.scene)},
      {"channel",
       {{"sensor_sigma", c.channel.sensor_sigma},
        {"shot_floor", c.channel.shot_floor},
        {"print_matrix", c.channel.print_matrix},
        {"print_gamma", c.channel.print_gamma},
        {"print_quant_levels", c.channel.print_quant_levels}}},
      {"detector",
       {{"slope", c.detector.slope},
        {"offset", c.detector.offset},
        {"report_threshold", c.detector.report_threshold},
        {"levels", c.detector.pyramid.levels},
        {"min_side", c.detector.pyramid.min_side},
        {"min_area", c.detector.pyramid.min_area},
        {"margin_px", c.detector.pyramid.margin_px},
        {"blur_passes", c.detector.pyramid.blur_passes},
        {"body_tints", c.detector.pyramid.body_tints},
        {"reference_background", to_string(c.detector.pyramid.background)}}},
      {"linear_detector", {{"per_class", c.linear.per_class}, {"epochs", c.linear.epochs}, {"lr", c.linear.lr}}},
      {"digital_attack", attack_json(c.digital_attack)},
      {"physical_attack", attack_json(c.physical_attack)},
      {"stereo",
       {{"baseline_m", c.stereo.baseline_m},
        {"left_offset_deg", c.stereo.left_offset_deg},
        {"right_offset_deg", c.stereo.right_offset_deg}}},
      {"attack", {{"scenario", to_string(c.attack.scenario)}, {"stereo", c.attack.stereo}}},
      {"suite",
       {{"objects", names_json(c.suite.objects, obj)},
        {"scenarios", names_json(c.suite.scenarios, scen)},
        {"stereo", c.suite.stereo}}},
      {"sweep",
       {{"lumens", c.sweep.lumens}, {"lux", c.sweep.lux}, {"distance_m", c.sweep.distance_m}, {"angle_deg", c.sweep.angle_deg}}},
      {"surface", {{"colors", colors}, {"object", to_string(c.surface.object)}, {"repeats", c.surface.repeats}}},
      {"transfer",
       {{"objects", names_json(c.transfer.objects, obj)},
        {"methods", names_json(c.transfer.methods, [](AttackMethod m) { return to_string(m); })},
        {"scenarios", names_json(c.transfer.scenarios, scen)},
        {"detectors", c.transfer.detectors},
        {"nap_tv_weight", c.transfer.nap_tv_weight},
        {"nap_palette", nap_palette}}},
      {"countermeasure",
       {{"n_patched", cm.n_patched},
        {"n_unpatched", cm.n_unpatched},
        {"eval_n_patched", cm.eval_n_patched},
        {"eval_n_unpatched", cm.eval_n_unpatched},
        {"gate_threshold", cm.gate_threshold},
        {"write_frames", cm.write_frames},
        {"ranges",
         {{"objects", names_json(cm.ranges.objects, obj)},
          {"backgrounds", names_json(cm.ranges.backgrounds, [](BackgroundId b) { return to_string(b); })},
          {"distance_lo", cm.ranges.distance_lo},
          {"distance_hi", cm.ranges.distance_hi},
          {"angle_lo", cm.ranges.angle_lo},
          {"angle_hi", cm.ranges.angle_hi},
          {"lux_lo", cm.ranges.lux_lo},
          {"lux_hi", cm.ranges.lux_hi},
          {"lumens_lo", cm.ranges.lumens_lo},
          {"lumens_hi", cm.ranges.lumens_hi},
          {"albedo_lo", cm.ranges.albedo_lo},
          {"albedo_hi", cm.ranges.albedo_hi},
          {"patch_side", cm.ranges.patch_side}}},
        {"train",
         {{"epochs_max", cm.train.epochs_max},
          {"lr", cm.train.lr},
          {"l2_weight", cm.train.l2_weight},
          {"patience", cm.train.patience},
          {"min_delta", cm.train.min_delta},
          {"val_split", cm.train.val_split}}}}},
  };
}

}  // namespace projlab
