#pragma once

// Output formats: RFC-4180 CSV and sorted-key JSON. Numbers use the shortest
// decimal form that round-trips, so reruns are byte-identical.

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "projlab/attack.hpp"
#include "projlab/countermeasure.hpp"
#include "projlab/io.hpp"
#include "projlab/studies.hpp"

namespace projlab {

using Json = nlohmann::json;

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_number(std::optional<double> v, const char* missing = "") {
  return v ? format_number(*v) : std::string(missing);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    require(cells.size() == columns_, ErrorCode::DimensionMismatch, "csv row width differs from header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += quote(cells[i]);
    }
    out_ += "\r\n";
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  const std::string& str() const noexcept { return out_; }

 private:
  std::size_t columns_;
  std::string out_;
};

/// Two-space indented, keys sorted (nlohmann's default map ordering).
inline std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

inline Json optional_json(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

inline Json norms_json(const NormTriple& n) { return {{"l2", n.l2}, {"linf", n.linf}, {"l0_pct", n.l0_pct}}; }

inline Json trace_json(const AttackTrace& t) {
  return {{"scenario", to_string(t.scenario)},
          {"seed", t.seed},
          {"iterations", t.iterations},
          {"confidences", t.confidences},
          {"patch_side", t.final_patch.side()},
          {"patch_extent", t.final_patch.extent}};
}

inline Json record_json(const ExperimentRecord& r) {
  return {{"object", to_string(r.object)},
          {"scenario", to_string(r.scenario)},
          {"stereo", r.stereo},
          {"seed", r.seed},
          {"clean_conf", r.clean_conf},
          {"patched_conf", r.patched_conf},
          {"reduction_pct", optional_json(r.reduction)},
          {"norms", norms_json(r.norms)}};
}

inline Json anova_json(const AnovaResult& a) {
  return {{"factor", a.factor},
          {"f_stat", std::isfinite(a.f_stat) ? Json(a.f_stat) : Json("inf")},
          {"p_value", a.p_value},
          {"dof_between", a.dof_between},
          {"dof_within", a.dof_within},
          {"ss_between", a.ss_between},
          {"ss_within", a.ss_within},
          {"degenerate", a.degenerate},
          {"levels", a.levels},
          {"group_medians", a.group_medians}};
}

inline Json eval_report_json(const EvalReport& e) {
  Json roc = Json::array();
  for (const RocPoint& p : e.roc)
    roc.push_back({{"threshold", std::isfinite(p.threshold) ? Json(p.threshold) : Json("inf")},
                   {"fpr", p.fpr},
                   {"tpr", p.tpr}});
  return {{"count", e.count},
          {"accuracy", e.accuracy},
          {"auc", e.auc},
          {"roc", roc},
          {"confusion", {{"tp", e.confusion.tp}, {"fn", e.confusion.fn}, {"fp", e.confusion.fp}, {"tn", e.confusion.tn}}}};
}

inline Json provenance_json(const SceneConfig& s) {
  return {{"object", to_string(s.object)},
          {"background", to_string(s.background)},
          {"distance_m", s.distance_m},
          {"angle_deg", s.angle_deg},
          {"ambient_lux", s.ambient_lux},
          {"projector_lumens", s.projector_lumens},
          {"surface_albedo", Json::array({s.surface_albedo[0], s.surface_albedo[1], s.surface_albedo[2]})}};
}

// ---------------------------------------------------------------------------
// CSV tables

inline std::string sweep_grid_csv(const std::vector<SweepCell>& cells) {
  CsvWriter w({"lumens", "lux", "distance_m", "angle_deg", "seed", "clean_conf", "patched_conf", "reduction_pct",
               "iterations"});
  for (const SweepCell& c : cells)
    w.row({format_number(c.lumens), format_number(c.lux), format_number(c.distance_m), format_number(c.angle_deg),
           std::to_string(c.seed), format_number(c.clean_conf), format_number(c.patched_conf),
           format_number(c.reduction), std::to_string(c.iterations)});
  return w.str();
}

inline std::string box_stats_csv(const std::vector<FactorSummary>& factors) {
  CsvWriter w({"factor", "level", "n", "min", "q1", "median", "q3", "max"});
  for (const FactorSummary& f : factors)
    for (std::size_t i = 0; i < f.levels.size(); ++i) {
      const BoxStats& b = f.boxes[i];
      w.row({f.factor, format_level(f.levels[i]), std::to_string(b.n), format_number(b.min), format_number(b.q1),
             format_number(b.median), format_number(b.q3), format_number(b.max)});
    }
  return w.str();
}

inline std::string records_csv(const std::vector<ExperimentRecord>& records) {
  CsvWriter w({"object", "scenario", "stereo", "seed", "clean_conf", "patched_conf", "reduction_pct", "l2", "linf",
               "l0_pct"});
  for (const ExperimentRecord& r : records)
    w.row({std::string(to_string(r.object)), std::string(to_string(r.scenario)), r.stereo ? "true" : "false",
           std::to_string(r.seed), format_number(r.clean_conf), format_number(r.patched_conf),
           format_number(r.reduction), format_number(r.norms.l2), std::to_string(r.norms.linf),
           format_number(r.norms.l0_pct)});
  return w.str();
}

inline std::string norms_csv(const std::vector<ScenarioNorms>& rows) {
  CsvWriter w({"scenario", "count", "mean_l2", "mean_linf", "mean_l0_pct"});
  for (const ScenarioNorms& n : rows)
    w.row({std::string(to_string(n.scenario)), std::to_string(n.count), format_number(n.l2), format_number(n.linf),
           format_number(n.l0_pct)});
  return w.str();
}

inline std::string surface_csv(const std::vector<SurfaceRow>& rows) {
  CsvWriter w({"surface", "albedo_r", "albedo_g", "albedo_b", "runs", "undetected", "mean_reduction_pct"});
  for (const SurfaceRow& r : rows)
    w.row({r.name, format_number(r.albedo[0]), format_number(r.albedo[1]), format_number(r.albedo[2]),
           std::to_string(r.reductions.size()), std::to_string(r.undetected), format_number(r.mean_reduction)});
  return w.str();
}

inline std::string transfer_cells_csv(const std::vector<TransferCell>& cells) {
  CsvWriter w({"method", "scenario", "source", "target", "object", "clean_conf", "patched_conf", "conf_diff_pct"});
  for (const TransferCell& c : cells)
    w.row({std::string(to_string(c.method)), std::string(to_string(c.scenario)), c.source, c.target,
           std::string(to_string(c.object)), format_number(c.clean_conf), format_number(c.patched_conf),
           format_number(c.conf_diff_pct, "-")});
  return w.str();
}

inline std::string transfer_averages_csv(const std::vector<TransferAverage>& rows) {
  CsvWriter w({"method", "scenario", "mean_conf_diff_pct", "cells", "excluded"});
  for (const TransferAverage& a : rows)
    w.row({std::string(to_string(a.method)), std::string(to_string(a.scenario)),
           a.cells ? format_number(a.mean_conf_diff_pct) : "-", std::to_string(a.cells), std::to_string(a.excluded)});
  return w.str();
}

inline std::string history_csv(const std::vector<EpochStats>& history) {
  CsvWriter w({"epoch", "train_loss", "val_loss", "val_accuracy", "val_auc"});
  for (std::size_t i = 0; i < history.size(); ++i) {
    const EpochStats& e = history[i];
    w.row({std::to_string(i + 1), format_number(e.train_loss), format_number(e.val_loss),
           format_number(e.val_accuracy), format_number(e.val_auc)});
  }
  return w.str();
}

}  // namespace projlab
