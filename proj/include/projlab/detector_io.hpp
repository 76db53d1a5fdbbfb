#pragma once

// Detector models <-> binary container (see container.hpp).

#include <cmath>
#include <string>

#include "projlab/container.hpp"
#include "projlab/detector.hpp"

namespace projlab {

inline constexpr const char* kTemplateModelKind = "projlab.template_detector/v1";
inline constexpr const char* kLinearModelKind = "projlab.linear_detector/v1";

inline Container template_model_to_container(const TemplateDetectorModel& m) {
  Container c;
  c.kind = kTemplateModelKind;
  c.put_scalar("slope", m.slope);
  c.put_scalar("offset", m.offset);
  c.put_scalar("blur_passes", m.blur_passes);
  c.put_scalar("classes", static_cast<double>(m.classes.size()));
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    const std::string p = "class" + std::to_string(i);
    const ClassTemplates& ct = m.classes[i];
    c.put_text(p + ".label", std::string(to_string(ct.label)));
    c.put_scalar(p + ".scales", static_cast<double>(ct.scales.size()));
    for (std::size_t j = 0; j < ct.scales.size(); ++j) {
      const ScaledTemplate& t = ct.scales[j];
      c.put(p + ".scale" + std::to_string(j), t.values,
            {static_cast<std::uint32_t>(t.height), static_cast<std::uint32_t>(t.width)});
    }
  }
  return c;
}

namespace detail {

inline std::size_t count_field(const Container& c, const std::string& name) {
  const double v = c.scalar(name);
  require(v >= 0 && v == std::floor(v) && v < 1e6, ErrorCode::MalformedHeader, "bad count in '" + name + "'");
  return static_cast<std::size_t>(v);
}

inline ObjectId label_field(const Container& c, const std::string& name) {
  try {
    return parse_object(c.text(name));
  } catch (const Error&) {
    fail(ErrorCode::MalformedHeader, "unknown object label in '" + name + "'");
  }
}

}  // namespace detail

inline TemplateDetectorModel template_model_from_container(const Container& c) {
  require(c.kind == kTemplateModelKind, ErrorCode::MalformedHeader, "not a template detector container");
  TemplateDetectorModel m;
  m.slope = c.scalar("slope");
  m.offset = c.scalar("offset");
  m.blur_passes = static_cast<int>(detail::count_field(c, "blur_passes"));
  const std::size_t n = detail::count_field(c, "classes");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = "class" + std::to_string(i);
    ClassTemplates ct{detail::label_field(c, p + ".label"), {}};
    const std::size_t scales = detail::count_field(c, p + ".scales");
    for (std::size_t j = 0; j < scales; ++j) {
      const ContainerArray& a = c.array(p + ".scale" + std::to_string(j));
      require(a.dims.size() == 2 && a.dims[0] > 0 && a.dims[1] > 0, ErrorCode::MalformedHeader,
              "template scale must be a non-empty 2-D array");
      ScaledTemplate t{static_cast<int>(a.dims[1]), static_cast<int>(a.dims[0]), a.values, 0.0};
      double sq = 0.0;
      for (double v : t.values) sq += v * v;
      t.norm = std::sqrt(sq);
      ct.scales.push_back(std::move(t));
    }
    m.classes.push_back(std::move(ct));
  }
  m.validate();
  return m;
}

inline Container linear_models_to_container(const std::vector<LinearDetectorModel>& models) {
  Container c;
  c.kind = kLinearModelKind;
  c.put_scalar("models", static_cast<double>(models.size()));
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string p = "model" + std::to_string(i);
    const LinearDetectorModel& m = models[i];
    c.put_text(p + ".label", std::string(to_string(m.label)));
    c.put(p + ".weights", m.weights,
          {static_cast<std::uint32_t>(LinearDetectorModel::kGrid), static_cast<std::uint32_t>(LinearDetectorModel::kGrid)});
    c.put_scalar(p + ".bias", m.bias);
    c.put_scalar(p + ".trained", m.trained ? 1.0 : 0.0);
    c.put(p + ".loss_history", m.loss_history);
  }
  return c;
}

inline std::vector<LinearDetectorModel> linear_models_from_container(const Container& c) {
  require(c.kind == kLinearModelKind, ErrorCode::MalformedHeader, "not a linear detector container");
  std::vector<LinearDetectorModel> out;
  const std::size_t n = detail::count_field(c, "models");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = "model" + std::to_string(i);
    LinearDetectorModel m;
    m.label = detail::label_field(c, p + ".label");
    m.weights = c.array(p + ".weights").values;
    m.bias = c.scalar(p + ".bias");
    m.trained = c.scalar(p + ".trained") != 0.0;
    m.loss_history = c.array(p + ".loss_history").values;
    require(m.weights.size() == static_cast<std::size_t>(LinearDetectorModel::kGrid * LinearDetectorModel::kGrid),
            ErrorCode::MalformedHeader, "linear weights have the wrong length");
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace projlab
