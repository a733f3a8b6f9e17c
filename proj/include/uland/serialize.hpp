#pragma once

#include <json.hpp>

#include "uland/domain.hpp"
#include "uland/model.hpp"

namespace uland {

using nlohmann::json;

inline void to_json(json& j, const SpacingSpec& s) {
  j = json{{"type", to_string(s.type)}};
  switch (s.type) {
    case SpacingSpec::Type::uniform:
      j["mm_per_px"] = s.mm_per_px;
      break;
    case SpacingSpec::Type::wrist_calibrated:
      j["width_mm"] = s.width_mm;
      j["index_a"] = s.index_a;
      j["index_b"] = s.index_b;
      break;
    case SpacingSpec::Type::pixel_only:
      break;
  }
}

inline void from_json(const json& j, SpacingSpec& s) {
  s.type = spacing_type_from_string(j.at("type").get<std::string>());
  switch (s.type) {
    case SpacingSpec::Type::uniform:
      s.mm_per_px = j.at("mm_per_px").get<double>();
      break;
    case SpacingSpec::Type::wrist_calibrated:
      s.width_mm = j.at("width_mm").get<double>();
      s.index_a = j.at("index_a").get<int>();
      s.index_b = j.at("index_b").get<int>();
      break;
    case SpacingSpec::Type::pixel_only:
      break;
  }
}

inline void to_json(json& j, const DomainSpec& d) {
  j = json{{"domain_id", d.domain_id},
           {"name", d.name},
           {"num_landmarks", d.num_landmarks},
           {"in_channels", d.in_channels},
           {"resize_to", {d.resize_h, d.resize_w}},
           {"spacing", d.spacing},
           {"split", {{"train", d.train_count}, {"test", d.test_count}}}};
  if (!d.sdr_thresholds.empty()) j["sdr_thresholds"] = d.sdr_thresholds;
}

inline void from_json(const json& j, DomainSpec& d) {
  j.at("domain_id").get_to(d.domain_id);
  d.name = j.value("name", d.domain_id);
  j.at("num_landmarks").get_to(d.num_landmarks);
  d.in_channels = j.value("in_channels", 1);
  const auto& r = j.at("resize_to");
  check_arg(r.is_array() && r.size() == 2, "manifest: resize_to must be [H, W]");
  d.resize_h = r[0].get<long>();
  d.resize_w = r[1].get<long>();
  d.spacing = j.value("spacing", SpacingSpec{});
  if (j.contains("split")) {
    d.train_count = j.at("split").at("train").get<long>();
    d.test_count = j.at("split").at("test").get<long>();
  }
  if (j.contains("sdr_thresholds")) j.at("sdr_thresholds").get_to(d.sdr_thresholds);
}

inline void to_json(json& j, const ModelConfig& c) {
  j = json{{"domains", c.domains},
           {"depth", c.depth},
           {"base_channels", c.base_channels},
           {"leaky_slope", c.leaky_slope},
           {"dilations", c.dilations},
           {"sigma", c.sigma},
           {"global_downsample", c.global_downsample},
           {"global_channels", c.global_channels}};
}

inline void from_json(const json& j, ModelConfig& c) {
  ModelConfig defaults;
  if (j.contains("domains")) j.at("domains").get_to(c.domains);
  c.depth = j.value("depth", defaults.depth);
  c.base_channels = j.value("base_channels", defaults.base_channels);
  c.leaky_slope = j.value("leaky_slope", defaults.leaky_slope);
  c.dilations = j.value("dilations", defaults.dilations);
  c.sigma = j.value("sigma", defaults.sigma);
  c.global_downsample = j.value("global_downsample", defaults.global_downsample);
  c.global_channels = j.value("global_channels", defaults.global_channels);
}

}  // namespace uland
