#pragma once

#include <string>
#include <vector>

#include "uland/heatmap.hpp"
#include "uland/tensor.hpp"

namespace uland {

/// How radial errors in a domain convert from pixels to physical units.
struct SpacingSpec {
  enum class Type { uniform, wrist_calibrated, pixel_only };
  Type type = Type::pixel_only;
  double mm_per_px = 1.0;  // uniform
  double width_mm = 50.0;  // wrist_calibrated: physical span between two landmarks
  int index_a = 0;         // wrist_calibrated: endpoint landmark indices
  int index_b = 1;
};

std::string to_string(SpacingSpec::Type type);
SpacingSpec::Type spacing_type_from_string(const std::string& s);

/// Static description of one dataset/anatomy: landmark schema, input channels,
/// resize target (H,W), spacing model and the train/test split by file order.
struct DomainSpec {
  std::string domain_id;
  std::string name;
  int num_landmarks = 0;  // C' = heatmap channels
  int in_channels = 1;    // C
  long resize_h = 0;
  long resize_w = 0;
  SpacingSpec spacing;
  long train_count = 0;
  long test_count = 0;
  std::vector<double> sdr_thresholds;  // empty -> defaults for the spacing type

  void validate() const;
  /// SDR thresholds to report: explicit ones if set, else defaults by spacing
  /// type (uniform: 2/2.5/3/4 mm, wrist: 2/4/10 mm, pixel: 3/6/9 px).
  std::vector<double> effective_thresholds() const;
  /// "mm" or "px".
  std::string unit() const;
};

/// One training/evaluation item: resized image in [0,1], landmarks in resized
/// space, and the native size needed to map predictions back.
struct Sample {
  Tensor image;  // [C,H,W]
  LandmarkSet landmarks;
  long native_h = 0;
  long native_w = 0;
  std::string domain_id;
};

}  // namespace uland
