#pragma once

#include <string>
#include <vector>

#include "uland/tensor.hpp"

namespace uland {

/// Pixel coordinates: x = column, y = row, origin at the top-left corner.
/// This convention is used everywhere in the project.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class CoordSpace { native, resized };

/// Named landmark coordinates for one image. `points` is ordered; its length
/// must equal the owning domain's landmark count.
struct LandmarkSet {
  std::string domain_id;
  std::string image_id;
  std::vector<Point> points;
  CoordSpace space = CoordSpace::resized;
};

/// Per-landmark probability maps, one channel per landmark. `values` has
/// shape [C',H,W]; encoded targets peak at 1/(sqrt(2*pi)*sigma) (or 1 in
/// peak-normalized mode).
struct Heatmap {
  std::string domain_id;
  Tensor values;
  double sigma = 0.0;
};

/// Gaussian peak value laid down at each landmark.
double gaussian_peak(double sigma);

/// Renders one Gaussian per landmark:
///   Y_k(x,y) = 1/(sqrt(2*pi)*sigma) * exp(-((x-x_k)^2 + (y-y_k)^2) / (2*sigma^2))
/// evaluated at every integer pixel, no truncation radius. With
/// `peak_normalized` the normalization constant is dropped so the peak is 1
/// (off by default).
/// Requires landmarks in resized space and strictly inside [0,width)x[0,height).
Heatmap encode_heatmap(const LandmarkSet& landmarks, long height, long width, double sigma,
                       bool peak_normalized = false);

/// Per-channel argmax. Ties break to the smallest row-major linear index, so
/// an all-zero channel decodes to (0,0). Rejects channels containing NaN.
LandmarkSet decode_heatmap(const Heatmap& heatmap);

}  // namespace uland
