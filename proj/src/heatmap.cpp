#include "uland/heatmap.hpp"

#include <cmath>

namespace uland {

double gaussian_peak(double sigma) {
  return 1.0 / (std::sqrt(2.0 * 3.14159265358979323846) * sigma);
}

Heatmap encode_heatmap(const LandmarkSet& landmarks, long height, long width, double sigma,
                       bool peak_normalized) {
  check_arg(sigma > 0.0, "encode_heatmap: sigma must be positive");
  check_arg(landmarks.space == CoordSpace::resized,
            "encode_heatmap: landmarks must be in resized space");
  check_arg(height > 0 && width > 0, "encode_heatmap: empty image");
  for (std::size_t k = 0; k < landmarks.points.size(); ++k) {
    const Point& p = landmarks.points[k];
    check_arg(p.x >= 0.0 && p.x < static_cast<double>(width) && p.y >= 0.0 &&
                  p.y < static_cast<double>(height),
              str_cat("encode_heatmap: landmark ", k, " at (", p.x, ",", p.y,
                      ") outside image bounds ", width, "x", height));
  }
  const long c = static_cast<long>(landmarks.points.size());
  Heatmap hm;
  hm.domain_id = landmarks.domain_id;
  hm.sigma = sigma;
  hm.values = Tensor({c, height, width});
  const double amp = peak_normalized ? 1.0 : gaussian_peak(sigma);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  for (long k = 0; k < c; ++k) {
    const double px = landmarks.points[static_cast<std::size_t>(k)].x;
    const double py = landmarks.points[static_cast<std::size_t>(k)].y;
    for (long y = 0; y < height; ++y) {
      const double dy = static_cast<double>(y) - py;
      for (long x = 0; x < width; ++x) {
        const double dx = static_cast<double>(x) - px;
        hm.values.at3(k, y, x) = amp * std::exp(-(dx * dx + dy * dy) * inv2s2);
      }
    }
  }
  return hm;
}

LandmarkSet decode_heatmap(const Heatmap& heatmap) {
  check_arg(heatmap.values.rank() == 3 && heatmap.values.dim(0) >= 1,
            "decode_heatmap: expected non-empty [C,H,W] heatmap");
  const long c = heatmap.values.dim(0);
  const long h = heatmap.values.dim(1);
  const long w = heatmap.values.dim(2);
  LandmarkSet out;
  out.domain_id = heatmap.domain_id;
  out.space = CoordSpace::resized;
  out.points.resize(static_cast<std::size_t>(c));
  for (long k = 0; k < c; ++k) {
    const double* ch = heatmap.values.data() + k * h * w;
    long best = 0;
    double best_v = ch[0];
    for (long i = 0; i < h * w; ++i) {
      const double v = ch[i];
      check_arg(!std::isnan(v), str_cat("decode_heatmap: NaN in channel ", k));
      if (v > best_v) {  // strict: ties keep the smallest row-major index
        best_v = v;
        best = i;
      }
    }
    out.points[static_cast<std::size_t>(k)] = {static_cast<double>(best % w),
                                               static_cast<double>(best / w)};
  }
  return out;
}

}  // namespace uland
