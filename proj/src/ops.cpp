#include "uland/ops.hpp"

#include <Eigen/Core>
#include <cmath>

namespace uland::ops {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<MatRM>;
using CMap = Eigen::Map<const MatRM>;

void check_bchw(const Tensor& x, const char* who) {
  check_arg(x.rank() == 4, str_cat(who, ": expected [B,C,H,W] input, got ", shape_str(x)));
}

/// im2col for a 3x3 kernel with dilation d and same padding.
/// x_img: pointer to one image [N,H,W]; col: [9N, H*W] row-major.
void im2col3x3(const double* x_img, long n, long h, long w, int d, double* col) {
  const long hw = h * w;
  for (long c = 0; c < n; ++c) {
    const double* xc = x_img + c * hw;
    for (int u = 0; u < 3; ++u) {
      for (int v = 0; v < 3; ++v) {
        double* row = col + ((c * 9) + (u * 3 + v)) * hw;
        const long di = static_cast<long>(u - 1) * d;
        const long dj = static_cast<long>(v - 1) * d;
        for (long i = 0; i < h; ++i) {
          const long si = i + di;
          double* out = row + i * w;
          if (si < 0 || si >= h) {
            std::fill(out, out + w, 0.0);
            continue;
          }
          const double* src = xc + si * w;
          for (long j = 0; j < w; ++j) {
            const long sj = j + dj;
            out[j] = (sj >= 0 && sj < w) ? src[sj] : 0.0;
          }
        }
      }
    }
  }
}

/// Transpose of im2col3x3: scatter-add col back into the image gradient.
void col2im3x3(const double* col, long n, long h, long w, int d, double* gx_img) {
  const long hw = h * w;
  for (long c = 0; c < n; ++c) {
    double* gc = gx_img + c * hw;
    for (int u = 0; u < 3; ++u) {
      for (int v = 0; v < 3; ++v) {
        const double* row = col + ((c * 9) + (u * 3 + v)) * hw;
        const long di = static_cast<long>(u - 1) * d;
        const long dj = static_cast<long>(v - 1) * d;
        for (long i = 0; i < h; ++i) {
          const long si = i + di;
          if (si < 0 || si >= h) continue;
          const double* src = row + i * w;
          double* dst = gc + si * w;
          for (long j = 0; j < w; ++j) {
            const long sj = j + dj;
            if (sj >= 0 && sj < w) dst[sj] += src[j];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor pointwise_forward(const Tensor& x, const Tensor& w) {
  check_bchw(x, "pointwise");
  check_arg(w.rank() == 2 && w.dim(1) == x.dim(1),
            str_cat("pointwise: weight ", shape_str(w), " does not match input channels ",
                    x.dim(1)));
  const long b = x.dim(0), n = x.dim(1), h = x.dim(2), wd = x.dim(3), m = w.dim(0);
  const long hw = h * wd;
  Tensor y({b, m, h, wd});
  CMap wm(w.data(), m, n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < b; ++i) {
    CMap xm(x.data() + i * n * hw, n, hw);
    Map ym(y.data() + i * m * hw, m, hw);
    ym.noalias() = wm * xm;
  }
  return y;
}

void pointwise_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                        Tensor& gx, Tensor& gw) {
  const long b = x.dim(0), n = x.dim(1), h = x.dim(2), wd = x.dim(3), m = w.dim(0);
  const long hw = h * wd;
  gx = Tensor({b, n, h, wd});
  std::vector<Tensor> partial(static_cast<std::size_t>(b), Tensor({m, n}));
  CMap wm(w.data(), m, n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < b; ++i) {
    CMap xm(x.data() + i * n * hw, n, hw);
    CMap gym(gy.data() + i * m * hw, m, hw);
    Map gxm(gx.data() + i * n * hw, n, hw);
    gxm.noalias() = wm.transpose() * gym;
    Map gwm(partial[static_cast<std::size_t>(i)].data(), m, n);
    gwm.noalias() = gym * xm.transpose();
  }
  for (long i = 0; i < b; ++i) gw.add_(partial[static_cast<std::size_t>(i)]);
}

Tensor depthwise3x3_forward(const Tensor& x, const Tensor& w) {
  check_bchw(x, "depthwise3x3");
  check_arg(w.rank() == 3 && w.dim(0) == x.dim(1) && w.dim(1) == 3 && w.dim(2) == 3,
            str_cat("depthwise3x3: weight ", shape_str(w), " does not match input ",
                    shape_str(x)));
  const long b = x.dim(0), n = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const long hw = h * wd;
  Tensor y({b, n, h, wd});
#pragma omp parallel for schedule(static) collapse(2)
  for (long i = 0; i < b; ++i) {
    for (long c = 0; c < n; ++c) {
      const double* xc = x.data() + (i * n + c) * hw;
      const double* wc = w.data() + c * 9;
      double* yc = y.data() + (i * n + c) * hw;
      for (long r = 0; r < h; ++r) {
        for (long q = 0; q < wd; ++q) {
          double acc = 0.0;
          for (int u = 0; u < 3; ++u) {
            const long si = r + u - 1;
            if (si < 0 || si >= h) continue;
            for (int v = 0; v < 3; ++v) {
              const long sj = q + v - 1;
              if (sj < 0 || sj >= wd) continue;
              acc += wc[u * 3 + v] * xc[si * wd + sj];
            }
          }
          yc[r * wd + q] = acc;
        }
      }
    }
  }
  return y;
}

void depthwise3x3_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                           Tensor& gx, Tensor& gw) {
  const long b = x.dim(0), n = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const long hw = h * wd;
  gx = Tensor({b, n, h, wd});
  std::vector<Tensor> partial(static_cast<std::size_t>(b), Tensor({n, 3, 3}));
#pragma omp parallel for schedule(static)
  for (long i = 0; i < b; ++i) {
    Tensor& pw = partial[static_cast<std::size_t>(i)];
    for (long c = 0; c < n; ++c) {
      const double* xc = x.data() + (i * n + c) * hw;
      const double* wc = w.data() + c * 9;
      const double* gc = gy.data() + (i * n + c) * hw;
      double* gxc = gx.data() + (i * n + c) * hw;
      double* gwc = pw.data() + c * 9;
      for (long r = 0; r < h; ++r) {
        for (long q = 0; q < wd; ++q) {
          const double g = gc[r * wd + q];
          for (int u = 0; u < 3; ++u) {
            const long si = r + u - 1;
            if (si < 0 || si >= h) continue;
            for (int v = 0; v < 3; ++v) {
              const long sj = q + v - 1;
              if (sj < 0 || sj >= wd) continue;
              gxc[si * wd + sj] += wc[u * 3 + v] * g;
              gwc[u * 3 + v] += xc[si * wd + sj] * g;
            }
          }
        }
      }
    }
  }
  for (long i = 0; i < b; ++i) gw.add_(partial[static_cast<std::size_t>(i)]);
}

Tensor conv3x3_forward(const Tensor& x, const Tensor& w, int dilation) {
  check_bchw(x, "conv3x3");
  check_arg(w.rank() == 4 && w.dim(1) == x.dim(1) && w.dim(2) == 3 && w.dim(3) == 3,
            str_cat("conv3x3: weight ", shape_str(w), " does not match input ", shape_str(x)));
  const long b = x.dim(0), n = x.dim(1), h = x.dim(2), wd = x.dim(3), m = w.dim(0);
  const long hw = h * wd;
  Tensor y({b, m, h, wd});
  CMap wm(w.data(), m, 9 * n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < b; ++i) {
    Tensor col({9 * n, hw});
    im2col3x3(x.data() + i * n * hw, n, h, wd, dilation, col.data());
    CMap cm(col.data(), 9 * n, hw);
    Map ym(y.data() + i * m * hw, m, hw);
    ym.noalias() = wm * cm;
  }
  return y;
}

void conv3x3_backward(const Tensor& x, const Tensor& w, const Tensor& gy, int dilation,
                      Tensor& gx, Tensor& gw) {
  const long b = x.dim(0), n = x.dim(1), h = x.dim(2), wd = x.dim(3), m = w.dim(0);
  const long hw = h * wd;
  gx = Tensor({b, n, h, wd});
  std::vector<Tensor> partial(static_cast<std::size_t>(b), Tensor({m, n, 3, 3}));
  CMap wm(w.data(), m, 9 * n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < b; ++i) {
    Tensor col({9 * n, hw});
    im2col3x3(x.data() + i * n * hw, n, h, wd, dilation, col.data());
    CMap cm(col.data(), 9 * n, hw);
    CMap gym(gy.data() + i * m * hw, m, hw);
    Map gwm(partial[static_cast<std::size_t>(i)].data(), m, 9 * n);
    gwm.noalias() = gym * cm.transpose();
    Tensor gcol({9 * n, hw});
    Map gcm(gcol.data(), 9 * n, hw);
    gcm.noalias() = wm.transpose() * gym;
    col2im3x3(gcol.data(), n, h, wd, dilation, gx.data() + i * n * hw);
  }
  for (long i = 0; i < b; ++i) gw.add_(partial[static_cast<std::size_t>(i)]);
}

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, bool training,
                         double momentum, double eps, BatchNormCache& cache) {
  check_bchw(x, "batchnorm");
  const long b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const long hw = h * w;
  const long m = b * hw;
  Tensor y({b, c, h, w});
  cache.training = training;
  if (training) {
    cache.xhat = Tensor({b, c, h, w});
    cache.invstd = Tensor({c});
    for (long ch = 0; ch < c; ++ch) {
      double sum = 0.0, sq = 0.0;
      for (long i = 0; i < b; ++i) {
        const double* xc = x.data() + (i * c + ch) * hw;
        for (long k = 0; k < hw; ++k) {
          sum += xc[k];
          sq += xc[k] * xc[k];
        }
      }
      const double mean = sum / static_cast<double>(m);
      double var = sq / static_cast<double>(m) - mean * mean;
      if (var < 0.0) var = 0.0;  // guard against rounding
      const double invstd = 1.0 / std::sqrt(var + eps);
      cache.invstd[ch] = invstd;
      const double g = gamma[ch], bt = beta[ch];
      for (long i = 0; i < b; ++i) {
        const double* xc = x.data() + (i * c + ch) * hw;
        double* xh = cache.xhat.data() + (i * c + ch) * hw;
        double* yc = y.data() + (i * c + ch) * hw;
        for (long k = 0; k < hw; ++k) {
          const double v = (xc[k] - mean) * invstd;
          xh[k] = v;
          yc[k] = g * v + bt;
        }
      }
      running_mean[ch] = (1.0 - momentum) * running_mean[ch] + momentum * mean;
      const double unbiased = m > 1 ? var * static_cast<double>(m) / static_cast<double>(m - 1) : var;
      running_var[ch] = (1.0 - momentum) * running_var[ch] + momentum * unbiased;
    }
  } else {
    for (long ch = 0; ch < c; ++ch) {
      const double invstd = 1.0 / std::sqrt(running_var[ch] + eps);
      const double mean = running_mean[ch];
      const double g = gamma[ch], bt = beta[ch];
      for (long i = 0; i < b; ++i) {
        const double* xc = x.data() + (i * c + ch) * hw;
        double* yc = y.data() + (i * c + ch) * hw;
        for (long k = 0; k < hw; ++k) yc[k] = g * (xc[k] - mean) * invstd + bt;
      }
    }
  }
  return y;
}

void batchnorm_backward(const Tensor& gy, const Tensor& gamma, const BatchNormCache& cache,
                        Tensor& gx, Tensor& ggamma, Tensor& gbeta) {
  check_arg(cache.training, "batchnorm_backward: only training-mode backward is supported");
  const long b = gy.dim(0), c = gy.dim(1), h = gy.dim(2), w = gy.dim(3);
  const long hw = h * w;
  const long m = b * hw;
  gx = Tensor({b, c, h, w});
  for (long ch = 0; ch < c; ++ch) {
    double dg = 0.0, db = 0.0;
    for (long i = 0; i < b; ++i) {
      const double* gc = gy.data() + (i * c + ch) * hw;
      const double* xh = cache.xhat.data() + (i * c + ch) * hw;
      for (long k = 0; k < hw; ++k) {
        dg += gc[k] * xh[k];
        db += gc[k];
      }
    }
    ggamma[ch] += dg;
    gbeta[ch] += db;
    const double scale = gamma[ch] * cache.invstd[ch];
    const double mean_db = db / static_cast<double>(m);
    const double mean_dg = dg / static_cast<double>(m);
    for (long i = 0; i < b; ++i) {
      const double* gc = gy.data() + (i * c + ch) * hw;
      const double* xh = cache.xhat.data() + (i * c + ch) * hw;
      double* gxc = gx.data() + (i * c + ch) * hw;
      for (long k = 0; k < hw; ++k) {
        gxc[k] = scale * (gc[k] - mean_db - xh[k] * mean_dg);
      }
    }
  }
}

Tensor leaky_relu_forward(const Tensor& x, double slope) {
  Tensor y = Tensor::zeros_like(x);
  for (long i = 0; i < x.numel(); ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
  return y;
}

void leaky_relu_backward(const Tensor& x, const Tensor& gy, double slope, Tensor& gx) {
  gx = Tensor::zeros_like(x);
  for (long i = 0; i < x.numel(); ++i) gx[i] = x[i] > 0.0 ? gy[i] : slope * gy[i];
}

Tensor sigmoid_forward(const Tensor& x) {
  Tensor y = Tensor::zeros_like(x);
  for (long i = 0; i < x.numel(); ++i) {
    const double v = x[i];
    if (v >= 0.0) {
      y[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      y[i] = e / (1.0 + e);
    }
  }
  return y;
}

void sigmoid_backward(const Tensor& y, const Tensor& gy, Tensor& gx) {
  gx = Tensor::zeros_like(y);
  for (long i = 0; i < y.numel(); ++i) gx[i] = gy[i] * y[i] * (1.0 - y[i]);
}

Tensor avgpool_forward(const Tensor& x, int factor) {
  check_bchw(x, "avgpool");
  const long b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  check_arg(factor >= 1 && h % factor == 0 && w % factor == 0,
            str_cat("avgpool: spatial size ", h, "x", w, " not divisible by ", factor));
  const long oh = h / factor, ow = w / factor;
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  Tensor y({b, c, oh, ow});
  for (long i = 0; i < b * c; ++i) {
    const double* xc = x.data() + i * h * w;
    double* yc = y.data() + i * oh * ow;
    for (long r = 0; r < oh; ++r) {
      for (long q = 0; q < ow; ++q) {
        double acc = 0.0;
        for (int u = 0; u < factor; ++u)
          for (int v = 0; v < factor; ++v) acc += xc[(r * factor + u) * w + q * factor + v];
        yc[r * ow + q] = acc * inv;
      }
    }
  }
  return y;
}

void avgpool_backward(const Tensor& gy, int factor, Tensor& gx) {
  const long b = gy.dim(0), c = gy.dim(1), oh = gy.dim(2), ow = gy.dim(3);
  const long h = oh * factor, w = ow * factor;
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  gx = Tensor({b, c, h, w});
  for (long i = 0; i < b * c; ++i) {
    const double* gc = gy.data() + i * oh * ow;
    double* gxc = gx.data() + i * h * w;
    for (long r = 0; r < oh; ++r) {
      for (long q = 0; q < ow; ++q) {
        const double g = gc[r * ow + q] * inv;
        for (int u = 0; u < factor; ++u)
          for (int v = 0; v < factor; ++v) gxc[(r * factor + u) * w + q * factor + v] += g;
      }
    }
  }
}

namespace {

struct LinSample {
  long i0, i1;
  double t;
};

// Half-pixel-center source coordinate for 1D upsampling, edges clamped.
LinSample lin_sample(long o, int factor, long src_size) {
  const double src = (static_cast<double>(o) + 0.5) / factor - 0.5;
  double fl = std::floor(src);
  long i0 = static_cast<long>(fl);
  double t = src - fl;
  long i1 = i0 + 1;
  if (i0 < 0) i0 = 0;
  if (i1 > src_size - 1) i1 = src_size - 1;
  if (i0 > src_size - 1) i0 = src_size - 1;
  return {i0, i1, t};
}

}  // namespace

Tensor upsample_bilinear_forward(const Tensor& x, int factor) {
  check_bchw(x, "upsample");
  const long b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const long oh = h * factor, ow = w * factor;
  Tensor y({b, c, oh, ow});
  std::vector<LinSample> rows(static_cast<std::size_t>(oh)), cols(static_cast<std::size_t>(ow));
  for (long r = 0; r < oh; ++r) rows[static_cast<std::size_t>(r)] = lin_sample(r, factor, h);
  for (long q = 0; q < ow; ++q) cols[static_cast<std::size_t>(q)] = lin_sample(q, factor, w);
  for (long i = 0; i < b * c; ++i) {
    const double* xc = x.data() + i * h * w;
    double* yc = y.data() + i * oh * ow;
    for (long r = 0; r < oh; ++r) {
      const auto& rs = rows[static_cast<std::size_t>(r)];
      for (long q = 0; q < ow; ++q) {
        const auto& cs = cols[static_cast<std::size_t>(q)];
        const double top = (1.0 - cs.t) * xc[rs.i0 * w + cs.i0] + cs.t * xc[rs.i0 * w + cs.i1];
        const double bot = (1.0 - cs.t) * xc[rs.i1 * w + cs.i0] + cs.t * xc[rs.i1 * w + cs.i1];
        yc[r * ow + q] = (1.0 - rs.t) * top + rs.t * bot;
      }
    }
  }
  return y;
}

void upsample_bilinear_backward(const Tensor& gy, int factor, Tensor& gx) {
  const long b = gy.dim(0), c = gy.dim(1), oh = gy.dim(2), ow = gy.dim(3);
  const long h = oh / factor, w = ow / factor;
  gx = Tensor({b, c, h, w});
  std::vector<LinSample> rows(static_cast<std::size_t>(oh)), cols(static_cast<std::size_t>(ow));
  for (long r = 0; r < oh; ++r) rows[static_cast<std::size_t>(r)] = lin_sample(r, factor, h);
  for (long q = 0; q < ow; ++q) cols[static_cast<std::size_t>(q)] = lin_sample(q, factor, w);
  for (long i = 0; i < b * c; ++i) {
    const double* gc = gy.data() + i * oh * ow;
    double* gxc = gx.data() + i * h * w;
    for (long r = 0; r < oh; ++r) {
      const auto& rs = rows[static_cast<std::size_t>(r)];
      for (long q = 0; q < ow; ++q) {
        const auto& cs = cols[static_cast<std::size_t>(q)];
        const double g = gc[r * ow + q];
        gxc[rs.i0 * w + cs.i0] += (1.0 - rs.t) * (1.0 - cs.t) * g;
        gxc[rs.i0 * w + cs.i1] += (1.0 - rs.t) * cs.t * g;
        gxc[rs.i1 * w + cs.i0] += rs.t * (1.0 - cs.t) * g;
        gxc[rs.i1 * w + cs.i1] += rs.t * cs.t * g;
      }
    }
  }
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check_bchw(a, "concat");
  check_bchw(b, "concat");
  check_arg(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3),
            str_cat("concat: shapes ", shape_str(a), " and ", shape_str(b), " incompatible"));
  const long bs = a.dim(0), ca = a.dim(1), cb = b.dim(1), h = a.dim(2), w = a.dim(3);
  const long hw = h * w;
  Tensor y({bs, ca + cb, h, w});
  for (long i = 0; i < bs; ++i) {
    std::copy(a.data() + i * ca * hw, a.data() + (i + 1) * ca * hw,
              y.data() + i * (ca + cb) * hw);
    std::copy(b.data() + i * cb * hw, b.data() + (i + 1) * cb * hw,
              y.data() + (i * (ca + cb) + ca) * hw);
  }
  return y;
}

void split_channels_backward(const Tensor& gy, long channels_a, Tensor& ga, Tensor& gb) {
  const long bs = gy.dim(0), c = gy.dim(1), h = gy.dim(2), w = gy.dim(3);
  const long ca = channels_a, cb = c - channels_a;
  const long hw = h * w;
  ga = Tensor({bs, ca, h, w});
  gb = Tensor({bs, cb, h, w});
  for (long i = 0; i < bs; ++i) {
    std::copy(gy.data() + i * c * hw, gy.data() + (i * c + ca) * hw, ga.data() + i * ca * hw);
    std::copy(gy.data() + (i * c + ca) * hw, gy.data() + (i + 1) * c * hw,
              gb.data() + i * cb * hw);
  }
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  check_arg(a.same_shape(b),
            str_cat("multiply: shape mismatch ", shape_str(a), " vs ", shape_str(b)));
  Tensor y = Tensor::zeros_like(a);
  for (long i = 0; i < a.numel(); ++i) y[i] = a[i] * b[i];
  return y;
}

Tensor head_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor y = pointwise_forward(x, w);
  const long bs = y.dim(0), m = y.dim(1), hw = y.dim(2) * y.dim(3);
  for (long i = 0; i < bs; ++i)
    for (long c = 0; c < m; ++c) {
      double* yc = y.data() + (i * m + c) * hw;
      const double bias = b[c];
      for (long k = 0; k < hw; ++k) yc[k] += bias;
    }
  return y;
}

void head_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                   Tensor& gx, Tensor& gw, Tensor& gb) {
  pointwise_backward(x, w, gy, gx, gw);
  const long bs = gy.dim(0), m = gy.dim(1), hw = gy.dim(2) * gy.dim(3);
  for (long i = 0; i < bs; ++i)
    for (long c = 0; c < m; ++c) {
      const double* gc = gy.data() + (i * m + c) * hw;
      double acc = 0.0;
      for (long k = 0; k < hw; ++k) acc += gc[k];
      gb[c] += acc;
    }
}

double bce_sum(const Tensor& pred, const Tensor& target, double eps) {
  check_arg(pred.same_shape(target),
            str_cat("bce: shape mismatch ", shape_str(pred), " vs ", shape_str(target)));
  double loss = 0.0;
  for (long i = 0; i < pred.numel(); ++i) {
    double f = pred[i];
    if (f < eps) f = eps;
    if (f > 1.0 - eps) f = 1.0 - eps;
    const double y = target[i];
    loss += -y * std::log(f) - (1.0 - y) * std::log(1.0 - f);
  }
  return loss;
}

double bce_sum_backward(const Tensor& pred, const Tensor& target, double scale,
                        Tensor& grad, double eps) {
  check_arg(pred.same_shape(target) && grad.same_shape(pred), "bce_backward: shape mismatch");
  double loss = 0.0;
  for (long i = 0; i < pred.numel(); ++i) {
    const double raw = pred[i];
    double f = raw;
    bool clamped = false;
    if (f < eps) {
      f = eps;
      clamped = true;
    }
    if (f > 1.0 - eps) {
      f = 1.0 - eps;
      clamped = true;
    }
    const double y = target[i];
    loss += -y * std::log(f) - (1.0 - y) * std::log(1.0 - f);
    if (!clamped) grad[i] += scale * (f - y) / (f * (1.0 - f));
  }
  return loss;
}

}  // namespace uland::ops
