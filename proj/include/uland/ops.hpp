#pragma once

#include "uland/tensor.hpp"

namespace uland::ops {

// Convolution / pooling primitives operate on [B,C,H,W] activations.
// All backward functions ACCUMULATE into weight gradients and ASSIGN input
// gradients unless stated otherwise. Reductions over the batch run in a fixed
// order so results are bitwise reproducible regardless of thread count.

/// Shared point-wise 1x1 convolution. w: [M,N]. No bias.
Tensor pointwise_forward(const Tensor& x, const Tensor& w);
void pointwise_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                        Tensor& gx, Tensor& gw);

/// Channel-wise 3x3 convolution, one filter per input channel, same padding.
/// w: [N,3,3]. No bias, no cross-channel mixing.
Tensor depthwise3x3_forward(const Tensor& x, const Tensor& w);
void depthwise3x3_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                           Tensor& gx, Tensor& gw);

/// Standard (optionally dilated) 3x3 convolution, same padding. w: [M,N,3,3].
Tensor conv3x3_forward(const Tensor& x, const Tensor& w, int dilation = 1);
void conv3x3_backward(const Tensor& x, const Tensor& w, const Tensor& gy, int dilation,
                      Tensor& gx, Tensor& gw);

struct BatchNormCache {
  Tensor xhat;     // [B,C,H,W]
  Tensor invstd;   // [C]
  bool training = true;
};

/// Batch normalization over (B,H,W) per channel. gamma/beta: [C].
/// Training mode normalizes with batch statistics and updates the running
/// averages in place (running_var uses the unbiased estimate); eval mode uses
/// the running averages.
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, bool training,
                         double momentum, double eps, BatchNormCache& cache);
/// Training-mode backward (batch statistics are part of the graph).
void batchnorm_backward(const Tensor& gy, const Tensor& gamma, const BatchNormCache& cache,
                        Tensor& gx, Tensor& ggamma, Tensor& gbeta);

Tensor leaky_relu_forward(const Tensor& x, double slope);
void leaky_relu_backward(const Tensor& x, const Tensor& gy, double slope, Tensor& gx);

Tensor sigmoid_forward(const Tensor& x);
/// Backward in terms of the forward output y.
void sigmoid_backward(const Tensor& y, const Tensor& gy, Tensor& gx);

/// Non-overlapping average pooling by an integer factor (H, W divisible).
Tensor avgpool_forward(const Tensor& x, int factor);
void avgpool_backward(const Tensor& gy, int factor, Tensor& gx);

/// Bilinear upsampling by an integer factor (half-pixel-center convention,
/// edges replicated). Linear in x, so backward is the exact transpose.
Tensor upsample_bilinear_forward(const Tensor& x, int factor);
void upsample_bilinear_backward(const Tensor& gy, int factor, Tensor& gx);

/// Concatenate along the channel axis.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels_backward(const Tensor& gy, long channels_a, Tensor& ga, Tensor& gb);

/// Elementwise product (heatmap fusion). Backward: gl += gy*g, gg += gy*l.
Tensor multiply(const Tensor& a, const Tensor& b);

/// 1x1 convolution with bias (output heads). w: [M,N], b: [M].
Tensor head_forward(const Tensor& x, const Tensor& w, const Tensor& b);
void head_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                   Tensor& gx, Tensor& gw, Tensor& gb);

/// Binary cross-entropy, summed over all elements. Predictions are clamped to
/// [eps, 1-eps] before the logs; the clamp boundary has zero gradient.
double bce_sum(const Tensor& pred, const Tensor& target, double eps = 1e-7);
/// Accumulates scale * dL/dpred into grad. Returns the loss.
double bce_sum_backward(const Tensor& pred, const Tensor& target, double scale,
                        Tensor& grad, double eps = 1e-7);

}  // namespace uland::ops
