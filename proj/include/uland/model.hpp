#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "uland/common.hpp"
#include "uland/domain.hpp"
#include "uland/ops.hpp"
#include "uland/tensor.hpp"

namespace uland {

enum class VariantKind { gu2net, unet, tri_unet, local_only, global_only };

std::string to_string(VariantKind kind);
VariantKind variant_from_string(const std::string& s);

/// Architecture hyperparameters shared by all variants.
struct ModelConfig {
  std::vector<DomainSpec> domains;
  int depth = 4;               // encoder/decoder levels
  int base_channels = 32;      // top-level width, doubled per level
  double leaky_slope = 0.01;
  std::vector<int> dilations = {1, 2, 5, 2, 1};
  double sigma = 3.0;
  int global_downsample = 4;
  int global_channels = 64;    // width of the dilated layers before the C' head

  void validate() const;
  int num_domains() const { return static_cast<int>(domains.size()); }
  int domain_index(const std::string& domain_id) const;  // -1 if unknown
};

enum class ParamKind { conv, head, norm_scale, norm_shift, bias };

/// One learnable tensor. domain < 0 marks shared parameters (theta_s);
/// domain >= 0 marks domain-specific ones (theta_d).
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m, adam_v;  // optimizer state, sized on first use
  ParamKind kind = ParamKind::conv;
  int domain = -1;
  bool is_shared() const { return domain < 0; }
};

/// Non-learnable state (batch-norm running statistics).
struct Buffer {
  std::string name;
  Tensor value;
};

/// Separable convolution: per-domain channel-wise 3x3 banks (theta_d) feeding
/// a shared point-wise 1x1 bank (theta_s), then shared batch norm and leaky
/// ReLU. Learnable conv weights per block: 9*N*T + N*M.
class SeparableConvBlock {
 public:
  SeparableConvBlock(const std::string& name, int in_ch, int out_ch, int num_domains,
                     double leaky_slope);

  Tensor forward(const Tensor& x, int domain, bool training);
  Tensor backward(const Tensor& gy, int domain);
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers);

  long conv_weight_count() const {
    return 9L * in_ch_ * num_domains_ + static_cast<long>(in_ch_) * out_ch_;
  }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int num_domains() const { return num_domains_; }

 private:
  int in_ch_, out_ch_, num_domains_;
  double slope_;
  std::vector<Parameter> cw_;  // T banks of [N,3,3]
  Parameter pw_;               // [M,N]
  Parameter gamma_, beta_;
  Buffer rmean_, rvar_;
  // training caches
  Tensor x_, mid_, bn_out_;
  ops::BatchNormCache bn_cache_;
  bool has_cache_ = false;
};

/// Standard 3x3 convolution (optionally dilated) + batch norm + leaky ReLU.
/// `domain` tags the whole block's parameters as domain-specific (tri-UNet
/// streams, global network stacks); -1 makes them shared.
class ConvBlock {
 public:
  ConvBlock(const std::string& name, int in_ch, int out_ch, int dilation, double leaky_slope,
            int domain);

  Tensor forward(const Tensor& x, int domain, bool training);  // domain checked against tag
  Tensor backward(const Tensor& gy, int domain);
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers);

  long conv_weight_count() const { return 9L * in_ch_ * out_ch_; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

 private:
  int in_ch_, out_ch_, dilation_, domain_;
  double slope_;
  Parameter w_;  // [M,N,3,3]
  Parameter gamma_, beta_;
  Buffer rmean_, rvar_;
  Tensor x_, bn_out_;
  ops::BatchNormCache bn_cache_;
  bool has_cache_ = false;
};

/// Per-domain 1x1 output heads (linear, with bias). The owning network applies
/// the logistic squashing.
class DomainHeads {
 public:
  DomainHeads(const std::string& prefix, int in_ch, const std::vector<int>& out_channels);
  Tensor forward(const Tensor& x, int domain, bool training);
  Tensor backward(const Tensor& gy, int domain);
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers);

 private:
  std::vector<Parameter> w_, b_;
  Tensor x_;
  bool has_cache_ = false;
};

/// U-Net topology: per level two blocks, 2x average-pool downsampling,
/// bilinear upsampling with skip concatenation on the way up. Output is the
/// top-level decoder feature map (base_channels wide).
template <typename Block>
class UNetBody {
 public:
  /// make(name, in_ch, out_ch) -> Block
  template <typename Factory>
  UNetBody(int depth, int base_channels, int in_ch, Factory make) : depth_(depth) {
    check_arg(depth >= 2, "UNetBody: depth must be >= 2");
    for (int l = 0; l < depth; ++l) {
      const int w = base_channels << l;
      const int in0 = l == 0 ? in_ch : base_channels << (l - 1);
      enc_.push_back(make(str_cat("enc", l, ".b0"), in0, w));
      enc_.push_back(make(str_cat("enc", l, ".b1"), w, w));
    }
    for (int l = depth - 2; l >= 0; --l) {
      const int w = base_channels << l;
      dec_.push_back(make(str_cat("dec", l, ".b0"), 3 * w, w));
      dec_.push_back(make(str_cat("dec", l, ".b1"), w, w));
    }
  }

  Tensor forward(const Tensor& x, int domain, bool training) {
    const long div = 1L << (depth_ - 1);
    check_arg(x.dim(2) % div == 0 && x.dim(3) % div == 0,
              str_cat("UNetBody: spatial size ", x.dim(2), "x", x.dim(3),
                      " must be divisible by 2^(depth-1) = ", div));
    std::vector<Tensor> skips;
    Tensor a = x;
    for (int l = 0; l < depth_; ++l) {
      a = enc_[static_cast<std::size_t>(2 * l)].forward(a, domain, training);
      a = enc_[static_cast<std::size_t>(2 * l + 1)].forward(a, domain, training);
      if (l < depth_ - 1) {
        skips.push_back(a);
        a = ops::avgpool_forward(a, 2);
      }
    }
    for (int l = depth_ - 2; l >= 0; --l) {
      const std::size_t di = static_cast<std::size_t>(2 * (depth_ - 2 - l));
      Tensor up = ops::upsample_bilinear_forward(a, 2);
      a = ops::concat_channels(up, skips[static_cast<std::size_t>(l)]);
      a = dec_[di].forward(a, domain, training);
      a = dec_[di + 1].forward(a, domain, training);
    }
    return a;
  }

  Tensor backward(const Tensor& gy, int domain) {
    std::vector<Tensor> gskips(static_cast<std::size_t>(depth_ - 1));
    Tensor g = gy;
    for (int l = 0; l <= depth_ - 2; ++l) {
      const std::size_t di = static_cast<std::size_t>(2 * (depth_ - 2 - l));
      g = dec_[di + 1].backward(g, domain);
      g = dec_[di].backward(g, domain);
      const long up_ch = g.dim(1) * 2 / 3;  // concat was [2w | w]
      Tensor gu, gs;
      ops::split_channels_backward(g, up_ch, gu, gs);
      gskips[static_cast<std::size_t>(l)] = std::move(gs);
      ops::upsample_bilinear_backward(gu, 2, g);
    }
    for (int l = depth_ - 1; l >= 0; --l) {
      g = enc_[static_cast<std::size_t>(2 * l + 1)].backward(g, domain);
      g = enc_[static_cast<std::size_t>(2 * l)].backward(g, domain);
      if (l > 0) {
        Tensor gpool;
        ops::avgpool_backward(g, 2, gpool);
        gpool.add_(gskips[static_cast<std::size_t>(l - 1)]);
        g = std::move(gpool);
      }
    }
    return g;
  }

  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) {
    for (auto& b : enc_) b.collect(params, buffers);
    for (auto& b : dec_) b.collect(params, buffers);
  }

  std::vector<Block>& encoder_blocks() { return enc_; }
  std::vector<Block>& decoder_blocks() { return dec_; }

 private:
  int depth_;
  std::vector<Block> enc_;  // enc0.b0, enc0.b1, enc1.b0, ...
  std::vector<Block> dec_;  // dec{depth-2}.b0 ... dec0.b1 (execution order)
};

/// The universal U-Net: separable-convolution body shared across domains plus
/// per-domain output heads, squashed to (0,1).
class LocalNet {
 public:
  LocalNet(const ModelConfig& cfg);
  Tensor forward(const Tensor& x, int domain, bool training);
  /// grad wrt the local heatmap -> grad wrt the input image.
  Tensor backward(const Tensor& g_heatmap, int domain);
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers);
  UNetBody<SeparableConvBlock>& body() { return body_; }

 private:
  UNetBody<SeparableConvBlock> body_;
  DomainHeads heads_;
  Tensor sig_out_;
  bool has_cache_ = false;
};

/// Per-domain stack of five dilated 3x3 convolutions operating at 1/4
/// resolution on the downsampled image (optionally concatenated with the
/// downsampled local heatmap), bilinearly upsampled back and squashed.
class GlobalNet {
 public:
  GlobalNet(const ModelConfig& cfg, bool with_local_input);
  Tensor forward(const Tensor& image, const Tensor* local_heatmap, int domain, bool training);
  /// grad wrt the global heatmap -> grad wrt image (g_image) and, when the
  /// stack consumes the local heatmap, grad wrt it (g_local).
  void backward(const Tensor& g_heatmap, int domain, Tensor& g_image, Tensor* g_local);
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers);

 private:
  int downsample_;
  bool with_local_;
  std::vector<int> image_channels_;  // per domain
  std::vector<int> local_channels_;  // per domain (0 when !with_local_)
  std::vector<std::vector<ConvBlock>> stacks_;  // [domain][dilation index]
  Tensor sig_out_;
  bool has_cache_ = false;
};

struct ForwardOut {
  Tensor final;   // heatmap used for the loss / decoding, values in (0,1)
  Tensor local;   // only set by gu2net / local_only
  Tensor global;  // only set by gu2net / global_only
};

/// Common interface of all architecture variants. Training-mode forward
/// retains the caches consumed by backward; eval-mode forward is read-only
/// and safe to call concurrently.
class Network {
 public:
  virtual ~Network() = default;
  virtual ForwardOut forward(const Tensor& x, int domain, bool training) = 0;
  /// Accumulates parameter gradients; returns grad wrt the input image.
  virtual Tensor backward(const Tensor& grad_final, int domain) = 0;
  virtual VariantKind kind() const = 0;
  const ModelConfig& config() const { return config_; }

  std::vector<Parameter*>& parameters();
  std::vector<Buffer*>& buffers();
  void zero_grad();

 protected:
  explicit Network(const ModelConfig& cfg) : config_(cfg) {}
  virtual void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) = 0;
  /// Gradients accumulate across backward calls; allocate on first use.
  void ensure_grads() {
    for (Parameter* p : parameters())
      if (p->grad.empty()) p->grad = Tensor(p->value.shape());
  }
  ModelConfig config_;

 private:
  std::vector<Parameter*> params_;
  std::vector<Buffer*> buffers_;
  bool collected_ = false;
};

/// Elementwise product of the squashed local and global heatmaps.
Tensor fuse(const Tensor& local_heatmap, const Tensor& global_heatmap);

/// Builds a variant and initializes its parameters from `init_rng` (each
/// parameter uses an independent substream derived from its name).
std::unique_ptr<Network> build_variant(VariantKind kind, const ModelConfig& config, Rng init_rng);

/// Exact enumeration of learnable scalars.
struct ParamCounts {
  long total = 0;
  long domain_specific = 0;  // theta_d
  long shared = 0;           // theta_s
  long conv_weights = 0;     // body convolution weights (channel-wise, point-wise,
                             // standard and dilated); per-domain 1x1 heads excluded
  long head_weights = 0;
  long norm_params = 0;
  long biases = 0;
};
ParamCounts count_params(Network& net);

}  // namespace uland
