#include "uland/model.hpp"

#include <cmath>

namespace uland {

std::string to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::gu2net: return "gu2net";
    case VariantKind::unet: return "unet";
    case VariantKind::tri_unet: return "tri_unet";
    case VariantKind::local_only: return "local_only";
    case VariantKind::global_only: return "global_only";
  }
  return "?";
}

VariantKind variant_from_string(const std::string& s) {
  if (s == "gu2net") return VariantKind::gu2net;
  if (s == "unet") return VariantKind::unet;
  if (s == "tri_unet") return VariantKind::tri_unet;
  if (s == "local_only") return VariantKind::local_only;
  if (s == "global_only") return VariantKind::global_only;
  throw std::invalid_argument(
      str_cat("unknown variant '", s,
              "' (expected gu2net|unet|tri_unet|local_only|global_only)"));
}

void ModelConfig::validate() const {
  check_arg(!domains.empty(), "ModelConfig: at least one domain required");
  check_arg(depth >= 2, "ModelConfig: depth must be >= 2");
  check_arg(base_channels >= 4, "ModelConfig: base_channels must be >= 4");
  check_arg(leaky_slope > 0.0 && leaky_slope < 1.0, "ModelConfig: leaky_slope out of range");
  check_arg(!dilations.empty(), "ModelConfig: dilations must be non-empty");
  for (int d : dilations) check_arg(d >= 1, "ModelConfig: dilations must be >= 1");
  check_arg(global_downsample >= 1, "ModelConfig: global_downsample must be >= 1");
  check_arg(global_channels >= 1, "ModelConfig: global_channels must be >= 1");
  check_arg(sigma > 0.0, "ModelConfig: sigma must be positive");
  const long div = 1L << (depth - 1);
  for (const DomainSpec& d : domains) {
    d.validate();
    check_arg(d.resize_h % div == 0 && d.resize_w % div == 0,
              str_cat("domain '", d.domain_id, "': resize target ", d.resize_h, "x", d.resize_w,
                      " not divisible by 2^(depth-1) = ", div));
    check_arg(d.resize_h % global_downsample == 0 && d.resize_w % global_downsample == 0,
              str_cat("domain '", d.domain_id, "': resize target not divisible by ",
                      global_downsample));
  }
}

int ModelConfig::domain_index(const std::string& domain_id) const {
  for (std::size_t i = 0; i < domains.size(); ++i)
    if (domains[i].domain_id == domain_id) return static_cast<int>(i);
  return -1;
}

namespace {

void check_domain(int domain, int num_domains, const char* who) {
  check_arg(domain >= 0 && domain < num_domains,
            str_cat(who, ": domain index ", domain, " out of range [0,", num_domains, ")"));
}

constexpr double kBnMomentum = 0.1;
constexpr double kBnEps = 1e-5;

}  // namespace

// ---------------------------------------------------------------------------
// SeparableConvBlock

SeparableConvBlock::SeparableConvBlock(const std::string& name, int in_ch, int out_ch,
                                       int num_domains, double leaky_slope)
    : in_ch_(in_ch), out_ch_(out_ch), num_domains_(num_domains), slope_(leaky_slope) {
  check_arg(in_ch >= 1 && out_ch >= 1 && num_domains >= 1, "SeparableConvBlock: bad sizes");
  for (int d = 0; d < num_domains; ++d) {
    Parameter p;
    p.name = str_cat(name, ".cw.d", d);
    p.value = Tensor({in_ch, 3, 3});
    p.kind = ParamKind::conv;
    p.domain = d;
    cw_.push_back(std::move(p));
  }
  pw_.name = str_cat(name, ".pw");
  pw_.value = Tensor({out_ch, in_ch});
  pw_.kind = ParamKind::conv;
  gamma_.name = str_cat(name, ".bn.gamma");
  gamma_.value = Tensor({static_cast<long>(out_ch)});
  gamma_.kind = ParamKind::norm_scale;
  beta_.name = str_cat(name, ".bn.beta");
  beta_.value = Tensor({static_cast<long>(out_ch)});
  beta_.kind = ParamKind::norm_shift;
  rmean_.name = str_cat(name, ".bn.rmean");
  rmean_.value = Tensor({static_cast<long>(out_ch)});
  rvar_.name = str_cat(name, ".bn.rvar");
  rvar_.value = Tensor({static_cast<long>(out_ch)});
  rvar_.value.fill(1.0);
}

Tensor SeparableConvBlock::forward(const Tensor& x, int domain, bool training) {
  check_domain(domain, num_domains_, "SeparableConvBlock");
  check_arg(x.dim(1) == in_ch_, str_cat("SeparableConvBlock: expected ", in_ch_,
                                        " input channels, got ", x.dim(1)));
  Tensor mid = ops::depthwise3x3_forward(x, cw_[static_cast<std::size_t>(domain)].value);
  Tensor pre = ops::pointwise_forward(mid, pw_.value);
  Tensor bn = ops::batchnorm_forward(pre, gamma_.value, beta_.value, rmean_.value, rvar_.value,
                                     training, kBnMomentum, kBnEps, bn_cache_);
  Tensor y = ops::leaky_relu_forward(bn, slope_);
  if (training) {
    x_ = x;
    mid_ = std::move(mid);
    bn_out_ = std::move(bn);
    has_cache_ = true;
  }
  return y;
}

Tensor SeparableConvBlock::backward(const Tensor& gy, int domain) {
  check_domain(domain, num_domains_, "SeparableConvBlock");
  check_arg(has_cache_, "SeparableConvBlock: backward without training forward");
  Tensor g1, g2, g3, gx;
  ops::leaky_relu_backward(bn_out_, gy, slope_, g1);
  ops::batchnorm_backward(g1, gamma_.value, bn_cache_, g2, gamma_.grad, beta_.grad);
  ops::pointwise_backward(mid_, pw_.value, g2, g3, pw_.grad);
  ops::depthwise3x3_backward(x_, cw_[static_cast<std::size_t>(domain)].value, g3, gx,
                             cw_[static_cast<std::size_t>(domain)].grad);
  return gx;
}

void SeparableConvBlock::collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) {
  for (auto& p : cw_) params.push_back(&p);
  params.push_back(&pw_);
  params.push_back(&gamma_);
  params.push_back(&beta_);
  buffers.push_back(&rmean_);
  buffers.push_back(&rvar_);
}

// ---------------------------------------------------------------------------
// ConvBlock

ConvBlock::ConvBlock(const std::string& name, int in_ch, int out_ch, int dilation,
                     double leaky_slope, int domain)
    : in_ch_(in_ch), out_ch_(out_ch), dilation_(dilation), domain_(domain), slope_(leaky_slope) {
  w_.name = str_cat(name, ".w");
  w_.value = Tensor({out_ch, in_ch, 3, 3});
  w_.kind = ParamKind::conv;
  w_.domain = domain;
  gamma_.name = str_cat(name, ".bn.gamma");
  gamma_.value = Tensor({static_cast<long>(out_ch)});
  gamma_.kind = ParamKind::norm_scale;
  gamma_.domain = domain;
  beta_.name = str_cat(name, ".bn.beta");
  beta_.value = Tensor({static_cast<long>(out_ch)});
  beta_.kind = ParamKind::norm_shift;
  beta_.domain = domain;
  rmean_.name = str_cat(name, ".bn.rmean");
  rmean_.value = Tensor({static_cast<long>(out_ch)});
  rvar_.name = str_cat(name, ".bn.rvar");
  rvar_.value = Tensor({static_cast<long>(out_ch)});
  rvar_.value.fill(1.0);
}

Tensor ConvBlock::forward(const Tensor& x, int domain, bool training) {
  if (domain_ >= 0)
    check_arg(domain == domain_, str_cat("ConvBlock ", w_.name, ": forward with domain ", domain,
                                         " but block belongs to domain ", domain_));
  Tensor pre = ops::conv3x3_forward(x, w_.value, dilation_);
  Tensor bn = ops::batchnorm_forward(pre, gamma_.value, beta_.value, rmean_.value, rvar_.value,
                                     training, kBnMomentum, kBnEps, bn_cache_);
  Tensor y = ops::leaky_relu_forward(bn, slope_);
  if (training) {
    x_ = x;
    bn_out_ = std::move(bn);
    has_cache_ = true;
  }
  return y;
}

Tensor ConvBlock::backward(const Tensor& gy, int /*domain*/) {
  check_arg(has_cache_, "ConvBlock: backward without training forward");
  Tensor g1, g2, gx;
  ops::leaky_relu_backward(bn_out_, gy, slope_, g1);
  ops::batchnorm_backward(g1, gamma_.value, bn_cache_, g2, gamma_.grad, beta_.grad);
  ops::conv3x3_backward(x_, w_.value, g2, dilation_, gx, w_.grad);
  return gx;
}

void ConvBlock::collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) {
  params.push_back(&w_);
  params.push_back(&gamma_);
  params.push_back(&beta_);
  buffers.push_back(&rmean_);
  buffers.push_back(&rvar_);
}

// ---------------------------------------------------------------------------
// DomainHeads

DomainHeads::DomainHeads(const std::string& prefix, int in_ch,
                         const std::vector<int>& out_channels) {
  for (std::size_t d = 0; d < out_channels.size(); ++d) {
    Parameter w;
    w.name = str_cat(prefix, ".d", d, ".w");
    w.value = Tensor({out_channels[d], in_ch});
    w.kind = ParamKind::head;
    w.domain = static_cast<int>(d);
    w_.push_back(std::move(w));
    Parameter b;
    b.name = str_cat(prefix, ".d", d, ".b");
    b.value = Tensor({static_cast<long>(out_channels[d])});
    b.kind = ParamKind::bias;
    b.domain = static_cast<int>(d);
    b_.push_back(std::move(b));
  }
}

Tensor DomainHeads::forward(const Tensor& x, int domain, bool training) {
  check_domain(domain, static_cast<int>(w_.size()), "DomainHeads");
  if (training) {
    x_ = x;
    has_cache_ = true;
  }
  return ops::head_forward(x, w_[static_cast<std::size_t>(domain)].value,
                           b_[static_cast<std::size_t>(domain)].value);
}

Tensor DomainHeads::backward(const Tensor& gy, int domain) {
  check_arg(has_cache_, "DomainHeads: backward without training forward");
  Tensor gx;
  ops::head_backward(x_, w_[static_cast<std::size_t>(domain)].value, gy, gx,
                     w_[static_cast<std::size_t>(domain)].grad,
                     b_[static_cast<std::size_t>(domain)].grad);
  return gx;
}

void DomainHeads::collect(std::vector<Parameter*>& params, std::vector<Buffer*>& /*buffers*/) {
  for (std::size_t d = 0; d < w_.size(); ++d) {
    params.push_back(&w_[d]);
    params.push_back(&b_[d]);
  }
}

// ---------------------------------------------------------------------------
// LocalNet

namespace {

std::vector<int> landmark_counts(const ModelConfig& cfg) {
  std::vector<int> out;
  for (const auto& d : cfg.domains) out.push_back(d.num_landmarks);
  return out;
}

int common_in_channels(const ModelConfig& cfg) {
  // The shared body needs a single input channel count across domains.
  const int c = cfg.domains.front().in_channels;
  for (const auto& d : cfg.domains)
    check_arg(d.in_channels == c,
              "shared body requires identical in_channels across domains");
  return c;
}

}  // namespace

LocalNet::LocalNet(const ModelConfig& cfg)
    : body_(cfg.depth, cfg.base_channels, common_in_channels(cfg),
            [&cfg](const std::string& n, int in_ch, int out_ch) {
              return SeparableConvBlock(str_cat("local.", n), in_ch, out_ch, cfg.num_domains(),
                                        cfg.leaky_slope);
            }),
      heads_("local.head", cfg.base_channels, landmark_counts(cfg)) {}

Tensor LocalNet::forward(const Tensor& x, int domain, bool training) {
  Tensor feat = body_.forward(x, domain, training);
  Tensor logits = heads_.forward(feat, domain, training);
  Tensor y = ops::sigmoid_forward(logits);
  if (training) {
    sig_out_ = y;
    has_cache_ = true;
  }
  return y;
}

Tensor LocalNet::backward(const Tensor& g_heatmap, int domain) {
  check_arg(has_cache_, "LocalNet: backward without training forward");
  Tensor g_logits;
  ops::sigmoid_backward(sig_out_, g_heatmap, g_logits);
  Tensor g_feat = heads_.backward(g_logits, domain);
  return body_.backward(g_feat, domain);
}

void LocalNet::collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) {
  body_.collect(params, buffers);
  heads_.collect(params, buffers);
}

// ---------------------------------------------------------------------------
// GlobalNet

GlobalNet::GlobalNet(const ModelConfig& cfg, bool with_local_input)
    : downsample_(cfg.global_downsample), with_local_(with_local_input) {
  const int layers = static_cast<int>(cfg.dilations.size());
  for (int d = 0; d < cfg.num_domains(); ++d) {
    const DomainSpec& spec = cfg.domains[static_cast<std::size_t>(d)];
    image_channels_.push_back(spec.in_channels);
    local_channels_.push_back(with_local_ ? spec.num_landmarks : 0);
    const int in0 = spec.in_channels + (with_local_ ? spec.num_landmarks : 0);
    std::vector<ConvBlock> stack;
    for (int k = 0; k < layers; ++k) {
      const int in_ch = k == 0 ? in0 : cfg.global_channels;
      const int out_ch = k == layers - 1 ? spec.num_landmarks : cfg.global_channels;
      stack.push_back(ConvBlock(str_cat("global.d", d, ".conv", k), in_ch, out_ch,
                                cfg.dilations[static_cast<std::size_t>(k)], cfg.leaky_slope, d));
    }
    stacks_.push_back(std::move(stack));
  }
}

Tensor GlobalNet::forward(const Tensor& image, const Tensor* local_heatmap, int domain,
                          bool training) {
  check_domain(domain, static_cast<int>(stacks_.size()), "GlobalNet");
  check_arg(image.dim(2) % downsample_ == 0 && image.dim(3) % downsample_ == 0,
            str_cat("GlobalNet: spatial size not divisible by ", downsample_));
  Tensor z = ops::avgpool_forward(image, downsample_);
  if (with_local_) {
    check_arg(local_heatmap != nullptr, "GlobalNet: local heatmap input required");
    check_arg(local_heatmap->dim(2) == image.dim(2) && local_heatmap->dim(3) == image.dim(3),
              str_cat("GlobalNet: image ", shape_str(image), " and local heatmap ",
                      shape_str(*local_heatmap), " spatial sizes differ"));
    Tensor ld = ops::avgpool_forward(*local_heatmap, downsample_);
    z = ops::concat_channels(z, ld);
  }
  auto& stack = stacks_[static_cast<std::size_t>(domain)];
  for (auto& block : stack) z = block.forward(z, domain, training);
  Tensor up = ops::upsample_bilinear_forward(z, downsample_);
  Tensor y = ops::sigmoid_forward(up);
  if (training) {
    sig_out_ = y;
    has_cache_ = true;
  }
  return y;
}

void GlobalNet::backward(const Tensor& g_heatmap, int domain, Tensor& g_image, Tensor* g_local) {
  check_arg(has_cache_, "GlobalNet: backward without training forward");
  Tensor g_up, g;
  ops::sigmoid_backward(sig_out_, g_heatmap, g_up);
  ops::upsample_bilinear_backward(g_up, downsample_, g);
  auto& stack = stacks_[static_cast<std::size_t>(domain)];
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) g = it->backward(g, domain);
  if (with_local_) {
    Tensor gxd, gld;
    ops::split_channels_backward(g, image_channels_[static_cast<std::size_t>(domain)], gxd, gld);
    ops::avgpool_backward(gxd, downsample_, g_image);
    check_arg(g_local != nullptr, "GlobalNet: g_local output required");
    ops::avgpool_backward(gld, downsample_, *g_local);
  } else {
    ops::avgpool_backward(g, downsample_, g_image);
  }
}

void GlobalNet::collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) {
  for (auto& stack : stacks_)
    for (auto& block : stack) block.collect(params, buffers);
}

// ---------------------------------------------------------------------------
// Network base

std::vector<Parameter*>& Network::parameters() {
  if (!collected_) {
    collect(params_, buffers_);
    collected_ = true;
  }
  return params_;
}

std::vector<Buffer*>& Network::buffers() {
  parameters();
  return buffers_;
}

void Network::zero_grad() {
  for (Parameter* p : parameters()) {
    if (p->grad.empty()) p->grad = Tensor(p->value.shape());
    p->grad.zero();
  }
}

Tensor fuse(const Tensor& local_heatmap, const Tensor& global_heatmap) {
  return ops::multiply(local_heatmap, global_heatmap);
}

// ---------------------------------------------------------------------------
// Variants

namespace {

class Gu2Net final : public Network {
 public:
  explicit Gu2Net(const ModelConfig& cfg) : Network(cfg), local_(cfg), global_(cfg, true) {}

  ForwardOut forward(const Tensor& x, int domain, bool training) override {
    ForwardOut out;
    out.local = local_.forward(x, domain, training);
    out.global = global_.forward(x, &out.local, domain, training);
    out.final = fuse(out.local, out.global);
    if (training) {
      local_cache_ = out.local;
      global_cache_ = out.global;
    }
    return out;
  }

  Tensor backward(const Tensor& grad_final, int domain) override {
    ensure_grads();
    // d(final)/d(local) through the product and through the global stack input.
    Tensor g_local = ops::multiply(grad_final, global_cache_);
    Tensor g_global = ops::multiply(grad_final, local_cache_);
    Tensor g_img_global, g_local_via_global;
    global_.backward(g_global, domain, g_img_global, &g_local_via_global);
    g_local.add_(g_local_via_global);
    Tensor g_img_local = local_.backward(g_local, domain);
    g_img_local.add_(g_img_global);
    return g_img_local;
  }

  VariantKind kind() const override { return VariantKind::gu2net; }

 protected:
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) override {
    local_.collect(params, buffers);
    global_.collect(params, buffers);
  }

 private:
  LocalNet local_;
  GlobalNet global_;
  Tensor local_cache_, global_cache_;
};

class LocalOnly final : public Network {
 public:
  explicit LocalOnly(const ModelConfig& cfg) : Network(cfg), local_(cfg) {}

  ForwardOut forward(const Tensor& x, int domain, bool training) override {
    ForwardOut out;
    out.final = local_.forward(x, domain, training);
    out.local = out.final;
    return out;
  }

  Tensor backward(const Tensor& grad_final, int domain) override {
    ensure_grads();
    return local_.backward(grad_final, domain);
  }

  VariantKind kind() const override { return VariantKind::local_only; }

 protected:
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) override {
    local_.collect(params, buffers);
  }

 private:
  LocalNet local_;
};

class GlobalOnly final : public Network {
 public:
  explicit GlobalOnly(const ModelConfig& cfg) : Network(cfg), global_(cfg, false) {}

  ForwardOut forward(const Tensor& x, int domain, bool training) override {
    ForwardOut out;
    out.final = global_.forward(x, nullptr, domain, training);
    out.global = out.final;
    return out;
  }

  Tensor backward(const Tensor& grad_final, int domain) override {
    ensure_grads();
    Tensor g_img;
    global_.backward(grad_final, domain, g_img, nullptr);
    return g_img;
  }

  VariantKind kind() const override { return VariantKind::global_only; }

 protected:
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) override {
    global_.collect(params, buffers);
  }

 private:
  GlobalNet global_;
};

/// Plain U-Net baseline: one shared standard-convolution body (theta_s) with
/// per-domain output heads.
class StandardUNet final : public Network {
 public:
  explicit StandardUNet(const ModelConfig& cfg)
      : Network(cfg),
        body_(cfg.depth, cfg.base_channels, common_in_channels(cfg),
              [&cfg](const std::string& n, int in_ch, int out_ch) {
                return ConvBlock(str_cat("body.", n), in_ch, out_ch, 1, cfg.leaky_slope, -1);
              }),
        heads_("head", cfg.base_channels, landmark_counts(cfg)) {}

  ForwardOut forward(const Tensor& x, int domain, bool training) override {
    Tensor feat = body_.forward(x, domain, training);
    Tensor logits = heads_.forward(feat, domain, training);
    ForwardOut out;
    out.final = ops::sigmoid_forward(logits);
    if (training) {
      sig_out_ = out.final;
      has_cache_ = true;
    }
    return out;
  }

  Tensor backward(const Tensor& grad_final, int domain) override {
    ensure_grads();
    check_arg(has_cache_, "StandardUNet: backward without training forward");
    Tensor g_logits;
    ops::sigmoid_backward(sig_out_, grad_final, g_logits);
    Tensor g_feat = heads_.backward(g_logits, domain);
    return body_.backward(g_feat, domain);
  }

  VariantKind kind() const override { return VariantKind::unet; }

  UNetBody<ConvBlock>& body() { return body_; }

 protected:
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) override {
    body_.collect(params, buffers);
    heads_.collect(params, buffers);
  }

 private:
  UNetBody<ConvBlock> body_;
  DomainHeads heads_;
  Tensor sig_out_;
  bool has_cache_ = false;
};

/// U-Net with every body convolution duplicated once per domain (theta_d).
class TriUNet final : public Network {
 public:
  explicit TriUNet(const ModelConfig& cfg) : Network(cfg), heads_("head", cfg.base_channels, landmark_counts(cfg)) {
    for (int d = 0; d < cfg.num_domains(); ++d) {
      bodies_.emplace_back(
          cfg.depth, cfg.base_channels, cfg.domains[static_cast<std::size_t>(d)].in_channels,
          [&cfg, d](const std::string& n, int in_ch, int out_ch) {
            return ConvBlock(str_cat("body.d", d, ".", n), in_ch, out_ch, 1, cfg.leaky_slope, d);
          });
    }
  }

  ForwardOut forward(const Tensor& x, int domain, bool training) override {
    check_domain(domain, static_cast<int>(bodies_.size()), "TriUNet");
    Tensor feat = bodies_[static_cast<std::size_t>(domain)].forward(x, domain, training);
    Tensor logits = heads_.forward(feat, domain, training);
    ForwardOut out;
    out.final = ops::sigmoid_forward(logits);
    if (training) {
      sig_out_ = out.final;
      has_cache_ = true;
    }
    return out;
  }

  Tensor backward(const Tensor& grad_final, int domain) override {
    ensure_grads();
    check_arg(has_cache_, "TriUNet: backward without training forward");
    Tensor g_logits;
    ops::sigmoid_backward(sig_out_, grad_final, g_logits);
    Tensor g_feat = heads_.backward(g_logits, domain);
    return bodies_[static_cast<std::size_t>(domain)].backward(g_feat, domain);
  }

  VariantKind kind() const override { return VariantKind::tri_unet; }

 protected:
  void collect(std::vector<Parameter*>& params, std::vector<Buffer*>& buffers) override {
    for (auto& b : bodies_) b.collect(params, buffers);
    heads_.collect(params, buffers);
  }

 private:
  std::vector<UNetBody<ConvBlock>> bodies_;
  DomainHeads heads_;
  Tensor sig_out_;
  bool has_cache_ = false;
};

long fan_in(const Parameter& p) {
  switch (p.value.rank()) {
    case 2: return p.value.dim(1);                       // point-wise / head [M,N]
    case 3: return 9;                                    // channel-wise [N,3,3]
    case 4: return 9 * p.value.dim(1);                   // standard [M,N,3,3]
    default: return 1;
  }
}

void init_parameters(Network& net, const Rng& root) {
  for (Parameter* p : net.parameters()) {
    Rng rng = root.substream(p->name);
    switch (p->kind) {
      case ParamKind::conv:
      case ParamKind::head: {
        const double std = std::sqrt(2.0 / static_cast<double>(fan_in(*p)));
        for (long i = 0; i < p->value.numel(); ++i) p->value[i] = std * rng.normal();
        break;
      }
      case ParamKind::norm_scale:
        p->value.fill(1.0);
        break;
      case ParamKind::norm_shift:
        p->value.fill(0.0);
        break;
      case ParamKind::bias:
        // Heads start biased toward empty heatmaps (sigmoid(-4) ~ 0.018),
        // which matches the mostly-background targets.
        p->value.fill(-4.0);
        break;
    }
  }
}

}  // namespace

std::unique_ptr<Network> build_variant(VariantKind kind, const ModelConfig& config, Rng init_rng) {
  config.validate();
  std::unique_ptr<Network> net;
  switch (kind) {
    case VariantKind::gu2net: net = std::make_unique<Gu2Net>(config); break;
    case VariantKind::unet: net = std::make_unique<StandardUNet>(config); break;
    case VariantKind::tri_unet: net = std::make_unique<TriUNet>(config); break;
    case VariantKind::local_only: net = std::make_unique<LocalOnly>(config); break;
    case VariantKind::global_only: net = std::make_unique<GlobalOnly>(config); break;
  }
  init_parameters(*net, init_rng.substream("init"));
  return net;
}

ParamCounts count_params(Network& net) {
  ParamCounts c;
  for (const Parameter* p : net.parameters()) {
    const long n = p->value.numel();
    c.total += n;
    if (p->is_shared())
      c.shared += n;
    else
      c.domain_specific += n;
    switch (p->kind) {
      case ParamKind::conv: c.conv_weights += n; break;
      case ParamKind::head: c.head_weights += n; break;
      case ParamKind::norm_scale:
      case ParamKind::norm_shift: c.norm_params += n; break;
      case ParamKind::bias: c.biases += n; break;
    }
  }
  return c;
}

}  // namespace uland
