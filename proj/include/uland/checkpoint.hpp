#pragma once

#include <filesystem>
#include <memory>

#include "uland/model.hpp"

namespace uland {

/// Single-file archive: magic, a JSON header (variant, ModelConfig, tensor
/// directory) and the raw little-endian float64 payload. Parameters and
/// batch-norm running statistics round-trip bit-exactly.
void save_checkpoint(Network& net, const std::filesystem::path& path);

std::unique_ptr<Network> load_checkpoint(const std::filesystem::path& path);

}  // namespace uland
