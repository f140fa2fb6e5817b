#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mlrq/core.hpp"
#include "mlrq/entropy.hpp"

namespace mlrq {

/// A trained quantizer plus the per-layer frequency tables that drive the
/// arithmetic coder. This is what ships to both ends of the channel;
/// bitstreams reference it by hash instead of embedding it.
struct Model {
    LayerStack stack;
    std::vector<FreqTable> tables;

    void validate() const;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// Little-endian layout: magic "MLRQMDL1", n (u32), L (u16), then per layer
/// k (u32), k*n codewords (f64, row-major), and the layer's table as
/// k (u32) plus k counts (u32). Training statistics are not persisted.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model parse_model(std::span<const std::uint8_t> bytes);

/// FNV-1a of the serialized bytes; the identity bitstreams carry.
std::uint64_t model_hash(const Model& model);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace mlrq
