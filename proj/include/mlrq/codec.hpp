#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mlrq/core.hpp"
#include "mlrq/image.hpp"
#include "mlrq/model_io.hpp"

namespace mlrq {

/// Block layout of one image: grid dimensions in blocks plus the original
/// pixel dimensions needed to crop padding on reassembly.
struct BlockGrid {
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t block = 0;
    std::size_t width = 0;
    std::size_t height = 0;

    std::size_t block_count() const { return cols * rows; }
};

/// Splits the image into non-overlapping b*b blocks in raster order,
/// row-major within each block, padding right/bottom edges by replication.
/// Pixel values are carried as reals without scaling.
std::pair<std::vector<Vec>, BlockGrid> extract_blocks(const GrayImage& img, std::size_t b);

/// Inverse of extract_blocks: rounds half away from zero, clamps to
/// [0, 255], and crops the padding.
GrayImage assemble_blocks(const std::vector<Vec>& blocks, const BlockGrid& grid);

/// Framed transmission unit: header plus one arithmetic-coded payload per
/// emitted layer. Any prefix of payloads decodes independently.
struct Bitstream {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint8_t block = 0;
    std::uint64_t model_hash = 0;
    std::vector<std::vector<std::uint8_t>> payloads;

    std::size_t layer_count() const { return payloads.size(); }
};

/// Little-endian layout: "MLRQ", version u8 = 1, width u32, height u32,
/// block u8, layer count u8, model hash u64, then per layer payload_len
/// u32 + payload bytes.
std::vector<std::uint8_t> serialize_bitstream(const Bitstream& bs);
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

/// Greedy multistage encode of every block, then one index stream per
/// layer through the arithmetic coder. The model's dimension must be a
/// square, and at most min(L, 255) layers can be emitted.
Bitstream encode_image(const GrayImage& img, const Model& model,
                       std::size_t layers_to_emit = kAllLayers);

/// Table-lookup decode of the first `layers_to_use` payloads, summed per
/// block, clamped once at the end. Refuses a stream whose model hash does
/// not match. Decoding j layers of a J-layer stream equals decoding a
/// stream that was encoded with only j layers.
GrayImage decode_image(const Bitstream& bs, const Model& model,
                       std::size_t layers_to_use = kAllLayers);

/// 10*log10(255^2 / MSE) in dB; +infinity for identical images.
double psnr(const GrayImage& a, const GrayImage& b);

struct BppReport {
    double raw_bpp = 0.0;    // sum of log2(k_i) / b^2 over emitted layers
    double coded_bpp = 0.0;  // 8 * payload bytes / (width * height), header excluded
};

/// Rates for one stream against the stack it was encoded with. Padding
/// pixels are excluded: the denominator is the original width * height.
BppReport bpp(const Bitstream& bs, const LayerStack& stack);

}  // namespace mlrq
