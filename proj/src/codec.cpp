#include "mlrq/codec.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "byteio.hpp"
#include "mlrq/common.hpp"
#include "mlrq/entropy.hpp"

namespace mlrq {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'R', 'Q'};
constexpr std::uint8_t kVersion = 1;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_image(const GrayImage& img) {
    require(img.width >= 1 && img.height >= 1, "image: degenerate dimensions");
    require(img.pixels.size() == img.width * img.height, "image: pixel count mismatch");
}

std::size_t block_side(const Model& model) {
    const std::size_t n = model.stack.dim();
    const auto b = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    require(b >= 1 && b * b == n, "model dimension is not a square block");
    return b;
}

std::uint8_t clamp_pixel(double v) {
    const double rounded = std::round(v);  // half away from zero
    if (rounded <= 0.0) return 0;
    if (rounded >= 255.0) return 255;
    return static_cast<std::uint8_t>(rounded);
}

}  // namespace

std::pair<std::vector<Vec>, BlockGrid> extract_blocks(const GrayImage& img, std::size_t b) {
    check_image(img);
    require(b >= 1, "block size must be >= 1");

    BlockGrid grid;
    grid.block = b;
    grid.width = img.width;
    grid.height = img.height;
    grid.cols = (img.width + b - 1) / b;
    grid.rows = (img.height + b - 1) / b;

    std::vector<Vec> blocks(grid.block_count(), Vec(b * b));
    for (std::size_t by = 0; by < grid.rows; ++by) {
        for (std::size_t bx = 0; bx < grid.cols; ++bx) {
            Vec& blk = blocks[by * grid.cols + bx];
            for (std::size_t y = 0; y < b; ++y) {
                // Edge replication: reads past the border clamp to the
                // last row/column.
                const std::size_t sy = std::min(by * b + y, img.height - 1);
                for (std::size_t x = 0; x < b; ++x) {
                    const std::size_t sx = std::min(bx * b + x, img.width - 1);
                    blk[y * b + x] = static_cast<double>(img.at(sx, sy));
                }
            }
        }
    }
    return {std::move(blocks), grid};
}

GrayImage assemble_blocks(const std::vector<Vec>& blocks, const BlockGrid& grid) {
    const std::size_t b = grid.block;
    require(b >= 1 && grid.width >= 1 && grid.height >= 1, "assemble: degenerate grid");
    require(grid.cols == (grid.width + b - 1) / b && grid.rows == (grid.height + b - 1) / b,
            "assemble: grid does not match image dimensions");
    require(blocks.size() == grid.block_count(), "assemble: wrong number of blocks");
    for (const Vec& blk : blocks) require(blk.size() == b * b, "assemble: wrong block length");

    GrayImage img;
    img.width = grid.width;
    img.height = grid.height;
    img.pixels.resize(grid.width * grid.height);
    for (std::size_t by = 0; by < grid.rows; ++by) {
        for (std::size_t bx = 0; bx < grid.cols; ++bx) {
            const Vec& blk = blocks[by * grid.cols + bx];
            const std::size_t ylim = std::min(b, grid.height - by * b);
            const std::size_t xlim = std::min(b, grid.width - bx * b);
            for (std::size_t y = 0; y < ylim; ++y) {
                for (std::size_t x = 0; x < xlim; ++x) {
                    img.pixels[(by * b + y) * grid.width + (bx * b + x)] =
                        clamp_pixel(blk[y * b + x]);
                }
            }
        }
    }
    return img;
}

std::vector<std::uint8_t> serialize_bitstream(const Bitstream& bs) {
    require(bs.width >= 1 && bs.height >= 1, "bitstream: degenerate dimensions");
    require(bs.block >= 1, "bitstream: degenerate block size");
    require(bs.payloads.size() <= 255, "bitstream: at most 255 layers");

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + sizeof kMagic);
    detail::put_u8(out, kVersion);
    detail::put_u32(out, bs.width);
    detail::put_u32(out, bs.height);
    detail::put_u8(out, bs.block);
    detail::put_u8(out, static_cast<std::uint8_t>(bs.payloads.size()));
    detail::put_u64(out, bs.model_hash);
    for (const auto& payload : bs.payloads) {
        require(payload.size() <= 0xFFFFFFFFull, "bitstream: payload too large");
        detail::put_u32(out, static_cast<std::uint32_t>(payload.size()));
        out.insert(out.end(), payload.begin(), payload.end());
    }
    return out;
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes);
    const auto magic = in.raw(sizeof kMagic);
    for (std::size_t i = 0; i < sizeof kMagic; ++i) {
        if (magic[i] != static_cast<std::uint8_t>(kMagic[i])) {
            throw decode_error("bitstream: bad magic");
        }
    }
    if (in.u8() != kVersion) throw decode_error("bitstream: unsupported version");

    Bitstream bs;
    bs.width = in.u32();
    bs.height = in.u32();
    bs.block = in.u8();
    const std::uint8_t layer_count = in.u8();
    bs.model_hash = in.u64();
    if (bs.width == 0 || bs.height == 0 || bs.block == 0) {
        throw decode_error("bitstream: degenerate header");
    }
    bs.payloads.reserve(layer_count);
    for (std::uint8_t li = 0; li < layer_count; ++li) {
        const std::uint32_t len = in.u32();
        const auto view = in.raw(len);
        bs.payloads.emplace_back(view.begin(), view.end());
    }
    if (!in.done()) throw decode_error("bitstream: trailing bytes");
    return bs;
}

Bitstream encode_image(const GrayImage& img, const Model& model, std::size_t layers_to_emit) {
    model.validate();
    const std::size_t b = block_side(model);
    const std::size_t layers = std::min(layers_to_emit, model.stack.depth());
    require(layers <= 255, "bitstream: at most 255 layers");

    auto [blocks, grid] = extract_blocks(img, b);
    const std::size_t count = blocks.size();

    // indices[layer][block], filled blockwise in parallel.
    std::vector<std::vector<std::uint32_t>> planes(layers,
                                                   std::vector<std::uint32_t>(count));
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const QuantizationResult q = encode_multistage(model.stack, blocks[i], layers);
            for (std::size_t li = 0; li < layers; ++li) planes[li][i] = q.indices[li];
        }
    });

    Bitstream bs;
    bs.width = static_cast<std::uint32_t>(img.width);
    bs.height = static_cast<std::uint32_t>(img.height);
    bs.block = static_cast<std::uint8_t>(b);
    bs.model_hash = model_hash(model);
    bs.payloads.resize(layers);
    parallel_for(layers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t li = begin; li < end; ++li) {
            bs.payloads[li] = ac_encode(planes[li], model.tables[li]);
        }
    });
    return bs;
}

GrayImage decode_image(const Bitstream& bs, const Model& model, std::size_t layers_to_use) {
    model.validate();
    const std::size_t b = block_side(model);
    if (bs.model_hash != model_hash(model)) {
        throw decode_error("bitstream: model hash mismatch");
    }
    if (bs.block != b) throw decode_error("bitstream: block size disagrees with model");
    if (bs.layer_count() > model.stack.depth()) {
        throw decode_error("bitstream: more layers than the model has");
    }
    const std::size_t layers = std::min(layers_to_use, bs.layer_count());

    BlockGrid grid;
    grid.block = b;
    grid.width = bs.width;
    grid.height = bs.height;
    grid.cols = (grid.width + b - 1) / b;
    grid.rows = (grid.height + b - 1) / b;
    const std::size_t count = grid.block_count();

    std::vector<std::vector<std::uint32_t>> planes(layers);
    parallel_for(layers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t li = begin; li < end; ++li) {
            planes[li] = ac_decode(bs.payloads[li], model.tables[li], count);
        }
    });

    std::vector<Vec> blocks(count);
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> indices(layers);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t li = 0; li < layers; ++li) indices[li] = planes[li][i];
            blocks[i] = decode_multistage(model.stack, indices);
        }
    });
    return assemble_blocks(blocks, grid);
}

double psnr(const GrayImage& a, const GrayImage& b) {
    check_image(a);
    check_image(b);
    require(a.width == b.width && a.height == b.height, "psnr: dimension mismatch");
    double sse = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mean = sse / static_cast<double>(a.pixels.size());
    return 10.0 * std::log10(255.0 * 255.0 / mean);
}

BppReport bpp(const Bitstream& bs, const LayerStack& stack) {
    require(bs.width >= 1 && bs.height >= 1, "bpp: degenerate dimensions");
    require(bs.layer_count() <= stack.depth(), "bpp: more payloads than layers");
    const double dim = static_cast<double>(bs.block) * static_cast<double>(bs.block);

    BppReport report;
    std::size_t payload_bytes = 0;
    for (std::size_t li = 0; li < bs.layer_count(); ++li) {
        report.raw_bpp += std::log2(static_cast<double>(stack.layers[li].k)) / dim;
        payload_bytes += bs.payloads[li].size();
    }
    report.coded_bpp = 8.0 * static_cast<double>(payload_bytes) /
                       (static_cast<double>(bs.width) * static_cast<double>(bs.height));
    return report;
}

}  // namespace mlrq
