#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mlrq {

/// 8-bit grayscale image, row-major.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
    bool operator==(const GrayImage&) const = default;
};

/// Reads a binary PGM (P5, maxval <= 255). Throws io_error on malformed
/// input or unsupported variants.
GrayImage load_pgm(const std::filesystem::path& path);
GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes);

/// Writes binary PGM with maxval 255, atomically (temp file + rename).
void save_pgm(const std::filesystem::path& path, const GrayImage& img);
std::vector<std::uint8_t> serialize_pgm(const GrayImage& img);

}  // namespace mlrq
