#include "mlrq/image.hpp"

#include <cctype>
#include <cstdio>
#include <string>

#include "mlrq/common.hpp"

namespace mlrq {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
std::size_t skip_separators(const std::vector<std::uint8_t>& bytes, std::size_t pos) {
    while (pos < bytes.size()) {
        const char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    return pos;
}

std::size_t parse_number(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                         const char* what) {
    pos = skip_separators(bytes, pos);
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
        throw io_error(std::string("pgm: expected ") + what);
    }
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
        value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
        if (value > 1u << 30) throw io_error(std::string("pgm: ") + what + " out of range");
        ++pos;
    }
    return value;
}

}  // namespace

GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw io_error("pgm: not a binary P5 file");
    }
    std::size_t pos = 2;
    const std::size_t width = parse_number(bytes, pos, "width");
    const std::size_t height = parse_number(bytes, pos, "height");
    const std::size_t maxval = parse_number(bytes, pos, "maxval");
    if (width < 1 || height < 1) throw io_error("pgm: degenerate dimensions");
    if (maxval < 1 || maxval > 255) throw io_error("pgm: only 8-bit maxval supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw io_error("pgm: missing separator before raster");
    }
    ++pos;  // exactly one whitespace byte separates header from raster
    const std::size_t need = width * height;
    if (bytes.size() - pos < need) throw io_error("pgm: truncated raster");

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return img;
}

GrayImage load_pgm(const std::filesystem::path& path) {
    return parse_pgm(read_file(path));
}

std::vector<std::uint8_t> serialize_pgm(const GrayImage& img) {
    if (img.width < 1 || img.height < 1 || img.pixels.size() != img.width * img.height) {
        throw std::invalid_argument("pgm: invalid image");
    }
    char header[64];
    const int len = std::snprintf(header, sizeof header, "P5\n%zu %zu\n255\n", img.width,
                                  img.height);
    std::vector<std::uint8_t> bytes(header, header + len);
    bytes.insert(bytes.end(), img.pixels.begin(), img.pixels.end());
    return bytes;
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
    const auto bytes = serialize_pgm(img);
    write_file_atomic(path, bytes.data(), bytes.size());
}

}  // namespace mlrq
