#include "mlrq/model_io.hpp"

#include <cmath>
#include <stdexcept>

#include "byteio.hpp"
#include "mlrq/common.hpp"

namespace mlrq {

namespace {

constexpr char kMagic[8] = {'M', 'L', 'R', 'Q', 'M', 'D', 'L', '1'};

// Keeps a hostile header from asking for an absurd allocation before the
// payload length check would catch it.
constexpr std::uint64_t kMaxModelEntries = 1ull << 28;

}  // namespace

void Model::validate() const {
    stack.validate();
    if (tables.size() != stack.depth()) {
        throw std::invalid_argument("Model: one frequency table per layer required");
    }
    for (std::size_t li = 0; li < tables.size(); ++li) {
        tables[li].validate();
        if (tables[li].symbol_count() != stack.layers[li].k) {
            throw std::invalid_argument("Model: table size disagrees with its codebook");
        }
    }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::uint8_t b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::vector<std::uint8_t> serialize_model(const Model& model) {
    model.validate();
    const std::size_t n = model.stack.dim();
    if (n > 0xFFFFFFFFull) throw std::invalid_argument("model: dimension too large");
    if (model.stack.depth() > 0xFFFF) throw std::invalid_argument("model: too many layers");

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + sizeof kMagic);
    detail::put_u32(out, static_cast<std::uint32_t>(n));
    detail::put_u16(out, static_cast<std::uint16_t>(model.stack.depth()));
    for (std::size_t li = 0; li < model.stack.depth(); ++li) {
        const Codebook& cb = model.stack.layers[li];
        if (cb.k > 0xFFFFFFFFull) throw std::invalid_argument("model: codebook too large");
        detail::put_u32(out, static_cast<std::uint32_t>(cb.k));
        for (double w : cb.words) detail::put_f64(out, w);
        const FreqTable& table = model.tables[li];
        detail::put_u32(out, static_cast<std::uint32_t>(table.symbol_count()));
        for (std::uint32_t c : table.counts) detail::put_u32(out, c);
    }
    return out;
}

Model parse_model(std::span<const std::uint8_t> bytes) {
    detail::ByteReader in(bytes);
    const auto magic = in.raw(sizeof kMagic);
    for (std::size_t i = 0; i < sizeof kMagic; ++i) {
        if (magic[i] != static_cast<std::uint8_t>(kMagic[i])) {
            throw decode_error("model: bad magic");
        }
    }
    const std::uint32_t n = in.u32();
    const std::uint16_t depth = in.u16();
    if (n == 0 || depth == 0) throw decode_error("model: degenerate header");

    Model model;
    model.stack.layers.reserve(depth);
    model.tables.reserve(depth);
    for (std::uint16_t li = 0; li < depth; ++li) {
        const std::uint32_t k = in.u32();
        if (k == 0 || static_cast<std::uint64_t>(k) * n > kMaxModelEntries) {
            throw decode_error("model: implausible codebook size");
        }
        std::vector<double> words(static_cast<std::size_t>(k) * n);
        for (double& w : words) {
            w = in.f64();
            if (!std::isfinite(w)) throw decode_error("model: non-finite codeword");
        }
        model.stack.layers.emplace_back(k, n, std::move(words));

        const std::uint32_t table_k = in.u32();
        if (table_k != k) throw decode_error("model: table size disagrees with its codebook");
        std::vector<std::uint32_t> counts(table_k);
        for (std::uint32_t& c : counts) c = in.u32();
        try {
            model.tables.push_back(FreqTable::from_counts(std::move(counts)));
        } catch (const std::invalid_argument& e) {
            throw decode_error(std::string("model: ") + e.what());
        }
    }
    if (!in.done()) throw decode_error("model: trailing bytes");
    return model;
}

std::uint64_t model_hash(const Model& model) { return fnv1a64(serialize_model(model)); }

void save_model(const std::filesystem::path& path, const Model& model) {
    const auto bytes = serialize_model(model);
    write_file_atomic(path, bytes.data(), bytes.size());
}

Model load_model(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_model(bytes);
}

}  // namespace mlrq
