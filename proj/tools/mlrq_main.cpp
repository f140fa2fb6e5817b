// Command-line front end: wires the library modules into the simulate,
// sweep-variance, train, encode, decode, and eval workflows, plus replay
// of a previously written run manifest. Data goes to files; diagnostics go
// to stderr. Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlrq/codec.hpp"
#include "mlrq/common.hpp"
#include "mlrq/core.hpp"
#include "mlrq/entropy.hpp"
#include "mlrq/image.hpp"
#include "mlrq/model_io.hpp"
#include "mlrq/rng.hpp"
#include "mlrq/synth.hpp"
#include "mlrq/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mlrq;

namespace {

constexpr const char* kToolVersion = "mlrq 1.0.0";

// ---------------------------------------------------------------------
// Shared plumbing

class Stopwatch {
public:
    double seconds() const {
        const auto now = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(now - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_text_atomic(const fs::path& path, const std::string& text) {
    write_file_atomic(path, reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

void write_manifest(const fs::path& primary_output, const std::string& command,
                    std::uint64_t seed, const json& config, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs, double duration_seconds) {
    json manifest;
    manifest["command"] = command;
    manifest["tool_version"] = kToolVersion;
    manifest["seed"] = seed;
    manifest["config"] = config;
    json in = json::array(), out = json::array();
    for (const auto& p : inputs) in.push_back(p.string());
    for (const auto& p : outputs) out.push_back(p.string());
    manifest["inputs"] = in;
    manifest["outputs"] = out;
    manifest["duration_seconds"] = duration_seconds;
    write_text_atomic(primary_output.string() + ".manifest.json", manifest.dump(2) + "\n");
}

std::vector<std::size_t> parse_layer_sizes(const std::string& text) {
    std::vector<std::size_t> sizes;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string group = text.substr(pos, comma - pos);
        const std::size_t x = group.find('x');
        const std::string size_part = group.substr(0, x);
        const std::string count_part = x == std::string::npos ? "1" : group.substr(x + 1);
        try {
            const unsigned long long k = std::stoull(size_part);
            const unsigned long long reps = std::stoull(count_part);
            if (k == 0 || reps == 0 || reps > 1000) throw std::invalid_argument("range");
            for (unsigned long long r = 0; r < reps; ++r) sizes.push_back(k);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad layer sizes '" + text +
                                        "': expected e.g. 256x5,128x5,32x5,16x5");
        }
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    if (sizes.empty()) throw std::invalid_argument("layer sizes must be non-empty");
    return sizes;
}

std::vector<fs::path> list_pgms(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw io_error("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw io_error("no .pgm files in " + dir.string());
    return files;
}

// Fisher-Yates with explicitly constructed uniform picks, so the order
// depends only on the seed, not on a library's distribution internals.
void deterministic_shuffle(std::vector<std::size_t>& order, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        std::size_t j = static_cast<std::size_t>(u * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(order[i - 1], order[j]);
    }
}

OverfitPolicy parse_policy(const std::string& name) {
    if (name == "report") return OverfitPolicy::report;
    if (name == "strict") return OverfitPolicy::strict;
    if (name == "shrink") return OverfitPolicy::shrink;
    throw std::invalid_argument("unknown policy: " + name);
}

CodebookFamily parse_family(const std::string& name) {
    if (name == "gaussian") return CodebookFamily::gaussian;
    if (name == "binary") return CodebookFamily::binary;
    throw std::invalid_argument("unknown family: " + name);
}

ScheduleMode parse_schedule(const std::string& name) {
    if (name == "residual-energy") return ScheduleMode::residual_energy;
    if (name == "eq7-literal") return ScheduleMode::eq7_literal;
    throw std::invalid_argument("unknown schedule: " + name);
}

// ---------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::size_t n = 512;
    std::size_t layers = 0;       // 0: take the length of layer_sizes
    std::size_t k = 0;            // uniform size; exclusive with layer_sizes
    std::string layer_sizes;      // e.g. 256x5,128x5
    std::string family = "gaussian";
    std::string schedule = "residual-energy";
    double sigma2 = 1.0;
    std::size_t samples = 500;
    std::uint64_t seed = 0;
    std::string out;

    json config() const {
        return {{"n", n},       {"layers", layers},   {"k", k},
                {"layer_sizes", layer_sizes},         {"family", family},
                {"schedule", schedule},               {"sigma2", sigma2},
                {"samples", samples},                 {"out", out}};
    }
    static SimulateArgs from_config(const json& j) {
        SimulateArgs a;
        a.n = j.at("n");
        a.layers = j.at("layers");
        a.k = j.at("k");
        a.layer_sizes = j.at("layer_sizes");
        a.family = j.at("family");
        a.schedule = j.at("schedule");
        a.sigma2 = j.at("sigma2");
        a.samples = j.at("samples");
        a.out = j.at("out");
        return a;
    }
};

void run_simulate(const SimulateArgs& args, std::uint64_t seed) {
    Stopwatch timer;
    std::vector<std::size_t> sizes;
    if (!args.layer_sizes.empty()) {
        if (args.k != 0) throw std::invalid_argument("--k and --layer-sizes are exclusive");
        sizes = parse_layer_sizes(args.layer_sizes);
        if (args.layers != 0 && args.layers != sizes.size()) {
            throw std::invalid_argument("--layers disagrees with --layer-sizes");
        }
    } else {
        if (args.k == 0) throw std::invalid_argument("one of --k or --layer-sizes is required");
        if (args.layers == 0) throw std::invalid_argument("--layers is required with --k");
        sizes.assign(args.layers, args.k);
    }
    if (args.n == 0) throw std::invalid_argument("--n must be positive");

    std::vector<double> rates;
    rates.reserve(sizes.size());
    for (const std::size_t k : sizes) {
        rates.push_back(std::log2(static_cast<double>(k)) / static_cast<double>(args.n));
    }

    SourceSpec src;
    src.n = args.n;
    src.sigma2 = args.sigma2;
    src.seed = seed;
    src.num_samples = args.samples;
    const RdTrace trace =
        simulate_multistage(src, rates, parse_family(args.family), parse_schedule(args.schedule));

    const fs::path out(args.out);
    write_text_atomic(out, rdtrace_csv(trace));
    write_manifest(out, "simulate", seed, args.config(), {}, {out}, timer.seconds());
}

// ---------------------------------------------------------------------
// sweep-variance

struct SweepArgs {
    std::size_t n = 200;
    std::size_t k = 8;
    double sigma2 = 1.0;
    std::size_t samples = 1000;
    std::size_t points = 25;
    double min_variance = 0.0;
    double max_variance = 0.0;  // 0: three times the law-of-cosines optimum
    std::uint64_t seed = 0;
    std::string out;

    json config() const {
        return {{"n", n},           {"k", k},
                {"sigma2", sigma2}, {"samples", samples},
                {"points", points}, {"min_variance", min_variance},
                {"max_variance", max_variance},       {"out", out}};
    }
    static SweepArgs from_config(const json& j) {
        SweepArgs a;
        a.n = j.at("n");
        a.k = j.at("k");
        a.sigma2 = j.at("sigma2");
        a.samples = j.at("samples");
        a.points = j.at("points");
        a.min_variance = j.at("min_variance");
        a.max_variance = j.at("max_variance");
        a.out = j.at("out");
        return a;
    }
};

void run_sweep(const SweepArgs& args, std::uint64_t seed) {
    Stopwatch timer;
    if (args.n == 0 || args.k == 0) throw std::invalid_argument("--n and --k must be positive");
    if (args.points < 2) throw std::invalid_argument("--points must be at least 2");

    double hi = args.max_variance;
    if (hi <= 0.0) {
        const double rate = std::log2(static_cast<double>(args.k)) / static_cast<double>(args.n);
        hi = 3.0 * args.sigma2 * (1.0 - std::exp2(-2.0 * rate));
    }
    if (hi <= args.min_variance) throw std::invalid_argument("empty variance range");

    std::vector<double> variances(args.points);
    for (std::size_t i = 0; i < args.points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(args.points - 1);
        variances[i] = args.min_variance + t * (hi - args.min_variance);
    }

    SourceSpec src;
    src.n = args.n;
    src.sigma2 = args.sigma2;
    src.seed = seed;
    src.num_samples = args.samples;
    const auto rows = sweep_codebook_variance(src, args.k, variances);

    const fs::path out(args.out);
    write_text_atomic(out, sweep_csv(rows));
    write_manifest(out, "sweep-variance", seed, args.config(), {}, {out}, timer.seconds());
}

// ---------------------------------------------------------------------
// train

struct TrainArgs {
    std::string images;
    std::string layer_sizes = "256x5,128x5,32x5,16x5";
    std::size_t block = 8;
    double margin = 0.10;
    std::string policy = "report";
    double split = 0.8;
    std::size_t max_iters = 100;
    double rel_tol = 1e-4;
    std::size_t restarts = 3;
    std::uint64_t seed = 0;
    std::string out;
    std::string report;  // empty: derived from out

    json config() const {
        return {{"images", images},   {"layer_sizes", layer_sizes},
                {"block", block},     {"margin", margin},
                {"policy", policy},   {"split", split},
                {"max_iters", max_iters},             {"rel_tol", rel_tol},
                {"restarts", restarts},               {"out", out},
                {"report", report}};
    }
    static TrainArgs from_config(const json& j) {
        TrainArgs a;
        a.images = j.at("images");
        a.layer_sizes = j.at("layer_sizes");
        a.block = j.at("block");
        a.margin = j.at("margin");
        a.policy = j.at("policy");
        a.split = j.at("split");
        a.max_iters = j.at("max_iters");
        a.rel_tol = j.at("rel_tol");
        a.restarts = j.at("restarts");
        a.out = j.at("out");
        a.report = j.at("report");
        return a;
    }
};

void run_train(const TrainArgs& args, std::uint64_t seed) {
    Stopwatch timer;
    if (args.block == 0) throw std::invalid_argument("--block must be positive");
    if (args.split <= 0.0 || args.split >= 1.0) {
        throw std::invalid_argument("--split must be inside (0, 1)");
    }
    const auto files = list_pgms(args.images);
    if (files.size() < 2) throw std::invalid_argument("need at least 2 images to split");

    std::vector<std::size_t> order(files.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    deterministic_shuffle(order, derive_seed(seed, seed_tag::split, 0));
    std::size_t train_count =
        static_cast<std::size_t>(args.split * static_cast<double>(files.size()) + 0.5);
    train_count = std::clamp<std::size_t>(train_count, 1, files.size() - 1);

    std::vector<Vec> train_blocks, test_blocks;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const GrayImage img = load_pgm(files[order[i]]);
        auto [blocks, grid] = extract_blocks(img, args.block);
        auto& dest = i < train_count ? train_blocks : test_blocks;
        for (auto& blk : blocks) dest.push_back(std::move(blk));
    }
    std::cerr << "train: " << train_count << " images (" << train_blocks.size() << " blocks), "
              << files.size() - train_count << " test images (" << test_blocks.size()
              << " blocks)\n";

    TrainConfig cfg;
    cfg.layer_sizes = parse_layer_sizes(args.layer_sizes);
    cfg.max_iters = args.max_iters;
    cfg.rel_tol = args.rel_tol;
    cfg.restarts = args.restarts;
    cfg.overfit_margin = args.margin;
    cfg.seed = seed;
    auto [stack, train_report] =
        train_multilayer(train_blocks, test_blocks, cfg, parse_policy(args.policy));

    std::vector<std::vector<std::uint32_t>> planes(stack.depth(),
                                                   std::vector<std::uint32_t>(train_blocks.size()));
    parallel_for(train_blocks.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto q = encode_multistage(stack, train_blocks[i]);
            for (std::size_t li = 0; li < stack.depth(); ++li) planes[li][i] = q.indices[li];
        }
    });
    std::vector<std::size_t> ks;
    for (const auto& layer : stack.layers) ks.push_back(layer.k);

    Model model;
    model.stack = std::move(stack);
    model.tables = train_tables(planes, ks);

    const fs::path out(args.out);
    const fs::path report_path =
        args.report.empty() ? fs::path(args.out + ".report.csv") : fs::path(args.report);
    save_model(out, model);
    write_text_atomic(report_path, report_csv(train_report));

    std::vector<fs::path> inputs(files.begin(), files.end());
    write_manifest(out, "train", seed, args.config(), inputs, {out, report_path},
                   timer.seconds());
}

// ---------------------------------------------------------------------
// encode / decode

struct EncodeArgs {
    std::string model;
    std::string in;
    std::size_t layers = 0;  // 0: all
    std::string out;

    json config() const {
        return {{"model", model}, {"in", in}, {"layers", layers}, {"out", out}};
    }
    static EncodeArgs from_config(const json& j) {
        EncodeArgs a;
        a.model = j.at("model");
        a.in = j.at("in");
        a.layers = j.at("layers");
        a.out = j.at("out");
        return a;
    }
};

void run_encode(const EncodeArgs& args, std::uint64_t seed) {
    Stopwatch timer;
    const Model model = load_model(args.model);
    const GrayImage img = load_pgm(args.in);
    const std::size_t layers = args.layers == 0 ? kAllLayers : args.layers;
    const Bitstream bs = encode_image(img, model, layers);
    const auto bytes = serialize_bitstream(bs);
    const fs::path out(args.out);
    write_file_atomic(out, bytes.data(), bytes.size());
    write_manifest(out, "encode", seed, args.config(), {args.model, args.in}, {out},
                   timer.seconds());
}

void run_decode(const EncodeArgs& args, std::uint64_t seed) {
    Stopwatch timer;
    const Model model = load_model(args.model);
    const Bitstream bs = parse_bitstream(read_file(args.in));
    const std::size_t layers = args.layers == 0 ? kAllLayers : args.layers;
    const GrayImage img = decode_image(bs, model, layers);
    const fs::path out(args.out);
    save_pgm(out, img);
    write_manifest(out, "decode", seed, args.config(), {args.model, args.in}, {out},
                   timer.seconds());
}

// ---------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string model;
    std::string images;
    std::size_t layers = 0;  // 0: model depth
    std::string out;

    json config() const {
        return {{"model", model}, {"images", images}, {"layers", layers}, {"out", out}};
    }
    static EvalArgs from_config(const json& j) {
        EvalArgs a;
        a.model = j.at("model");
        a.images = j.at("images");
        a.layers = j.at("layers");
        a.out = j.at("out");
        return a;
    }
};

void run_eval(const EvalArgs& args, std::uint64_t seed) {
    Stopwatch timer;
    const Model model = load_model(args.model);
    const auto files = list_pgms(args.images);
    const std::size_t max_layers =
        args.layers == 0 ? model.stack.depth() : std::min(args.layers, model.stack.depth());

    // One row per image per decoded prefix length. raw_bpp and coded_bpp
    // count index payloads only; the shared model is amortized and excluded.
    std::string csv = "image,layers,raw_bpp,coded_bpp,psnr_db\n";
    for (const auto& file : files) {
        const GrayImage img = load_pgm(file);
        const Bitstream bs = encode_image(img, model, max_layers);
        for (std::size_t j = 1; j <= bs.layer_count(); ++j) {
            Bitstream prefix = bs;
            prefix.payloads.resize(j);
            const GrayImage decoded = decode_image(prefix, model);
            const BppReport rates = bpp(prefix, model.stack);
            csv += file.filename().string();
            csv += ',';
            csv += std::to_string(j);
            csv += ',';
            csv += format_double(rates.raw_bpp);
            csv += ',';
            csv += format_double(rates.coded_bpp);
            csv += ',';
            csv += format_double(psnr(img, decoded));
            csv += '\n';
        }
    }

    const fs::path out(args.out);
    write_text_atomic(out, csv);
    std::vector<fs::path> inputs(files.begin(), files.end());
    inputs.insert(inputs.begin(), args.model);
    write_manifest(out, "eval", seed, args.config(), inputs, {out}, timer.seconds());
}

// ---------------------------------------------------------------------
// replay

void run_replay(const std::string& manifest_path) {
    const auto bytes = read_file(manifest_path);
    json manifest;
    try {
        manifest = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw io_error("bad manifest: " + std::string(e.what()));
    }
    const std::string command = manifest.at("command");
    const std::uint64_t seed = manifest.at("seed");
    const json& config = manifest.at("config");
    try {
        if (command == "simulate") {
            run_simulate(SimulateArgs::from_config(config), seed);
        } else if (command == "sweep-variance") {
            run_sweep(SweepArgs::from_config(config), seed);
        } else if (command == "train") {
            run_train(TrainArgs::from_config(config), seed);
        } else if (command == "encode") {
            run_encode(EncodeArgs::from_config(config), seed);
        } else if (command == "decode") {
            run_decode(EncodeArgs::from_config(config), seed);
        } else if (command == "eval") {
            run_eval(EvalArgs::from_config(config), seed);
        } else {
            throw std::invalid_argument("manifest names unknown command: " + command);
        }
    } catch (const json::exception& e) {
        throw io_error("bad manifest: " + std::string(e.what()));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-layer residual vector quantization toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    std::uint64_t sim_seed = 0;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Monte Carlo rate-distortion trace for an i.i.d. Gaussian source");
    sim_cmd->add_option("--n", sim.n, "Source dimension")->capture_default_str();
    sim_cmd->add_option("--layers", sim.layers, "Number of layers (with --k)");
    sim_cmd->add_option("--k", sim.k, "Codewords per layer, identical for all layers");
    sim_cmd->add_option("--layer-sizes", sim.layer_sizes,
                        "Per-layer sizes, e.g. 256x5,128x5,32x5,16x5");
    sim_cmd->add_option("--family", sim.family, "Codebook family: gaussian|binary")
        ->capture_default_str();
    sim_cmd->add_option("--schedule", sim.schedule,
                        "Variance schedule: residual-energy|eq7-literal")
        ->capture_default_str();
    sim_cmd->add_option("--sigma2", sim.sigma2, "Source variance")->capture_default_str();
    sim_cmd->add_option("--samples", sim.samples, "Monte Carlo sample count")
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
    sim_cmd->add_option("--out", sim.out, "Output CSV path")->required();

    SweepArgs sweep;
    std::uint64_t sweep_seed = 0;
    auto* sweep_cmd = app.add_subcommand(
        "sweep-variance", "Distortion and orthogonality versus codeword variance");
    sweep_cmd->add_option("--n", sweep.n, "Source dimension")->capture_default_str();
    sweep_cmd->add_option("--k", sweep.k, "Codebook size")->capture_default_str();
    sweep_cmd->add_option("--sigma2", sweep.sigma2, "Source variance")->capture_default_str();
    sweep_cmd->add_option("--samples", sweep.samples, "Monte Carlo sample count")
        ->capture_default_str();
    sweep_cmd->add_option("--points", sweep.points, "Number of variance points")
        ->capture_default_str();
    sweep_cmd->add_option("--min-variance", sweep.min_variance, "Sweep start")
        ->capture_default_str();
    sweep_cmd->add_option("--max-variance", sweep.max_variance,
                          "Sweep end (default: 3x the predicted optimum)");
    sweep_cmd->add_option("--seed", sweep_seed, "Master seed")->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out, "Output CSV path")->required();

    TrainArgs train;
    std::uint64_t train_seed = 0;
    auto* train_cmd =
        app.add_subcommand("train", "Learn per-layer codebooks and tables from a PGM corpus");
    train_cmd->add_option("--images", train.images, "Directory of .pgm images")->required();
    train_cmd->add_option("--layer-sizes", train.layer_sizes, "Per-layer codebook sizes")
        ->capture_default_str();
    train_cmd->add_option("--block", train.block, "Block side length")->capture_default_str();
    train_cmd->add_option("--margin", train.margin, "Overfit margin mu")->capture_default_str();
    train_cmd->add_option("--policy", train.policy, "Overfit policy: report|strict|shrink")
        ->capture_default_str();
    train_cmd->add_option("--split", train.split, "Training fraction of the corpus")
        ->capture_default_str();
    train_cmd->add_option("--max-iters", train.max_iters, "Lloyd iteration cap")
        ->capture_default_str();
    train_cmd->add_option("--rel-tol", train.rel_tol, "Relative convergence tolerance")
        ->capture_default_str();
    train_cmd->add_option("--restarts", train.restarts, "k-means restarts")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_seed, "Master seed")->capture_default_str();
    train_cmd->add_option("--out", train.out, "Output model path")->required();
    train_cmd->add_option("--report", train.report,
                          "Training report CSV (default: <out>.report.csv)");

    EncodeArgs encode;
    std::uint64_t encode_seed = 0;
    auto* encode_cmd = app.add_subcommand("encode", "Encode a PGM image to a bitstream");
    encode_cmd->add_option("--model", encode.model, "Trained model path")->required();
    encode_cmd->add_option("--in", encode.in, "Input .pgm image")->required();
    encode_cmd->add_option("--layers", encode.layers, "Layers to emit (default: all)");
    encode_cmd->add_option("--seed", encode_seed, "Recorded in the manifest only");
    encode_cmd->add_option("--out", encode.out, "Output bitstream path")->required();

    EncodeArgs decode;
    std::uint64_t decode_seed = 0;
    auto* decode_cmd = app.add_subcommand("decode", "Decode a bitstream to a PGM image");
    decode_cmd->add_option("--model", decode.model, "Trained model path")->required();
    decode_cmd->add_option("--in", decode.in, "Input bitstream")->required();
    decode_cmd->add_option("--layers", decode.layers, "Layers to use (default: all present)");
    decode_cmd->add_option("--seed", decode_seed, "Recorded in the manifest only");
    decode_cmd->add_option("--out", decode.out, "Output .pgm path")->required();

    EvalArgs eval;
    std::uint64_t eval_seed = 0;
    auto* eval_cmd = app.add_subcommand(
        "eval", "Per-image, per-prefix PSNR and BPP table over a PGM corpus");
    eval_cmd->add_option("--model", eval.model, "Trained model path")->required();
    eval_cmd->add_option("--images", eval.images, "Directory of .pgm images")->required();
    eval_cmd->add_option("--layers", eval.layers, "Deepest prefix to evaluate (default: all)");
    eval_cmd->add_option("--seed", eval_seed, "Recorded in the manifest only");
    eval_cmd->add_option("--out", eval.out, "Output CSV path")->required();

    std::string manifest_path;
    auto* replay_cmd =
        app.add_subcommand("replay", "Re-run a recorded manifest; outputs are reproduced");
    replay_cmd->add_option("--manifest", manifest_path, "Path to a .manifest.json file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // app.exit prints help to stdout (code 0) or the error to stderr;
        // collapse CLI11's per-error codes onto the documented 0/1 split.
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim_cmd->parsed()) {
            run_simulate(sim, sim_seed);
        } else if (sweep_cmd->parsed()) {
            run_sweep(sweep, sweep_seed);
        } else if (train_cmd->parsed()) {
            run_train(train, train_seed);
        } else if (encode_cmd->parsed()) {
            run_encode(encode, encode_seed);
        } else if (decode_cmd->parsed()) {
            run_decode(decode, decode_seed);
        } else if (eval_cmd->parsed()) {
            run_eval(eval, eval_seed);
        } else if (replay_cmd->parsed()) {
            run_replay(manifest_path);
        }
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const decode_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
