#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlrq/codec.hpp"
#include "mlrq/common.hpp"
#include "mlrq/image.hpp"
#include "mlrq/model_io.hpp"
#include "testutil.hpp"

#ifndef MLRQ_TOOL_PATH
#error "build must define MLRQ_TOOL_PATH"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mlrq;

namespace {

int run_tool(const std::string& args, bool quiet = false) {
    std::string cmd = std::string(MLRQ_TOOL_PATH) + " " + args;
    if (quiet) cmd += " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
#ifdef _WIN32
    return status;
#else
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
}

std::string slurp(const fs::path& path) {
    const auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (const char c : text) lines += c == '\n';
    return lines;
}

void write_face_corpus(const fs::path& dir, std::size_t count, std::size_t side,
                       std::uint64_t seed) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < count; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "f%03zu.pgm", i);
        save_pgm(dir / name, testutil::synth_face(side, side, seed + i));
    }
}

}  // namespace

TEST_CASE("simulate writes the trace CSV and a manifest") {
    testutil::TempDir tmp("cli_sim");
    const fs::path out = tmp.path() / "rd.csv";
    const std::string args = "simulate --n 32 --layers 12 --k 64 --family gaussian --seed 7 "
                             "--samples 40 --out " + out.string();
    REQUIRE(run_tool(args) == 0);

    const std::string csv = slurp(out);
    CHECK(csv.rfind("layer,cum_rate_bits,distortion,shannon_bound\n", 0) == 0);
    CHECK(count_lines(csv) == 13);  // header plus one row per layer

    const json manifest = json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("seed") == 7);
    CHECK(manifest.at("config").at("n") == 32);
    CHECK(manifest.at("config").at("family") == "gaussian");
    CHECK(manifest.at("outputs") == json::array({out.string()}));
    CHECK(manifest.at("duration_seconds").get<double>() >= 0.0);
}

TEST_CASE("simulate accepts mixed layer sizes") {
    testutil::TempDir tmp("cli_sim_sizes");
    const fs::path out = tmp.path() / "rd.csv";
    REQUIRE(run_tool("simulate --n 16 --layer-sizes 8x2,4 --samples 20 --seed 1 --out " +
                     out.string()) == 0);
    CHECK(count_lines(slurp(out)) == 4);  // header + 3 layers

    // --k and --layer-sizes together is a contradiction.
    CHECK(run_tool("simulate --n 16 --layers 3 --k 8 --layer-sizes 8x3 --samples 20 --out " +
                       (tmp.path() / "no.csv").string(),
                   true) == 1);
}

TEST_CASE("sweep-variance writes one row per requested point") {
    testutil::TempDir tmp("cli_sweep");
    const fs::path out = tmp.path() / "sweep.csv";
    REQUIRE(run_tool("sweep-variance --n 40 --k 8 --samples 60 --points 9 --seed 5 --out " +
                     out.string()) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("variance,mean_distortion,residual_vs_estimate,residual_vs_source\n", 0) ==
          0);
    CHECK(count_lines(csv) == 10);
}

TEST_CASE("train produces a loadable model and a report") {
    testutil::TempDir tmp("cli_train");
    write_face_corpus(tmp.path() / "imgs", 3, 16, 900);
    const fs::path model_path = tmp.path() / "model.bin";
    REQUIRE(run_tool("train --images " + (tmp.path() / "imgs").string() +
                     " --layer-sizes 2x1 --block 8 --seed 4 --restarts 1 --out " +
                     model_path.string(), true) == 0);

    const Model model = load_model(model_path);
    CHECK(model.stack.depth() == 1);
    CHECK(model.stack.layers[0].k == 2);
    CHECK(model.stack.dim() == 64);
    CHECK(model.tables.size() == 1);

    const std::string report = slurp(model_path.string() + ".report.csv");
    CHECK(report.rfind("layer,k,train_mse,test_mse,ratio,flagged\n", 0) == 0);
    CHECK(count_lines(report) == 2);

    const json manifest = json::parse(slurp(model_path.string() + ".manifest.json"));
    CHECK(manifest.at("command") == "train");
    CHECK(manifest.at("inputs").size() == 3);
}

TEST_CASE("encode and decode round-trip matches direct library calls") {
    testutil::TempDir tmp("cli_codec");
    write_face_corpus(tmp.path() / "imgs", 4, 24, 300);
    const fs::path model_path = tmp.path() / "model.bin";
    REQUIRE(run_tool("train --images " + (tmp.path() / "imgs").string() +
                     " --layer-sizes 8x2,4x1 --block 8 --seed 9 --restarts 1 --out " +
                     model_path.string(), true) == 0);
    const Model model = load_model(model_path);

    const fs::path img_path = tmp.path() / "imgs" / "f001.pgm";
    const fs::path stream_path = tmp.path() / "f001.bits";
    REQUIRE(run_tool("encode --model " + model_path.string() + " --in " + img_path.string() +
                     " --out " + stream_path.string()) == 0);

    const GrayImage img = load_pgm(img_path);
    const auto expected_bytes = serialize_bitstream(encode_image(img, model));
    CHECK(read_file(stream_path) == expected_bytes);

    const fs::path dec_path = tmp.path() / "f001_dec.pgm";
    REQUIRE(run_tool("decode --model " + model_path.string() + " --in " + stream_path.string() +
                     " --out " + dec_path.string()) == 0);
    const GrayImage expected = decode_image(parse_bitstream(expected_bytes), model);
    const GrayImage decoded = load_pgm(dec_path);
    REQUIRE(decoded.width == expected.width);
    REQUIRE(decoded.height == expected.height);
    CHECK(decoded.pixels == expected.pixels);

    // A truncated encode carries only the requested prefix.
    const fs::path short_path = tmp.path() / "f001_short.bits";
    REQUIRE(run_tool("encode --model " + model_path.string() + " --in " + img_path.string() +
                     " --layers 2 --out " + short_path.string()) == 0);
    CHECK(parse_bitstream(read_file(short_path)).layer_count() == 2);
}

TEST_CASE("eval emits one row per image per prefix depth") {
    testutil::TempDir tmp("cli_eval");
    write_face_corpus(tmp.path() / "imgs", 3, 24, 70);
    const fs::path model_path = tmp.path() / "model.bin";
    REQUIRE(run_tool("train --images " + (tmp.path() / "imgs").string() +
                     " --layer-sizes 4x3 --block 8 --seed 2 --restarts 1 --out " +
                     model_path.string(), true) == 0);

    const fs::path out = tmp.path() / "eval.csv";
    REQUIRE(run_tool("eval --model " + model_path.string() + " --images " +
                     (tmp.path() / "imgs").string() + " --out " + out.string()) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("image,layers,raw_bpp,coded_bpp,psnr_db\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 3 * 3);
    CHECK(csv.find("f000.pgm,1,") != std::string::npos);
    CHECK(csv.find("f002.pgm,3,") != std::string::npos);
}

TEST_CASE("replay reproduces outputs byte for byte") {
    testutil::TempDir tmp("cli_replay");
    const fs::path out = tmp.path() / "rd.csv";
    REQUIRE(run_tool("simulate --n 24 --layers 6 --k 16 --seed 123 --samples 30 --out " +
                     out.string()) == 0);
    const auto first = read_file(out);
    fs::remove(out);
    REQUIRE(run_tool("replay --manifest " + out.string() + ".manifest.json") == 0);
    CHECK(read_file(out) == first);
}

TEST_CASE("exit codes distinguish validation from I/O failures") {
    testutil::TempDir tmp("cli_exit");
    const std::string dummy = (tmp.path() / "x").string();

    CHECK(run_tool("simulate --definitely-not-a-flag", true) == 1);
    CHECK(run_tool("simulate --n 16 --layers 2 --out " + dummy, true) == 1);  // missing --k
    CHECK(run_tool("train --images " + (tmp.path() / "absent").string() +
                       " --out " + dummy, true) == 2);
    CHECK(run_tool("decode --model " + (tmp.path() / "absent.bin").string() + " --in " + dummy +
                       " --out " + dummy + ".pgm", true) == 2);
    CHECK(run_tool("--help >/dev/null") == 0);

    // A stream whose model hash disagrees is a data error, not usage.
    write_face_corpus(tmp.path() / "imgs", 2, 16, 40);
    const fs::path m1 = tmp.path() / "m1.bin";
    const fs::path m2 = tmp.path() / "m2.bin";
    REQUIRE(run_tool("train --images " + (tmp.path() / "imgs").string() +
                     " --layer-sizes 2x1 --seed 1 --restarts 1 --out " + m1.string(), true) == 0);
    REQUIRE(run_tool("train --images " + (tmp.path() / "imgs").string() +
                     " --layer-sizes 2x1 --seed 2 --restarts 1 --out " + m2.string(), true) == 0);
    const fs::path bits = tmp.path() / "a.bits";
    REQUIRE(run_tool("encode --model " + m1.string() + " --in " +
                     (tmp.path() / "imgs" / "f000.pgm").string() + " --out " + bits.string()) ==
            0);
    CHECK(run_tool("decode --model " + m2.string() + " --in " + bits.string() + " --out " +
                       (tmp.path() / "bad.pgm").string(), true) == 2);
}
