#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mlrq/core.hpp"
#include "testutil.hpp"

using mlrq::Codebook;
using mlrq::LayerStack;
using mlrq::Vec;

namespace {

// Independent exhaustive scan: plain one-candidate-at-a-time loop, used as
// the oracle for nearest_codeword and for replaying the greedy recursion.
std::pair<std::size_t, double> oracle_nearest(const Codebook& cb, const Vec& x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cb.k; ++i) {
        double sse = 0.0;
        for (std::size_t j = 0; j < cb.n; ++j) {
            const double d = x[j] - cb.words[i * cb.n + j];
            sse += d * d;
        }
        const double d = sse / static_cast<double>(cb.n);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return {best, best_d};
}

// Greedy multistage replay built only on oracle_nearest.
std::pair<Vec, std::vector<std::size_t>> oracle_greedy(const std::vector<Codebook>& layers,
                                                       const Vec& x) {
    Vec residual = x;
    Vec recon(x.size(), 0.0);
    std::vector<std::size_t> indices;
    for (const Codebook& cb : layers) {
        const auto [w, d] = oracle_nearest(cb, residual);
        (void)d;
        for (std::size_t j = 0; j < cb.n; ++j) {
            residual[j] -= cb.words[w * cb.n + j];
            recon[j] += cb.words[w * cb.n + j];
        }
        indices.push_back(w);
    }
    return {recon, indices};
}

Codebook two_word_book() {
    return Codebook(2, 2, {0.0, 0.0, 1.0, 1.0});
}

}  // namespace

TEST_CASE("mse basics") {
    CHECK(mlrq::mse({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(mlrq::mse({0.0, 0.0}, {2.0, 0.0}) == doctest::Approx(2.0));
    CHECK(mlrq::mse({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}) == doctest::Approx(1.0));
    CHECK(mlrq::mse({0.0, 0.0}, {2.0, 0.0}) == mlrq::mse({2.0, 0.0}, {0.0, 0.0}));
    CHECK_THROWS_AS(mlrq::mse({1.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(mlrq::mse({}, {}), std::invalid_argument);
}

TEST_CASE("nearest_codeword stated examples") {
    const Codebook cb = two_word_book();
    const auto r1 = mlrq::nearest_codeword(cb, {0.9, 1.2});
    CHECK(r1.index == 1);
    CHECK(r1.distortion == doctest::Approx(0.025));

    const auto r2 = mlrq::nearest_codeword(cb, {1.0, 1.0});
    CHECK(r2.index == 1);
    CHECK(r2.distortion == 0.0);

    // Equidistant: lowest index wins. Distance is (0.25 + 0.25) / 2.
    const auto r3 = mlrq::nearest_codeword(cb, {0.5, 0.5});
    CHECK(r3.index == 0);
    CHECK(r3.distortion == doctest::Approx(0.25));

    CHECK_THROWS_AS(mlrq::nearest_codeword(cb, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("nearest_codeword matches exhaustive oracle on 1000 random pairs") {
    std::mt19937_64 rng(20240817);
    std::uniform_int_distribution<std::size_t> kd(1, 64), nd(1, 16);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = kd(rng), n = nd(rng);
        const Codebook cb = testutil::random_codebook(rng, k, n);
        const Vec x = testutil::random_vec(rng, n);
        const auto got = mlrq::nearest_codeword(cb, x);
        const auto [oi, od] = oracle_nearest(cb, x);
        CHECK(got.index == oi);
        CHECK(got.distortion == od);  // same formula, same order: bit-identical
    }
}

TEST_CASE("codebook validation") {
    CHECK_THROWS_AS(Codebook(0, 2, {}), std::invalid_argument);
    CHECK_THROWS_AS(Codebook(1, 2, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Codebook(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()}),
                    std::invalid_argument);
    const Codebook cb(4, 2, std::vector<double>(8, 0.0));
    CHECK(cb.rate() == doctest::Approx(1.0));
}

TEST_CASE("encode_multistage degenerate depth equals plain quantization") {
    std::mt19937_64 rng(7);
    const Codebook cb = testutil::random_codebook(rng, 8, 3);
    LayerStack stack({cb});
    const Vec x = testutil::random_vec(rng, 3);
    const auto res = mlrq::encode_multistage(stack, x);
    const auto direct = mlrq::nearest_codeword(cb, x);
    REQUIRE(res.indices.size() == 1);
    CHECK(res.indices[0] == direct.index);
    CHECK(res.per_layer_distortion[0] == direct.distortion);
}

TEST_CASE("encode_multistage exact representation drives residual to zero") {
    // Layer codewords chosen so the greedy path picks word 1 then word 0;
    // x is exactly their sum.
    const Codebook l1(2, 2, {0.0, 0.0, 4.0, 4.0});
    const Codebook l2(2, 2, {0.25, -0.25, 10.0, 10.0});
    LayerStack stack({l1, l2});
    const Vec x = {4.25, 3.75};
    const auto res = mlrq::encode_multistage(stack, x);
    CHECK(res.indices == std::vector<std::uint32_t>{1, 0});
    CHECK(res.per_layer_distortion.back() == 0.0);
    CHECK(res.residual == Vec{0.0, 0.0});
    CHECK(res.reconstruction == x);
}

TEST_CASE("encode_multistage agrees with independent greedy oracle") {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Codebook> layers;
        for (int l = 0; l < 3; ++l) layers.push_back(testutil::random_codebook(rng, 4, 4));
        LayerStack stack(layers);
        const Vec x = testutil::random_vec(rng, 4, -2.0, 2.0);
        const auto res = mlrq::encode_multistage(stack, x);
        const auto [orecon, oidx] = oracle_greedy(layers, x);
        REQUIRE(res.indices.size() == oidx.size());
        for (std::size_t i = 0; i < oidx.size(); ++i) CHECK(res.indices[i] == oidx[i]);
        for (std::size_t j = 0; j < x.size(); ++j) CHECK(res.reconstruction[j] == orecon[j]);
    }
}

TEST_CASE("residual telescoping: reconstruction + residual reproduces input") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Codebook> layers;
        const std::size_t n = 1 + rng() % 12;
        const std::size_t depth = 1 + rng() % 5;
        for (std::size_t l = 0; l < depth; ++l) {
            layers.push_back(testutil::random_codebook(rng, 1 + rng() % 16, n, -3.0, 3.0));
        }
        LayerStack stack(layers);
        const Vec x = testutil::random_vec(rng, n, -5.0, 5.0);
        const auto res = mlrq::encode_multistage(stack, x);
        for (std::size_t j = 0; j < n; ++j) {
            const double back = res.reconstruction[j] + res.residual[j];
            const double scale = std::max(1.0, std::abs(x[j]));
            CHECK(std::abs(back - x[j]) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("per-layer distortion equals stage minimum; monotone with near-zero codeword") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Codebook> layers;
        const std::size_t n = 4;
        for (int l = 0; l < 4; ++l) {
            Codebook cb = testutil::random_codebook(rng, 8, n);
            // Plant a zero codeword so no stage can make things worse.
            for (std::size_t j = 0; j < n; ++j) cb.words[j] = 0.0;
            layers.push_back(cb);
        }
        LayerStack stack(layers);
        const Vec x = testutil::random_vec(rng, n, -2.0, 2.0);
        const auto res = mlrq::encode_multistage(stack, x);

        // Literal guarantee: reported distortion is the stage minimum.
        Vec residual = x;
        for (std::size_t i = 0; i < stack.depth(); ++i) {
            const auto [ow, od] = oracle_nearest(stack.layers[i], residual);
            CHECK(res.per_layer_distortion[i] == od);
            for (std::size_t j = 0; j < n; ++j) residual[j] -= stack.layers[i].words[ow * n + j];
        }
        // With a zero codeword available, distortion cannot increase.
        double prev = mlrq::mse(x, Vec(n, 0.0));
        for (double d : res.per_layer_distortion) {
            CHECK(d <= prev + 1e-12);
            prev = d;
        }
    }
}

TEST_CASE("decode_multistage consistency and prefix behavior") {
    std::mt19937_64 rng(555);
    std::vector<Codebook> layers;
    for (int l = 0; l < 4; ++l) layers.push_back(testutil::random_codebook(rng, 6, 5));
    LayerStack stack(layers);
    const Vec x = testutil::random_vec(rng, 5, -2.0, 2.0);
    const auto res = mlrq::encode_multistage(stack, x);

    SUBCASE("full index list reproduces the encoder reconstruction bit-exactly") {
        const Vec decoded = mlrq::decode_multistage(stack, res.indices);
        CHECK(decoded == res.reconstruction);
    }
    SUBCASE("empty index list decodes to zero") {
        const Vec decoded = mlrq::decode_multistage(stack, {});
        CHECK(decoded == Vec(5, 0.0));
    }
    SUBCASE("prefix decode equals decode on the truncated stack") {
        for (std::size_t j = 1; j <= 3; ++j) {
            std::span<const std::uint32_t> prefix(res.indices.data(), j);
            LayerStack truncated(
                std::vector<Codebook>(layers.begin(), layers.begin() + static_cast<long>(j)));
            CHECK(mlrq::decode_multistage(stack, prefix) ==
                  mlrq::decode_multistage(truncated, prefix));
        }
    }
    SUBCASE("out-of-range index rejected") {
        std::vector<std::uint32_t> bad = res.indices;
        bad[0] = 6;
        CHECK_THROWS_AS(mlrq::decode_multistage(stack, bad), std::invalid_argument);
    }
    SUBCASE("too many indices rejected") {
        std::vector<std::uint32_t> bad(5, 0);
        CHECK_THROWS_AS(mlrq::decode_multistage(stack, bad), std::invalid_argument);
    }
}

TEST_CASE("rate accounting stays in the log domain") {
    // 40 layers of k = 2^20 would overflow any integer alphabet count.
    std::vector<Codebook> layers;
    for (int i = 0; i < 40; ++i) {
        layers.push_back(Codebook(1 << 20, 1, std::vector<double>(1 << 20, 0.0)));
    }
    LayerStack stack(layers);
    CHECK(stack.log2_equivalent_alphabet() == doctest::Approx(800.0));
    CHECK(stack.total_rate() == doctest::Approx(800.0));

    std::mt19937_64 rng(8);
    std::vector<Codebook> mixed;
    std::vector<std::size_t> ks = {256, 128, 32, 16};
    for (std::size_t k : ks) mixed.push_back(testutil::random_codebook(rng, k, 64));
    LayerStack image_stack(mixed);
    double expect = 0.0;
    for (std::size_t k : ks) expect += std::log2(static_cast<double>(k)) / 64.0;
    CHECK(image_stack.total_rate() == doctest::Approx(expect).epsilon(1e-15));
    CHECK(image_stack.log2_equivalent_alphabet() ==
          doctest::Approx(64.0 * image_stack.total_rate()).epsilon(1e-12));
}

TEST_CASE("layer stacks reject inconsistent layers") {
    std::mt19937_64 rng(3);
    const Codebook a = testutil::random_codebook(rng, 4, 3);
    const Codebook b = testutil::random_codebook(rng, 4, 5);
    CHECK_THROWS_AS(LayerStack({a, b}), std::invalid_argument);
    CHECK_THROWS_AS(LayerStack(std::vector<Codebook>{}), std::invalid_argument);
}
