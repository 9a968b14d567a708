#include "doctest.h"

#include "mvst/error.hpp"
#include "mvst/ops.hpp"
#include "mvst/transformer.hpp"
#include "support.hpp"

#include <cmath>

using namespace mvst;
using testing::grad_check;
using testing::probe;
using testing::random_constant;
using testing::random_leaf;
using testing::random_values;

namespace {

void fill(Tensor t, double value)
{
    for (auto& x : t.mutable_values()) {
        x = value;
    }
}

void set_identity(Tensor w)
{
    auto v = w.mutable_values();
    const std::size_t n = w.dim(0), cols = w.dim(1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            v[i * cols + j] = (i == j) ? 1.0 : 0.0;
        }
    }
}

std::vector<Tensor> all_leaves(const ParameterStore& store)
{
    std::vector<Tensor> out;
    for (const auto& p : store.parameters()) {
        out.push_back(p.tensor);
    }
    return out;
}

RgbClip uniform_clip(std::size_t frames, std::size_t h, std::size_t w, std::uint8_t value)
{
    RgbClip c;
    c.frames = RgbSequence(frames, h, w);
    std::fill(c.frames.pixels.begin(), c.frames.pixels.end(), value);
    return c;
}

} // namespace

TEST_CASE("positional encoding table")
{
    const PositionalEncoding pe(64, 16);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(pe.entry(0, i) == (i % 2 == 0 ? 0.0 : 1.0));
    }
    CHECK(pe.entry(3, 4) == doctest::Approx(std::sin(3.0 / std::pow(10000.0, 4.0 / 16.0))).epsilon(1e-15));
    CHECK(pe.entry(3, 5) == doctest::Approx(std::cos(3.0 / std::pow(10000.0, 4.0 / 16.0))).epsilon(1e-15));
    for (std::size_t p = 0; p < 64; ++p) {
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(std::abs(pe.entry(p, i)) <= 1.0);
        }
    }
    const auto rows = positional_encoding(5, 16);
    CHECK(rows.shape() == Shape{5, 16});
    CHECK(rows.values()[3 * 16 + 4] == pe.entry(3, 4));
    const auto tiled = pe.tiled(5, 3);
    CHECK(tiled.shape() == Shape{15, 16});
    CHECK(tiled.values()[(2 * 5 + 3) * 16 + 7] == pe.entry(3, 7));
    CHECK_THROWS_AS(pe.rows(65), DimensionError);
    CHECK_THROWS_AS(PositionalEncoding(10, 7), ConfigError);
}

TEST_CASE("positional encoding rows are distinct")
{
    const PositionalEncoding pe(2000, 32);
    double closest = 1e9;
    for (std::size_t a = 0; a < 2000; ++a) {
        for (std::size_t b = a + 1; b < std::min<std::size_t>(2000, a + 400); ++b) {
            double d = 0;
            for (std::size_t i = 0; i < 32; ++i) {
                d += std::abs(pe.entry(a, i) - pe.entry(b, i));
            }
            closest = std::min(closest, d);
        }
    }
    CHECK(closest > 1e-6);
}

TEST_CASE("single position attention with identity projections returns the value")
{
    ParameterStore store;
    Rng rng(1);
    auto p = make_mha_params(store, "mha", 4, 1, rng);
    for (auto w : {p.wq, p.wk, p.wv, p.wo}) {
        set_identity(w);
    }
    for (auto b : {p.bq, p.bk, p.bv, p.bo}) {
        fill(b, 0.0);
    }
    const auto x = Tensor::constant({1, 4}, {0.3, -1.0, 2.0, 0.5});
    const auto y = mha_forward(x, p, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(y.values()[i] == doctest::Approx(x.values()[i]).epsilon(1e-15));
    }
}

TEST_CASE("attention rows are probability distributions")
{
    ParameterStore store;
    Rng rng(2);
    auto p = make_mha_params(store, "mha", 8, 2, rng);
    const auto x = random_constant({3 * 5, 8}, rng, 2.0);
    AttentionTrace trace;
    mha_forward(x, p, 5, &trace);
    CHECK(trace.groups == 3);
    CHECK(trace.heads == 2);
    CHECK(trace.length == 5);
    for (std::size_t g = 0; g < 3; ++g) {
        for (std::size_t h = 0; h < 2; ++h) {
            for (std::size_t q = 0; q < 5; ++q) {
                double row = 0;
                for (std::size_t k = 0; k < 5; ++k) {
                    CHECK(trace.at(g, h, q, k) >= 0.0);
                    row += trace.at(g, h, q, k);
                }
                CHECK(std::abs(row - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("attention matches a naive per-head loop")
{
    Rng rng(3);
    const std::size_t len = 4, heads = 2, dim = 6, dh = 3;
    const auto q = random_constant({len, dim}, rng);
    const auto k = random_constant({len, dim}, rng);
    const auto v = random_constant({len, dim}, rng);
    const auto out = scaled_dot_attention(q, k, v, len, heads);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < len; ++i) {
            std::vector<double> s(len);
            double mx = -1e300;
            for (std::size_t j = 0; j < len; ++j) {
                double dot = 0;
                for (std::size_t c = 0; c < dh; ++c) {
                    dot += q.values()[i * dim + h * dh + c] * k.values()[j * dim + h * dh + c];
                }
                s[j] = dot / std::sqrt(static_cast<double>(dh));
                mx = std::max(mx, s[j]);
            }
            double z = 0;
            for (auto& x : s) {
                x = std::exp(x - mx);
                z += x;
            }
            for (std::size_t c = 0; c < dh; ++c) {
                double acc = 0;
                for (std::size_t j = 0; j < len; ++j) {
                    acc += s[j] / z * v.values()[j * dim + h * dh + c];
                }
                CHECK(out.values()[i * dim + h * dh + c] == doctest::Approx(acc).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("attention without positional encoding is permutation-equivariant")
{
    ParameterStore store;
    Rng rng(4);
    auto p = make_mha_params(store, "mha", 8, 4, rng);
    const std::size_t len = 6;
    const auto xv = random_values(len * 8, rng);
    const std::size_t perm[len] = {3, 5, 0, 1, 4, 2};
    std::vector<double> pv(xv.size());
    for (std::size_t i = 0; i < len; ++i) {
        std::copy_n(xv.begin() + static_cast<long>(perm[i] * 8), 8, pv.begin() + static_cast<long>(i * 8));
    }
    const auto y = mha_forward(Tensor::constant({len, 8}, xv), p, len);
    const auto yp = mha_forward(Tensor::constant({len, 8}, pv), p, len);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t c = 0; c < 8; ++c) {
            CHECK(std::abs(yp.values()[i * 8 + c] - y.values()[perm[i] * 8 + c]) < 1e-9);
        }
    }
}

TEST_CASE("groups attend only within themselves")
{
    ParameterStore store;
    Rng rng(5);
    auto p = make_mha_params(store, "mha", 4, 2, rng);
    auto xv = random_values(2 * 3 * 4, rng);
    const auto a = mha_forward(Tensor::constant({6, 4}, xv), p, 3);
    xv[4 * 4 + 1] += 1.0; // second group only
    const auto b = mha_forward(Tensor::constant({6, 4}, xv), p, 3);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(a.values()[i] == b.values()[i]);
    }
    CHECK(a.values()[16] != b.values()[16]);
    CHECK_THROWS_AS(mha_forward(Tensor::constant({6, 4}, xv), p, 4), DimensionError);
    CHECK_THROWS_AS(make_mha_params(store, "bad", 6, 4, rng), ConfigError);
}

TEST_CASE("zeroed output projections make the encoder layer the identity")
{
    ParameterStore store;
    Rng rng(6);
    auto layer = make_encoder_layer(store, "enc", 8, 2, 16, rng);
    for (auto t : {layer.attention.wo, layer.attention.bo, layer.ff2_weight, layer.ff2_bias}) {
        fill(t, 0.0);
    }
    const auto x = random_constant({5, 8}, rng);
    auto dropout = DropoutContext::evaluation();
    const auto y = encoder_layer_forward(x, layer, 5, dropout);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(y.values()[i] == x.values()[i]);
    }
}

TEST_CASE("encoder preserves the number of positions")
{
    ParameterStore store;
    Rng rng(7);
    EncoderConfig config{2, 16, 4, 32, 64};
    SequenceEncoder encoder(config, store, rng);
    auto dropout = DropoutContext::evaluation();
    for (std::size_t u : {1u, 3u, 17u}) {
        const auto z = encoder.forward(random_constant({u, 16}, rng), dropout);
        CHECK(z.shape() == Shape{u, 16});
    }
    CHECK_THROWS_AS(encoder.forward(Tensor::zeros({0, 16}), dropout), DimensionError);
    CHECK_THROWS_AS(encoder.forward(Tensor::zeros({65, 16}), dropout), DimensionError);
    CHECK_THROWS_AS(encoder.forward(Tensor::zeros({3, 8}), dropout), DimensionError);
}

TEST_CASE("positional encoding separates identical clips")
{
    ParameterStore store;
    Rng rng(8);
    SequenceEncoder encoder({2, 16, 4, 32, 64}, store, rng);
    const auto row = random_values(16, rng);
    std::vector<double> xv;
    for (int i = 0; i < 3; ++i) {
        xv.insert(xv.end(), row.begin(), row.end());
    }
    auto dropout = DropoutContext::evaluation();
    const auto z = encoder.forward(Tensor::constant({3, 16}, xv), dropout);
    double gap = 0;
    for (std::size_t c = 0; c < 16; ++c) {
        gap += std::abs(z.values()[c] - z.values()[32 + c]);
    }
    CHECK(gap > 1e-3);

    // Without the table the stack alone cannot tell them apart.
    const auto raw = cslen_forward(Tensor::constant({3, 16}, xv), encoder.layers(), dropout);
    for (std::size_t c = 0; c < 16; ++c) {
        CHECK(raw.values()[c] == doctest::Approx(raw.values()[32 + c]).epsilon(1e-12));
    }
}

TEST_CASE("evaluation is deterministic and training dropout is seeded")
{
    ParameterStore store;
    Rng rng(9);
    SequenceEncoder encoder({2, 16, 4, 32, 64}, store, rng);
    const auto x = random_constant({4, 16}, rng);
    auto eval = DropoutContext::evaluation();
    const auto a = encoder.forward(x, eval);
    const auto b = encoder.forward(x, eval);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));

    Rng r1(50), r2(50);
    DropoutContext t1{0.3, true, &r1}, t2{0.3, true, &r2};
    const auto c = encoder.forward(x, t1);
    const auto d = encoder.forward(x, t2);
    CHECK(std::equal(c.values().begin(), c.values().end(), d.values().begin()));
    CHECK(!std::equal(c.values().begin(), c.values().end(), a.values().begin()));

    DropoutContext no_rng{0.3, true, nullptr};
    CHECK_THROWS_AS(encoder.forward(x, no_rng), ConfigError);
}

TEST_CASE("finite-difference gradients: attention, feed-forward, layer norm, two layers")
{
    Rng rng(10);
    SUBCASE("scaled dot attention")
    {
        const auto q = random_leaf({6, 4}, rng);
        const auto k = random_leaf({6, 4}, rng);
        const auto v = random_leaf({6, 4}, rng);
        auto loss = [&] { return probe(scaled_dot_attention(q, k, v, 3, 2), 1); };
        const auto r = grad_check(loss, {q, k, v}, 30, 2);
        CHECK(r.max_rel_error < 1e-4);
    }
    SUBCASE("multi-head attention parameters")
    {
        ParameterStore store;
        auto p = make_mha_params(store, "mha", 8, 2, rng);
        const auto x = random_leaf({5, 8}, rng);
        auto leaves = all_leaves(store);
        leaves.push_back(x);
        auto loss = [&] { return probe(mha_forward(x, p, 5), 3); };
        CHECK(grad_check(loss, leaves, 40, 4).max_rel_error < 1e-4);
    }
    SUBCASE("feed-forward")
    {
        ParameterStore store;
        auto layer = make_encoder_layer(store, "enc", 6, 2, 12, rng);
        const auto x = random_leaf({4, 6}, rng);
        auto loss = [&] { return probe(feed_forward(x, layer), 5); };
        CHECK(grad_check(loss, {x, layer.ff1_weight, layer.ff1_bias, layer.ff2_weight, layer.ff2_bias}, 30, 6)
                  .max_rel_error
              < 1e-4);
    }
    SUBCASE("two stacked encoder layers with positional encoding")
    {
        ParameterStore store;
        SequenceEncoder encoder({2, 8, 2, 16, 32}, store, rng);
        const auto x = random_leaf({5, 8}, rng);
        auto leaves = all_leaves(store);
        leaves.push_back(x);
        auto eval = DropoutContext::evaluation();
        auto loss = [&] { return probe(encoder.forward(x, eval), 7); };
        const auto r = grad_check(loss, leaves, 60, 8);
        CHECK(r.checked == 60);
        CHECK(r.max_rel_error < 1e-4);
    }
    SUBCASE("group token insertion and extraction")
    {
        const auto x = random_leaf({6, 3}, rng);
        const auto tok = random_leaf({3}, rng);
        auto loss = [&] {
            const auto y = insert_group_token(x, tok, 2);
            return add(probe(take_group_row(y, 3, 0), 9), probe(take_group_row(y, 3, 2), 10));
        };
        CHECK(grad_check(loss, {x, tok}, 20, 11).max_rel_error < 1e-6);
    }
}

TEST_CASE("group token helpers")
{
    const auto x = Tensor::constant({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
    const auto tok = Tensor::constant({2}, {-1, -2});
    const auto y = insert_group_token(x, tok, 2);
    CHECK(y.shape() == Shape{6, 2});
    const double expected[] = {-1, -2, 1, 2, 3, 4, -1, -2, 5, 6, 7, 8};
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(y.values()[i] == expected[i]);
    }
    const auto r = take_group_row(y, 3, 1);
    CHECK(r.shape() == Shape{2, 2});
    CHECK(r.values()[2] == 5);
    CHECK_THROWS_AS(insert_group_token(x, tok, 3), DimensionError);
}

TEST_CASE("patch tubes")
{
    RgbClip c;
    c.frames = RgbSequence(2, 4, 4);
    for (std::size_t i = 0; i < c.frames.pixels.size(); ++i) {
        c.frames.pixels[i] = static_cast<std::uint8_t>(i % 251);
    }
    const auto tubes = patch_tubes({c}, 2);
    CHECK(tubes.shape() == Shape{4, 2 * 2 * 3 * 2});
    // Patch 1 is the top-right 2x2 block; entry [frame 1][dy 1][dx 0][c 2].
    const std::size_t col = ((1 * 2 + 1) * 2 + 0) * 3 + 2;
    CHECK(tubes.values()[1 * 24 + col] == c.frames.value(1, 1, 2, 2));
    CHECK_THROWS_AS(patch_tubes({c}, 3), DimensionError);

    VitConfig config;
    config.height = 16;
    config.width = 24;
    config.patch = 8;
    CHECK(config.patch_count() == 6);
    config.width = 20;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("ViT clip extractor")
{
    VitConfig config;
    config.patch = 4;
    config.height = 4;
    config.width = 4;
    config.frames = 2;
    config.dim = 8;
    config.heads = 2;
    config.layers = 1;
    config.ff_dim = 16;
    ParameterStore store;
    Rng rng(12);
    VitExtractor vit(config, store, rng);
    auto eval = DropoutContext::evaluation();

    SUBCASE("one patch per clip")
    {
        CHECK(config.patch_count() == 1);
        const auto f = vit.extract({uniform_clip(2, 4, 4, 100), uniform_clip(2, 4, 4, 30)}, eval);
        CHECK(f.shape() == Shape{2, 8});
    }
    SUBCASE("gray and checkerboard clips differ")
    {
        auto gray = uniform_clip(2, 4, 4, 128);
        auto checker = uniform_clip(2, 4, 4, 0);
        for (std::size_t t = 0; t < 2; ++t) {
            for (std::size_t r = 0; r < 4; ++r) {
                for (std::size_t col = 0; col < 4; ++col) {
                    for (std::size_t ch = 0; ch < 3; ++ch) {
                        checker.frames.pixels[((t * 4 + r) * 4 + col) * 3 + ch] = ((r + col) % 2) ? 255 : 0;
                    }
                }
            }
        }
        const auto f = vit.extract({gray, checker}, eval);
        double gap = 0;
        for (std::size_t c = 0; c < 8; ++c) {
            gap += std::abs(f.values()[c] - f.values()[8 + c]);
        }
        CHECK(gap > 1e-3);
    }
    SUBCASE("clips are independent and gradients are correct")
    {
        const auto tubes = random_leaf({3, config.tube_width()}, rng);
        auto leaves = all_leaves(store);
        leaves.push_back(tubes);
        auto loss = [&] { return probe(vit.extract(tubes, eval), 13); };
        CHECK(grad_check(loss, leaves, 40, 14).max_rel_error < 1e-4);

        const auto base = vit.extract(tubes.detach(), eval);
        auto changed = tubes.detach();
        changed.mutable_values()[2 * config.tube_width()] += 1.0;
        const auto moved = vit.extract(changed, eval);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(base.values()[i] == moved.values()[i]);
        }
    }
}
