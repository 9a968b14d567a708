#include "doctest.h"

#include "mvst/am3d_gcn.hpp"
#include "mvst/error.hpp"
#include "mvst/ops.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <cmath>

using namespace mvst;
using testing::grad_check;
using testing::probe;
using testing::random_constant;
using testing::random_values;

namespace {

struct Fixture {
    ParameterStore store;
    Rng rng{3};
    Am3dGcn gcn;

    Fixture(const JointLayout& layout, Am3dGcnConfig config) : gcn(layout, std::move(config), store, rng) {}
};

Am3dGcnConfig small_config(std::size_t frames, std::size_t scales = 2)
{
    Am3dGcnConfig c;
    c.scales = scales;
    c.channels = {3, 4};
    c.frames = frames;
    return c;
}

void set_identity(Tensor w)
{
    auto v = w.mutable_values();
    const std::size_t cols = w.dim(1);
    for (std::size_t i = 0; i < w.dim(0); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            v[i * cols + j] = (i == j) ? 1.0 : 0.0;
        }
    }
}

void fill(Tensor t, double value)
{
    for (auto& x : t.mutable_values()) {
        x = value;
    }
}

} // namespace

TEST_CASE("single joint, single frame, identity weight is relu")
{
    Am3dGcnConfig c;
    c.scales = 1;
    c.channels = {2};
    c.frames = 1;
    Fixture f(make_layout(1, {}), c);
    set_identity(f.gcn.layer(0).weights[0]);
    const auto x = Tensor::constant({3, 2}, {1.5, -2.0, -0.5, 0.25, 0.0, 3.0});
    const auto y = f.gcn.gcn3d_forward(x, 0, 0, 1);
    const double expected[] = {1.5, 0.0, 0.0, 0.25, 0.0, 3.0};
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(y.values()[i] == expected[i]);
    }
}

TEST_CASE("connected pair averages its two joints")
{
    Am3dGcnConfig c;
    c.scales = 1;
    c.channels = {2};
    c.frames = 1;
    Fixture f(make_layout(2, {{0, 1}}), c);
    set_identity(f.gcn.layer(0).weights[0]);
    // Positive inputs keep relu inactive so the pre-activation is visible.
    const auto x = Tensor::constant({2, 2}, {1.0, 4.0, 3.0, 2.0});
    const auto y = f.gcn.gcn3d_forward(x, 0, 0, 1);
    CHECK(y.values()[0] == doctest::Approx(2.0));
    CHECK(y.values()[1] == doctest::Approx(3.0));
    CHECK(y.values()[2] == doctest::Approx(2.0));
    CHECK(y.values()[3] == doctest::Approx(3.0));
}

TEST_CASE("3-joint, 2-frame clips match the dense block oracle")
{
    const auto layout = make_layout(3, {{0, 1}, {1, 2}});
    for (std::size_t k = 1; k <= 3; ++k) {
        Fixture f(layout, small_config(2, 3));
        const auto dense = oracle::dense_block_normalized(layout, k, 2);
        Rng rng(40 + k);
        const auto xv = random_values(2 * 6 * 2, rng);
        const auto x = Tensor::constant({12, 2}, xv);
        const auto w = f.gcn.layer(0).weights[k - 1];
        const auto y = f.gcn.gcn3d_forward(x, 0, k - 1, 2);
        std::vector<double> wv(w.values().begin(), w.values().end());
        for (std::size_t clip = 0; clip < 2; ++clip) {
            std::vector<double> xc(xv.begin() + static_cast<long>(clip * 12), xv.begin() + static_cast<long>(clip * 12 + 12));
            const auto expected = oracle::dense_gcn(dense, xc, 2, wv, 3);
            for (std::size_t i = 0; i < expected.size(); ++i) {
                CHECK(std::abs(y.values()[clip * 18 + i] - expected[i]) < 1e-12);
            }
        }
    }
}

TEST_CASE("full layer stack matches a naive loop implementation")
{
    const auto layout = make_layout(3, {{0, 1}, {0, 2}});
    Fixture f(layout, small_config(2, 2));
    Rng rng(8);
    const auto xv = random_values(6 * 2, rng);

    // Naive: per layer, concat_k relu(A_k X W_k), then s + s*sigmoid(s w + b); then mean over rows.
    std::vector<double> h = xv;
    std::size_t width = 2;
    for (std::size_t l = 0; l < 2; ++l) {
        const auto& p = f.gcn.layer(l);
        const std::size_t per = p.weights[0].dim(1);
        std::vector<double> cat(6 * 2 * per, 0.0);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto a = oracle::dense_block_normalized(layout, k + 1, 2);
            std::vector<double> wv(p.weights[k].values().begin(), p.weights[k].values().end());
            const auto part = oracle::dense_gcn(a, h, width, wv, per);
            for (std::size_t r = 0; r < 6; ++r) {
                for (std::size_t c = 0; c < per; ++c) {
                    cat[r * 2 * per + k * per + c] = part[r * per + c];
                }
            }
        }
        for (std::size_t r = 0; r < 6; ++r) {
            double logit = p.stan_bias.values()[0];
            for (std::size_t c = 0; c < 2 * per; ++c) {
                logit += cat[r * 2 * per + c] * p.stan_weight.values()[c];
            }
            const double amp = 1.0 / (1.0 + std::exp(-logit));
            for (std::size_t c = 0; c < 2 * per; ++c) {
                cat[r * 2 * per + c] *= 1.0 + amp;
            }
        }
        h = cat;
        width = 2 * per;
    }
    const auto out = f.gcn.extract(Tensor::constant({6, 2}, xv), 2);
    REQUIRE(out.shape() == Shape{1, width});
    for (std::size_t c = 0; c < width; ++c) {
        double m = 0;
        for (std::size_t r = 0; r < 6; ++r) {
            m += h[r * width + c];
        }
        CHECK(std::abs(out.values()[c] - m / 6.0) < 1e-12);
    }
}

TEST_CASE("multi-scale concatenation")
{
    const auto layout = make_layout(4, {{0, 1}, {1, 2}, {2, 3}});
    Rng rng(2);
    const auto x = random_constant({2 * 4 * 2, 2}, rng);

    SUBCASE("K=1 equals the single-scale layer")
    {
        Fixture f(layout, small_config(2, 1));
        const auto a = f.gcn.ms3d_forward(x, 0, 2);
        const auto b = f.gcn.gcn3d_forward(x, 0, 0, 2);
        CHECK(a.shape() == b.shape());
        CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    }
    SUBCASE("use_multiscale off means one scale")
    {
        auto c = small_config(2, 3);
        c.use_multiscale = false;
        Fixture f(layout, c);
        CHECK(f.gcn.layer(0).weights.size() == 1);
        CHECK(f.gcn.config().output_width() == 4);
    }
    SUBCASE("K=2 doubles the width and zeroing W_2 zeroes the second half")
    {
        Fixture f(layout, small_config(2, 2));
        const auto y = f.gcn.ms3d_forward(x, 0, 2);
        CHECK(y.shape() == Shape{16, 6});
        fill(f.gcn.layer(0).weights[1], 0.0);
        const auto z = f.gcn.ms3d_forward(x, 0, 2);
        for (std::size_t r = 0; r < 16; ++r) {
            for (std::size_t c = 0; c < 6; ++c) {
                if (c >= 3) {
                    CHECK(z.values()[r * 6 + c] == 0.0);
                } else {
                    CHECK(z.values()[r * 6 + c] == y.values()[r * 6 + c]);
                }
            }
        }
    }
}

TEST_CASE("STAN residual bounds")
{
    Rng rng(4);
    const auto s = Tensor::constant({5, 3}, random_values(15, rng, 2.0));
    auto expect_ratio = [&](const Tensor& out, double ratio) {
        for (std::size_t i = 0; i < 15; ++i) {
            CHECK(out.values()[i] == ratio * s.values()[i]);
        }
    };
    expect_ratio(stan_apply(s, Tensor::filled({5, 1}, -1e4)), 1.0);
    expect_ratio(stan_apply(s, Tensor::filled({5, 1}, 1e4)), 2.0);

    const auto positive = Tensor::constant({5, 3}, [&] {
        auto v = random_values(15, rng);
        for (auto& x : v) {
            x = std::abs(x) + 0.1;
        }
        return v;
    }());
    const auto logits = Tensor::constant({5, 1}, random_values(5, rng, 6.0));
    const auto out = stan_apply(positive, logits);
    for (std::size_t i = 0; i < 15; ++i) {
        const double r = out.values()[i] / positive.values()[i];
        CHECK(r > 1.0);
        CHECK(r < 2.0);
    }

    SUBCASE("saturated layer parameters")
    {
        const auto layout = make_layout(3, {{0, 1}, {1, 2}});
        Fixture f(layout, small_config(2, 2));
        const auto cat = Tensor::constant({6, 6}, random_values(36, rng));
        fill(f.gcn.layer(0).stan_weight, 0.0);
        fill(f.gcn.layer(0).stan_bias, -1e4);
        auto lo = f.gcn.stan_forward(cat, 0);
        fill(f.gcn.layer(0).stan_bias, 1e4);
        auto hi = f.gcn.stan_forward(cat, 0);
        for (std::size_t i = 0; i < 36; ++i) {
            CHECK(lo.values()[i] == cat.values()[i]);
            CHECK(hi.values()[i] == 2.0 * cat.values()[i]);
        }
    }
    SUBCASE("disabled STAN is the identity")
    {
        auto c = small_config(2, 2);
        c.use_stan = false;
        Fixture f(make_layout(3, {{0, 1}}), c);
        const auto cat = Tensor::constant({6, 6}, random_values(36, rng));
        const auto y = f.gcn.stan_forward(cat, 0);
        CHECK(std::equal(y.values().begin(), y.values().end(), cat.values().begin()));
    }
    CHECK_THROWS_AS(stan_apply(s, Tensor::filled({4, 1}, 0.0)), DimensionError);
}

TEST_CASE("pooled clip features are invariant to frame order")
{
    Rng rng(13);
    const auto layout = oracle::random_connected_layout(6, 2, rng);
    Fixture f(layout, small_config(4, 3));
    const std::size_t v = 6, m = 4;
    const auto xv = random_values(m * v * 2, rng);
    const std::size_t perm[] = {2, 0, 3, 1};
    std::vector<double> pv(xv.size());
    for (std::size_t a = 0; a < m; ++a) {
        std::copy_n(xv.begin() + static_cast<long>(perm[a] * v * 2), v * 2, pv.begin() + static_cast<long>(a * v * 2));
    }
    const auto a = f.gcn.extract(Tensor::constant({m * v, 2}, xv), m);
    const auto b = f.gcn.extract(Tensor::constant({m * v, 2}, pv), m);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a.values()[i] - b.values()[i]) < 1e-9);
    }
}

TEST_CASE("2D mode treats every frame as its own graph")
{
    const auto layout = make_layout(3, {{0, 1}, {1, 2}});
    auto c2 = small_config(1, 2);
    c2.use_3d = false;
    Fixture two_d(layout, c2);
    Fixture one_frame(layout, small_config(1, 2));
    REQUIRE(two_d.store.scalar_count() == one_frame.store.scalar_count());
    for (std::size_t i = 0; i < two_d.store.parameters().size(); ++i) {
        auto dst = one_frame.store.parameters()[i].tensor.mutable_values();
        auto src = two_d.store.parameters()[i].tensor.values();
        std::copy(src.begin(), src.end(), dst.begin());
    }
    Rng rng(14);
    const auto x = Tensor::constant({3, 2}, random_values(6, rng));
    const auto a = two_d.gcn.extract(x, 1);
    const auto b = one_frame.gcn.extract(x, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-14));
    }
}

TEST_CASE("all-zero clips produce zero features")
{
    Fixture f(make_layout(3, {{0, 1}, {1, 2}}), small_config(2, 2));
    const auto y = f.gcn.extract(Tensor::zeros({12, 2}), 2);
    for (double v : y.values()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("shape errors")
{
    Fixture f(make_layout(3, {{0, 1}}), small_config(2, 2));
    CHECK_THROWS_AS(f.gcn.extract(Tensor::zeros({7, 2}), 2), DimensionError);
    CHECK_THROWS_AS(f.gcn.extract(Tensor::zeros({9, 2}), 3), DimensionError);
    CHECK_THROWS_AS(f.gcn.stan_forward(Tensor::zeros({6, 5}), 0), DimensionError);
    Am3dGcnConfig bad;
    bad.channels.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("finite-difference gradients through the extractor")
{
    const auto layout = make_layout(4, {{0, 1}, {1, 2}, {1, 3}});
    Fixture f(layout, small_config(2, 3));
    Rng rng(21);
    const auto x = Tensor::leaf({3 * 2 * 4, 2}, random_values(48, rng));
    std::vector<Tensor> leaves{x};
    for (const auto& p : f.store.parameters()) {
        leaves.push_back(p.tensor);
    }
    auto loss = [&] { return probe(f.gcn.extract(x, 2), 99); };
    const auto r = grad_check(loss, leaves, 60, 5);
    CHECK(r.checked == 60);
    CHECK(r.max_rel_error < 1e-4);

    SUBCASE("first-layer weights specifically")
    {
        const auto w1 = grad_check(loss, {f.gcn.layer(0).weights[0]}, 20, 6);
        CHECK(w1.max_rel_error < 1e-4);
    }
    SUBCASE("frame mean, broadcast and graph apply")
    {
        const auto n = f.gcn.propagations()[1].normalized;
        const auto y = Tensor::leaf({16, 3}, random_values(48, rng));
        auto chain = [&] { return probe(frame_broadcast(graph_apply(frame_mean(y, 2, 4), n), 2, 4), 7); };
        CHECK(grad_check(chain, {y}, 30, 8).max_rel_error < 1e-6);
    }
}
