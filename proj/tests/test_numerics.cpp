#include "doctest.h"
#include "support.hpp"

#include "mvst/adam.hpp"
#include "mvst/binary_io.hpp"
#include "mvst/checkpoint.hpp"
#include "mvst/error.hpp"
#include "mvst/ops.hpp"
#include "mvst/parameters.hpp"

#include <cmath>
#include <filesystem>

using namespace mvst;
using namespace mvst::testing;

namespace {

std::vector<double> vals(const Tensor& t)
{
    return {t.values().begin(), t.values().end()};
}

} // namespace

TEST_CASE("tensor construction and shape bookkeeping")
{
    auto t = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.size() == 6);
    CHECK(t.rank() == 2);
    CHECK(t.dim(1) == 3);
    CHECK_FALSE(t.requires_grad());
    CHECK_THROWS_AS(Tensor::constant({2, 2}, {1, 2, 3}), DimensionError);
    auto leaf = Tensor::leaf({2}, {1, 2});
    CHECK(leaf.requires_grad());
    CHECK(shape_string({2, 3}) == "[2x3]");
}

TEST_CASE("matmul examples and triple-loop oracle")
{
    auto id = Tensor::constant({2, 2}, {1, 0, 0, 1});
    auto m = Tensor::constant({2, 2}, {1, 2, 3, 4});
    CHECK(vals(matmul(id, m)) == std::vector<double>{1, 2, 3, 4});
    auto proj = Tensor::constant({2, 2}, {1, 0, 0, 0});
    auto b = Tensor::constant({2, 2}, {5, 6, 7, 8});
    CHECK(vals(matmul(proj, b)) == std::vector<double>{5, 6, 0, 0});

    Rng rng(1);
    auto x = random_constant({3, 4}, rng);
    auto y = random_constant({4, 2}, rng);
    auto z = matmul(x, y);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            double acc = 0;
            for (std::size_t k = 0; k < 4; ++k) {
                acc += x.at(i * 4 + k) * y.at(k * 2 + j);
            }
            CHECK(std::abs(z.at(i * 2 + j) - acc) < 1e-12);
        }
    }
    CHECK_THROWS_AS(matmul(x, x), DimensionError);
    try {
        matmul(x, x);
    } catch (const DimensionError& e) {
        CHECK(std::string(e.what()).find("[3x4]") != std::string::npos);
    }
}

TEST_CASE("relu values and gradient mask")
{
    auto x = Tensor::leaf({3}, {-1, 0, 2});
    auto y = relu(x);
    CHECK(vals(y) == std::vector<double>{0, 0, 2});
    backward(sum(y));
    CHECK(vals(Tensor::constant({3}, {x.grad().begin(), x.grad().end()})) == std::vector<double>{0, 0, 1});

    auto neg = Tensor::leaf({3}, {-1, -2, -3});
    backward(sum(relu(neg)));
    for (double g : neg.grad()) {
        CHECK(g == 0.0);
    }

    auto three = Tensor::leaf({1}, {3.0});
    auto r = grad_check([&] { return sum(relu(three)); }, {three}, 1, 2);
    CHECK(r.max_rel_error < 1e-8);
    CHECK(three.grad()[0] == doctest::Approx(1.0));
}

TEST_CASE("softmax and log_softmax")
{
    auto s = softmax(Tensor::constant({2}, {0, 0}), 0);
    CHECK(s.at(0) == doctest::Approx(0.5));
    CHECK(s.at(1) == doctest::Approx(0.5));

    auto big = softmax(Tensor::constant({2}, {1000, 0}), 0);
    CHECK(std::isfinite(big.at(0)));
    CHECK(big.at(0) == doctest::Approx(1.0));
    CHECK(big.at(1) < 1e-300);
    auto lbig = log_softmax(Tensor::constant({2}, {1000, 0}), 0);
    CHECK(lbig.at(1) == doctest::Approx(-1000.0));

    Rng rng(3);
    auto x = random_constant({4, 5}, rng, 3.0);
    for (std::size_t axis : {0u, 1u}) {
        auto p = softmax(x, axis);
        auto lp = log_softmax(x, axis);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(p.at(i) >= 0.0);
            CHECK(std::abs(std::exp(lp.at(i)) - p.at(i)) < 1e-12);
        }
    }
    auto p = softmax(x, 1);
    for (std::size_t r = 0; r < 4; ++r) {
        double total = 0;
        for (std::size_t c = 0; c < 5; ++c) {
            total += p.at(r * 5 + c);
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("concat, slice and reshape")
{
    auto a = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
    auto b = Tensor::constant({2, 3}, {7, 8, 9, 10, 11, 12});
    CHECK(vals(concat({a}, 1)) == vals(a));
    auto c = concat({a, b}, 1);
    CHECK(c.shape() == Shape{2, 6});
    CHECK(vals(c) == std::vector<double>{1, 2, 3, 7, 8, 9, 4, 5, 6, 10, 11, 12});
    CHECK(vals(slice(c, 1, 3, 6)) == vals(b));
    CHECK_THROWS_AS(concat({a, Tensor::zeros({3, 3})}, 1), DimensionError);
    CHECK(reshape(a, {3, 2}).shape() == Shape{3, 2});
    CHECK_THROWS_AS(reshape(a, {4, 2}), DimensionError);
}

TEST_CASE("linear examples")
{
    auto x = Tensor::constant({2}, {3, 4});
    auto w = Tensor::constant({2, 1}, {1, 1});
    auto b = Tensor::constant({1}, {0});
    CHECK(linear(x, w, b).at(0) == 7.0);
    auto ident = Tensor::constant({2, 2}, {1, 0, 0, 1});
    auto zero = Tensor::zeros({2});
    auto rows = Tensor::constant({2, 2}, {1, 2, 3, 4});
    CHECK(vals(linear(rows, ident, zero)) == vals(rows));
    CHECK_THROWS_AS(linear(Tensor::zeros({2, 3}), ident, zero), DimensionError);
}

TEST_CASE("layer norm statistics")
{
    auto gain = Tensor::filled({4}, 1.0);
    auto bias = Tensor::zeros({4});
    auto c = layer_norm(Tensor::filled({2, 4}, 5.0), gain, bias);
    for (double v : c.values()) {
        CHECK(v == 0.0);
    }
    Rng rng(4);
    auto y = layer_norm(random_constant({3, 4}, rng, 5.0), gain, bias);
    for (std::size_t r = 0; r < 3; ++r) {
        double mean = 0, var = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            mean += y.at(r * 4 + j) / 4;
        }
        for (std::size_t j = 0; j < 4; ++j) {
            var += (y.at(r * 4 + j) - mean) * (y.at(r * 4 + j) - mean) / 4;
        }
        CHECK(std::abs(mean) < 1e-9);
        // the 1e-5 epsilon keeps the variance just under 1
        CHECK(std::abs(var - 1.0) < 1e-4);
    }
}

TEST_CASE("dropout modes")
{
    Rng rng(5);
    auto x = random_constant({50}, rng);
    CHECK(vals(dropout(x, 0.0, 1, true)) == vals(x));
    CHECK(vals(dropout(x, 0.7, 1, false)) == vals(x));
    auto a = dropout(x, 0.5, 9, true);
    auto b = dropout(x, 0.5, 9, true);
    CHECK(vals(a) == vals(b));
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (a.at(i) == 0.0) {
            ++zeros;
        } else {
            CHECK(a.at(i) == doctest::Approx(2.0 * x.at(i)));
        }
    }
    CHECK(zeros > 10);
    CHECK(zeros < 40);
    CHECK_THROWS_AS(dropout(x, 1.0, 1, true), ConfigError);
    CHECK_THROWS_AS(dropout(x, -0.1, 1, true), ConfigError);
}

TEST_CASE("backward basics")
{
    auto x = Tensor::leaf({3}, {1, 2, 3});
    backward(sum(x));
    for (double g : x.grad()) {
        CHECK(g == 1.0);
    }
    auto y = Tensor::leaf({3}, {1, -2, 3});
    backward(sum(mul(y, y)));
    CHECK(y.grad()[0] == 2.0);
    CHECK(y.grad()[1] == -4.0);
    CHECK(y.grad()[2] == 6.0);
    CHECK_THROWS_AS(backward(y), DimensionError);
}

TEST_CASE("a node used twice accumulates both path gradients")
{
    Rng rng(6);
    auto x = random_leaf({3, 3}, rng);
    auto w = random_leaf({3, 3}, rng);
    auto loss = [&] {
        auto h = matmul(x, w);
        return probe(add(mul(h, h), matmul(h, transpose(h))), 11);
    };
    auto r = grad_check(loss, {x, w}, 20, 7);
    CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("finite-difference checks for every primitive")
{
    Rng rng(8);
    auto a = random_leaf({3, 4}, rng);
    auto b = random_leaf({3, 4}, rng);
    auto w = random_leaf({4, 2}, rng);
    auto bias = random_leaf({2}, rng);
    auto gain = random_leaf({4}, rng);
    auto shift = random_leaf({4}, rng);
    auto col = random_leaf({3, 1}, rng);
    auto row = random_leaf({1, 4}, rng);

    struct Case {
        const char* name;
        std::function<Tensor()> fn;
        std::vector<Tensor> leaves;
    };
    const std::vector<Case> cases = {
        {"matmul", [&] { return probe(matmul(a, w), 1); }, {a, w}},
        {"transpose", [&] { return probe(transpose(a), 2); }, {a}},
        {"add", [&] { return probe(add(a, b), 3); }, {a, b}},
        {"sub", [&] { return probe(sub(a, b), 4); }, {a, b}},
        {"mul", [&] { return probe(mul(a, b), 5); }, {a, b}},
        {"scale", [&] { return probe(scale(a, -1.7), 6); }, {a}},
        {"linear", [&] { return probe(linear(a, w, bias), 7); }, {a, w, bias}},
        {"add_bias", [&] { return probe(add_bias(a, shift), 8); }, {a, shift}},
        {"relu", [&] { return probe(relu(a), 22); }, {a}},
        {"sigmoid", [&] { return probe(sigmoid(a), 9); }, {a}},
        {"softmax", [&] { return probe(softmax(a, 1), 10); }, {a}},
        {"softmax axis 0", [&] { return probe(softmax(a, 0), 11); }, {a}},
        {"log_softmax", [&] { return probe(log_softmax(a, 1), 12); }, {a}},
        {"concat", [&] { return probe(concat({a, b}, 1), 13); }, {a, b}},
        {"concat axis 0", [&] { return probe(concat({a, b}, 0), 14); }, {a, b}},
        {"slice", [&] { return probe(slice(a, 1, 1, 3), 15); }, {a}},
        {"reshape", [&] { return probe(reshape(a, {2, 6}), 16); }, {a}},
        {"layer_norm", [&] { return probe(layer_norm(a, gain, shift), 17); }, {a, gain, shift}},
        {"mean", [&] { return scale(mean(mul(a, b)), 3.0); }, {a, b}},
        {"group_mean_rows", [&] { return probe(group_mean_rows(concat({a, b}, 0), 3), 18); }, {a, b}},
        {"scale_rows", [&] { return probe(scale_rows(a, col), 19); }, {a, col}},
        {"broadcast_rows", [&] { return probe(broadcast_rows(row, 5), 20); }, {row}},
        {"dropout", [&] { return probe(dropout(a, 0.3, 99, true), 21); }, {a}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        auto r = grad_check(c.fn, c.leaves, 24, 100);
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("generator determinism and distributions")
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng r(1);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double z = r.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
    }
}

TEST_CASE("parameter store")
{
    ParameterStore store;
    Rng rng(3);
    auto w = store.add_uniform("layer.weight", {4, 3}, 4, rng);
    for (double v : w.values()) {
        CHECK(std::abs(v) <= 0.5);
    }
    store.add_filled("layer.bias", {3}, 0.0);
    CHECK(store.scalar_count() == 15);
    CHECK(store.contains("layer.bias"));
    CHECK_THROWS_AS(store.add_filled("layer.bias", {3}, 0.0), ConfigError);
    CHECK_THROWS(store.get("missing"));
}

TEST_CASE("adam updates")
{
    ParameterStore store;
    auto w = store.add("w", {2}, {1.0, -1.0});
    Adam still({0.1, 0.9, 0.999, 1e-8, 0.0});
    w.grad_buffer();
    still.step(store);
    CHECK(w.at(0) == 1.0);
    CHECK(w.at(1) == -1.0);
    CHECK(still.steps() == 1);

    Adam adam({0.01, 0.9, 0.999, 1e-8, 0.0});
    for (int i = 0; i < 50; ++i) {
        w.grad_buffer()[0] = 2.0;
        w.grad_buffer()[1] = -3.0;
        adam.step(store);
    }
    CHECK(w.at(0) < 1.0);
    CHECK(w.at(1) > -1.0);
    CHECK(adam.steps() == 50);

    // one step on (w - 3)^2 lowers the loss
    ParameterStore q;
    auto x = q.add("x", {1}, {0.0});
    Adam opt({0.1, 0.9, 0.999, 1e-8, 0.0});
    auto loss = [&] { return sum(mul(sub(x, Tensor::filled({1}, 3.0)), sub(x, Tensor::filled({1}, 3.0)))); };
    const double before = loss().item();
    backward(loss());
    opt.step(q);
    CHECK(loss().item() < before);
    CHECK(x.grad()[0] == 0.0);

    // first step with decay: w <- w(1 - lr*wd) - lr * g / (|g| + eps)
    ParameterStore d;
    auto v = d.add("v", {1}, {2.0});
    Adam decay({0.1, 0.9, 0.999, 1e-8, 0.5});
    v.grad_buffer()[0] = 4.0;
    decay.step(d);
    CHECK(v.at(0) == doctest::Approx(2.0 * (1 - 0.05) - 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-12));

    ParameterStore missing;
    missing.add("m", {1}, {0.0});
    Adam fail({});
    CHECK_THROWS_AS(fail.step(missing), NumericError);
}

TEST_CASE("checkpoint round trip and diagnostics")
{
    ParameterStore store;
    Rng rng(9);
    store.add_uniform("a.weight", {3, 2}, 3, rng);
    store.add_uniform("a.bias", {2}, 3, rng);
    auto bytes = encode_checkpoint("{\"k\":1}", store);
    auto ck = decode_checkpoint(bytes, "mem");
    CHECK(ck.config_json == "{\"k\":1}");
    REQUIRE(ck.entries.size() == 2);
    CHECK(ck.entries[0].name == "a.weight");
    CHECK(ck.entries[0].shape == Shape{3, 2});

    ParameterStore other;
    Rng rng2(10);
    other.add_uniform("a.weight", {3, 2}, 3, rng2);
    other.add_uniform("a.bias", {2}, 3, rng2);
    restore_parameters(ck, other);
    CHECK(encode_checkpoint("{\"k\":1}", other) == bytes);

    auto cut = bytes;
    cut.resize(cut.size() - 5);
    try {
        decode_checkpoint(cut, "cut");
        FAIL("expected a truncation error");
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::truncated);
    }
    auto bumped = bytes;
    bumped[8] = 9;
    try {
        decode_checkpoint(bumped, "v9");
        FAIL("expected a version error");
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::version_mismatch);
    }

    ParameterStore wrong;
    wrong.add_filled("a.weight", {2, 3}, 0.0);
    wrong.add_filled("a.bias", {2}, 0.0);
    try {
        restore_parameters(ck, wrong);
        FAIL("expected a shape mismatch");
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::shape_mismatch);
    }

    const auto path = (std::filesystem::temp_directory_path() / "mvst_ckpt_test" / "c.bin").string();
    save_checkpoint(path, "{}", store);
    CHECK(load_checkpoint(path).entries.size() == 2);
    try {
        load_checkpoint(path + ".absent");
        FAIL("expected a missing-file error");
    } catch (const DataError& e) {
        CHECK(e.kind() == DataError::Kind::missing_file);
        CHECK(std::string(e.what()).find("c.bin.absent") != std::string::npos);
    }
}
