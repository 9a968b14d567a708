#include "mvst/ops.hpp"

#include "mvst/error.hpp"
#include "mvst/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvst {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_rank(const Tensor& t, std::size_t rank, const char* op)
{
    if (t.rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank)
                             + ", got shape " + shape_string(t.shape()));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op)
{
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape())
                             + " vs " + shape_string(b.shape()));
    }
}

struct AxisSplit {
    std::size_t outer = 1;
    std::size_t extent = 1;
    std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op)
{
    if (axis >= shape.size()) {
        throw DimensionError(std::string(op) + ": axis " + std::to_string(axis)
                             + " invalid for shape " + shape_string(shape));
    }
    AxisSplit s;
    for (std::size_t i = 0; i < axis; ++i) {
        s.outer *= shape[i];
    }
    s.extent = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) {
        s.inner *= shape[i];
    }
    return s;
}

// Adds g into t's gradient when t takes part in differentiation.
template <typename F>
void accumulate(const Tensor& t, F&& body)
{
    if (t.requires_grad()) {
        body(t.grad_buffer());
    }
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b)
{
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t r = a.dim(0), s = a.dim(1), t = b.dim(1);
    if (b.dim(0) != s) {
        throw DimensionError("matmul: inner dimensions disagree, " + shape_string(a.shape())
                             + " x " + shape_string(b.shape()));
    }
    std::vector<double> out(r * t);
    MutMap(out.data(), r, t).noalias() = ConstMap(a.values().data(), r, s)
                                         * ConstMap(b.values().data(), s, t);
    return Tensor::from_op({r, t}, std::move(out), {a, b},
                           [a, b, r, s, t](std::span<const double> g) mutable {
                               ConstMap gm(g.data(), r, t);
                               accumulate(a, [&](std::span<double> ga) {
                                   MutMap(ga.data(), r, s).noalias()
                                       += gm * ConstMap(b.values().data(), s, t).transpose();
                               });
                               accumulate(b, [&](std::span<double> gb) {
                                   MutMap(gb.data(), s, t).noalias()
                                       += ConstMap(a.values().data(), r, s).transpose() * gm;
                               });
                           });
}

Tensor transpose(const Tensor& a)
{
    require_rank(a, 2, "transpose");
    const std::size_t r = a.dim(0), c = a.dim(1);
    std::vector<double> out(r * c);
    MutMap(out.data(), c, r) = ConstMap(a.values().data(), r, c).transpose();
    return Tensor::from_op({c, r}, std::move(out), {a},
                           [a, r, c](std::span<const double> g) mutable {
                               accumulate(a, [&](std::span<double> ga) {
                                   MutMap(ga.data(), r, c) += ConstMap(g.data(), c, r).transpose();
                               });
                           });
}

Tensor add(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = av[i] + bv[i];
    }
    return Tensor::from_op(a.shape(), std::move(out), {a, b},
                           [a, b](std::span<const double> g) mutable {
                               for (const Tensor* t : {&a, &b}) {
                                   accumulate(*t, [&](std::span<double> gt) {
                                       for (std::size_t i = 0; i < g.size(); ++i) {
                                           gt[i] += g[i];
                                       }
                                   });
                               }
                           });
}

Tensor sub(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.size());
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = av[i] - bv[i];
    }
    return Tensor::from_op(a.shape(), std::move(out), {a, b},
                           [a, b](std::span<const double> g) mutable {
                               accumulate(a, [&](std::span<double> ga) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       ga[i] += g[i];
                                   }
                               });
                               accumulate(b, [&](std::span<double> gb) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       gb[i] -= g[i];
                                   }
                               });
                           });
}

Tensor mul(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.size());
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = av[i] * bv[i];
    }
    return Tensor::from_op(a.shape(), std::move(out), {a, b},
                           [a, b](std::span<const double> g) mutable {
                               auto av = a.values(), bv = b.values();
                               accumulate(a, [&](std::span<double> ga) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       ga[i] += g[i] * bv[i];
                                   }
                               });
                               accumulate(b, [&](std::span<double> gb) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       gb[i] += g[i] * av[i];
                                   }
                               });
                           });
}

Tensor scale(const Tensor& a, double factor)
{
    std::vector<double> out(a.values().begin(), a.values().end());
    for (auto& v : out) {
        v *= factor;
    }
    return Tensor::from_op(a.shape(), std::move(out), {a},
                           [a, factor](std::span<const double> g) mutable {
                               accumulate(a, [&](std::span<double> ga) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       ga[i] += factor * g[i];
                                   }
                               });
                           });
}

Tensor add_bias(const Tensor& x, const Tensor& b)
{
    require_rank(b, 1, "add_bias");
    if (x.rank() == 0 || x.shape().back() != b.dim(0)) {
        throw DimensionError("add_bias: trailing extent of " + shape_string(x.shape())
                             + " does not match bias " + shape_string(b.shape()));
    }
    const std::size_t p = b.dim(0);
    std::vector<double> out(x.values().begin(), x.values().end());
    auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += bv[i % p];
    }
    return Tensor::from_op(x.shape(), std::move(out), {x, b},
                           [x, b, p](std::span<const double> g) mutable {
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       gx[i] += g[i];
                                   }
                               });
                               accumulate(b, [&](std::span<double> gb) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       gb[i % p] += g[i];
                                   }
                               });
                           });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b)
{
    require_rank(w, 2, "linear");
    if (x.rank() == 1) {
        if (x.dim(0) != w.dim(0)) {
            throw DimensionError("linear: input " + shape_string(x.shape()) + " vs weight "
                                 + shape_string(w.shape()));
        }
        auto y = linear(reshape(x, {1, x.dim(0)}), w, b);
        return reshape(y, {w.dim(1)});
    }
    require_rank(x, 2, "linear");
    if (x.dim(1) != w.dim(0)) {
        throw DimensionError("linear: input " + shape_string(x.shape()) + " vs weight "
                             + shape_string(w.shape()));
    }
    return add_bias(matmul(x, w), b);
}

Tensor relu(const Tensor& x)
{
    std::vector<double> out(x.values().begin(), x.values().end());
    for (auto& v : out) {
        v = v > 0.0 ? v : 0.0;
    }
    return Tensor::from_op(x.shape(), std::move(out), {x}, [x](std::span<const double> g) mutable {
        auto xv = x.values();
        accumulate(x, [&](std::span<double> gx) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (xv[i] > 0.0) {
                    gx[i] += g[i];
                }
            }
        });
    });
}

Tensor sigmoid(const Tensor& x)
{
    std::vector<double> out(x.size());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        // Split form avoids exp overflow on either tail.
        out[i] = xv[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-xv[i]))
                              : std::exp(xv[i]) / (1.0 + std::exp(xv[i]));
    }
    auto saved = out;
    return Tensor::from_op(x.shape(), std::move(out), {x},
                           [x, y = std::move(saved)](std::span<const double> g) mutable {
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       gx[i] += g[i] * y[i] * (1.0 - y[i]);
                                   }
                               });
                           });
}

Tensor softmax(const Tensor& x, std::size_t axis)
{
    auto s = split_axis(x.shape(), axis, "softmax");
    auto xv = x.values();
    std::vector<double> out(x.size());
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.extent * s.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < s.extent; ++k) {
                mx = std::max(mx, xv[base + k * s.inner]);
            }
            double total = 0.0;
            for (std::size_t k = 0; k < s.extent; ++k) {
                double e = std::exp(xv[base + k * s.inner] - mx);
                out[base + k * s.inner] = e;
                total += e;
            }
            for (std::size_t k = 0; k < s.extent; ++k) {
                out[base + k * s.inner] /= total;
            }
        }
    }
    auto y = out;
    return Tensor::from_op(
        x.shape(), std::move(out), {x}, [x, s, y = std::move(y)](std::span<const double> g) mutable {
            accumulate(x, [&](std::span<double> gx) {
                for (std::size_t o = 0; o < s.outer; ++o) {
                    for (std::size_t in = 0; in < s.inner; ++in) {
                        const std::size_t base = o * s.extent * s.inner + in;
                        double dot = 0.0;
                        for (std::size_t k = 0; k < s.extent; ++k) {
                            dot += g[base + k * s.inner] * y[base + k * s.inner];
                        }
                        for (std::size_t k = 0; k < s.extent; ++k) {
                            const std::size_t i = base + k * s.inner;
                            gx[i] += y[i] * (g[i] - dot);
                        }
                    }
                }
            });
        });
}

Tensor log_softmax(const Tensor& x, std::size_t axis)
{
    auto s = split_axis(x.shape(), axis, "log_softmax");
    auto xv = x.values();
    std::vector<double> out(x.size());
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.extent * s.inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < s.extent; ++k) {
                mx = std::max(mx, xv[base + k * s.inner]);
            }
            double total = 0.0;
            for (std::size_t k = 0; k < s.extent; ++k) {
                total += std::exp(xv[base + k * s.inner] - mx);
            }
            const double lse = mx + std::log(total);
            for (std::size_t k = 0; k < s.extent; ++k) {
                out[base + k * s.inner] = xv[base + k * s.inner] - lse;
            }
        }
    }
    auto y = out;
    return Tensor::from_op(
        x.shape(), std::move(out), {x}, [x, s, y = std::move(y)](std::span<const double> g) mutable {
            accumulate(x, [&](std::span<double> gx) {
                for (std::size_t o = 0; o < s.outer; ++o) {
                    for (std::size_t in = 0; in < s.inner; ++in) {
                        const std::size_t base = o * s.extent * s.inner + in;
                        double gsum = 0.0;
                        for (std::size_t k = 0; k < s.extent; ++k) {
                            gsum += g[base + k * s.inner];
                        }
                        for (std::size_t k = 0; k < s.extent; ++k) {
                            const std::size_t i = base + k * s.inner;
                            gx[i] += g[i] - std::exp(y[i]) * gsum;
                        }
                    }
                }
            });
        });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis)
{
    if (parts.empty()) {
        throw DimensionError("concat: no parts");
    }
    const Shape& first = parts.front().shape();
    std::vector<AxisSplit> splits;
    std::size_t total_extent = 0;
    for (const auto& p : parts) {
        const Shape& sh = p.shape();
        bool ok = sh.size() == first.size() && axis < sh.size();
        for (std::size_t i = 0; ok && i < sh.size(); ++i) {
            ok = i == axis || sh[i] == first[i];
        }
        if (!ok) {
            throw DimensionError("concat: part " + shape_string(sh) + " incompatible with "
                                 + shape_string(first) + " along axis " + std::to_string(axis));
        }
        splits.push_back(split_axis(sh, axis, "concat"));
        total_extent += sh[axis];
    }
    Shape out_shape = first;
    out_shape[axis] = total_extent;
    const std::size_t outer = splits.front().outer;
    const std::size_t inner = splits.front().inner;

    std::vector<double> out(shape_size(out_shape));
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        auto pv = parts[p].values();
        const std::size_t block = splits[p].extent * inner;
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(pv.begin() + o * block, block,
                        out.begin() + o * total_extent * inner + offset * inner);
        }
        offset += splits[p].extent;
    }
    return Tensor::from_op(std::move(out_shape), std::move(out), parts,
                           [parts, splits, outer, inner, total_extent](std::span<const double> g) mutable {
                               std::size_t offset = 0;
                               for (std::size_t p = 0; p < parts.size(); ++p) {
                                   const std::size_t block = splits[p].extent * inner;
                                   accumulate(parts[p], [&](std::span<double> gp) {
                                       for (std::size_t o = 0; o < outer; ++o) {
                                           const double* src
                                               = g.data() + o * total_extent * inner + offset * inner;
                                           for (std::size_t i = 0; i < block; ++i) {
                                               gp[o * block + i] += src[i];
                                           }
                                       }
                                   });
                                   offset += splits[p].extent;
                               }
                           });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end)
{
    auto s = split_axis(x.shape(), axis, "slice");
    if (begin > end || end > s.extent) {
        throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end)
                             + ") outside axis of extent " + std::to_string(s.extent));
    }
    Shape out_shape = x.shape();
    out_shape[axis] = end - begin;
    const std::size_t width = (end - begin) * s.inner;
    std::vector<double> out(shape_size(out_shape));
    auto xv = x.values();
    for (std::size_t o = 0; o < s.outer; ++o) {
        std::copy_n(xv.begin() + o * s.extent * s.inner + begin * s.inner, width,
                    out.begin() + o * width);
    }
    return Tensor::from_op(std::move(out_shape), std::move(out), {x},
                           [x, s, begin, width](std::span<const double> g) mutable {
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t o = 0; o < s.outer; ++o) {
                                       double* dst = gx.data() + o * s.extent * s.inner + begin * s.inner;
                                       for (std::size_t i = 0; i < width; ++i) {
                                           dst[i] += g[o * width + i];
                                       }
                                   }
                               });
                           });
}

Tensor reshape(const Tensor& x, Shape shape)
{
    if (shape_size(shape) != x.size()) {
        throw DimensionError("reshape: cannot view " + shape_string(x.shape()) + " as "
                             + shape_string(shape));
    }
    std::vector<double> out(x.values().begin(), x.values().end());
    return Tensor::from_op(std::move(shape), std::move(out), {x},
                           [x](std::span<const double> g) mutable {
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       gx[i] += g[i];
                                   }
                               });
                           });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias)
{
    if (x.rank() == 0 || x.shape().back() < 1) {
        throw DimensionError("layer_norm: feature extent must be at least 1");
    }
    const std::size_t n = x.shape().back();
    if (gain.shape() != Shape{n} || bias.shape() != Shape{n}) {
        throw DimensionError("layer_norm: gain/bias must be [" + std::to_string(n) + "], got "
                             + shape_string(gain.shape()) + " and " + shape_string(bias.shape()));
    }
    const std::size_t rows = x.size() / n;
    auto xv = x.values(), gv = gain.values(), bv = bias.values();
    std::vector<double> xhat(x.size());
    std::vector<double> inv_std(rows);
    std::vector<double> out(x.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = xv.data() + r * n;
        double mu = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mu += row[j];
        }
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            var += (row[j] - mu) * (row[j] - mu);
        }
        var /= static_cast<double>(n);
        inv_std[r] = 1.0 / std::sqrt(var + layer_norm_epsilon);
        for (std::size_t j = 0; j < n; ++j) {
            xhat[r * n + j] = (row[j] - mu) * inv_std[r];
            out[r * n + j] = xhat[r * n + j] * gv[j] + bv[j];
        }
    }
    return Tensor::from_op(
        x.shape(), std::move(out), {x, gain, bias},
        [x, gain, bias, n, rows, xhat = std::move(xhat),
         inv_std = std::move(inv_std)](std::span<const double> g) mutable {
            auto gv = gain.values();
            accumulate(gain, [&](std::span<double> gg) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gg[i % n] += g[i] * xhat[i];
                }
            });
            accumulate(bias, [&](std::span<double> gb) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gb[i % n] += g[i];
                }
            });
            accumulate(x, [&](std::span<double> gx) {
                const double inv_n = 1.0 / static_cast<double>(n);
                for (std::size_t r = 0; r < rows; ++r) {
                    double sum_d = 0.0, sum_dx = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        double d = g[r * n + j] * gv[j];
                        sum_d += d;
                        sum_dx += d * xhat[r * n + j];
                    }
                    for (std::size_t j = 0; j < n; ++j) {
                        double d = g[r * n + j] * gv[j];
                        gx[r * n + j]
                            += inv_std[r] * (d - inv_n * sum_d - xhat[r * n + j] * inv_n * sum_dx);
                    }
                }
            });
        });
}

Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, bool training)
{
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
    }
    if (!training || rate == 0.0) {
        return x;
    }
    Rng rng(seed);
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> mask(x.size());
    for (auto& m : mask) {
        m = rng.uniform() >= rate ? keep_scale : 0.0;
    }
    std::vector<double> out(x.size());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = xv[i] * mask[i];
    }
    return Tensor::from_op(x.shape(), std::move(out), {x},
                           [x, mask = std::move(mask)](std::span<const double> g) mutable {
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       gx[i] += g[i] * mask[i];
                                   }
                               });
                           });
}

Tensor sum(const Tensor& x)
{
    double total = 0.0;
    for (double v : x.values()) {
        total += v;
    }
    return Tensor::from_op({}, {total}, {x}, [x](std::span<const double> g) mutable {
        accumulate(x, [&](std::span<double> gx) {
            for (auto& v : gx) {
                v += g[0];
            }
        });
    });
}

Tensor mean(const Tensor& x)
{
    return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor group_mean_rows(const Tensor& x, std::size_t group)
{
    require_rank(x, 2, "group_mean_rows");
    const std::size_t rows = x.dim(0), cols = x.dim(1);
    if (group == 0 || rows % group != 0) {
        throw DimensionError("group_mean_rows: " + std::to_string(rows)
                             + " rows not divisible into groups of " + std::to_string(group));
    }
    const std::size_t groups = rows / group;
    const double inv = 1.0 / static_cast<double>(group);
    std::vector<double> out(groups * cols, 0.0);
    auto xv = x.values();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out[(r / group) * cols + c] += xv[r * cols + c];
        }
    }
    for (auto& v : out) {
        v *= inv;
    }
    return Tensor::from_op({groups, cols}, std::move(out), {x},
                           [x, rows, cols, group, inv](std::span<const double> g) mutable {
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t r = 0; r < rows; ++r) {
                                       for (std::size_t c = 0; c < cols; ++c) {
                                           gx[r * cols + c] += inv * g[(r / group) * cols + c];
                                       }
                                   }
                               });
                           });
}

Tensor scale_rows(const Tensor& x, const Tensor& s)
{
    require_rank(x, 2, "scale_rows");
    const std::size_t rows = x.dim(0), cols = x.dim(1);
    if (s.size() != rows || !(s.rank() == 1 || (s.rank() == 2 && s.dim(1) == 1))) {
        throw DimensionError("scale_rows: scale " + shape_string(s.shape()) + " does not fit "
                             + shape_string(x.shape()));
    }
    std::vector<double> out(x.size());
    auto xv = x.values(), sv = s.values();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out[r * cols + c] = xv[r * cols + c] * sv[r];
        }
    }
    return Tensor::from_op(x.shape(), std::move(out), {x, s},
                           [x, s, rows, cols](std::span<const double> g) mutable {
                               auto xv = x.values(), sv = s.values();
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t r = 0; r < rows; ++r) {
                                       for (std::size_t c = 0; c < cols; ++c) {
                                           gx[r * cols + c] += g[r * cols + c] * sv[r];
                                       }
                                   }
                               });
                               accumulate(s, [&](std::span<double> gs) {
                                   for (std::size_t r = 0; r < rows; ++r) {
                                       double acc = 0.0;
                                       for (std::size_t c = 0; c < cols; ++c) {
                                           acc += g[r * cols + c] * xv[r * cols + c];
                                       }
                                       gs[r] += acc;
                                   }
                               });
                           });
}

Tensor broadcast_rows(const Tensor& x, std::size_t rows)
{
    const std::size_t cols = x.size();
    if (!(x.rank() == 1 || (x.rank() == 2 && x.dim(0) == 1))) {
        throw DimensionError("broadcast_rows: expected a row vector, got " + shape_string(x.shape()));
    }
    std::vector<double> out(rows * cols);
    auto xv = x.values();
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy(xv.begin(), xv.end(), out.begin() + r * cols);
    }
    return Tensor::from_op({rows, cols}, std::move(out), {x},
                           [x, rows, cols](std::span<const double> g) mutable {
                               accumulate(x, [&](std::span<double> gx) {
                                   for (std::size_t r = 0; r < rows; ++r) {
                                       for (std::size_t c = 0; c < cols; ++c) {
                                           gx[c] += g[r * cols + c];
                                       }
                                   }
                               });
                           });
}

} // namespace mvst
