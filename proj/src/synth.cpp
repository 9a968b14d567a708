#include "mvst/synth.hpp"

#include "mvst/error.hpp"
#include "mvst/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mvst {

namespace {

using Color = std::array<double, 3>;

constexpr std::array<Color, 3> group_palette{{
    {1.0, 0.5, 0.1},   // first group (hands in the shipped layout)
    {0.2, 0.6, 1.0},   // second (face)
    {0.85, 0.85, 0.85} // third (body)
}};
constexpr Color ungrouped_color{0.5, 0.5, 0.5};

Color color_for(const JointLayout& layout, std::size_t joint)
{
    auto g = layout.group_of(joint);
    return g < group_palette.size() ? group_palette[g] : ungrouped_color;
}

void paint(std::vector<double>& canvas, std::size_t width, std::size_t row, std::size_t col,
           double coverage, const Color& color)
{
    double* px = canvas.data() + (row * width + col) * 3;
    for (std::size_t c = 0; c < 3; ++c) {
        px[c] = std::max(px[c], coverage * color[c]);
    }
}

// Pixel box [r0, r1) x [c0, c1) around a bounding rectangle, clipped to the canvas.
struct PixelBox {
    std::size_t r0, r1, c0, c1;
};

PixelBox clip_box(double xmin, double xmax, double ymin, double ymax, std::size_t h, std::size_t w)
{
    auto lo = [](double v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, static_cast<double>(n)));
    };
    auto hi = [](double v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(std::ceil(v) + 1.0, 0.0, static_cast<double>(n)));
    };
    return {lo(ymin, h), hi(ymax, h), lo(xmin, w), hi(xmax, w)};
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by)
{
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

} // namespace

RgbSequence rasterize_skeleton_to_rgb(const SkeletonSequence& seq, std::size_t frame,
                                      const JointLayout& layout, const RasterOptions& options)
{
    const std::size_t h = options.height, w = options.width;
    std::vector<double> canvas(h * w * 3, 0.0);
    auto px = [&](std::size_t j) { return seq.x(frame, j) * static_cast<double>(w); };
    auto py = [&](std::size_t j) { return seq.y(frame, j) * static_cast<double>(h); };
    for (std::size_t j = 0; j < seq.joints; ++j) {
        if (!std::isfinite(px(j)) || !std::isfinite(py(j))) {
            throw DataError(DataError::Kind::bad_format, "rasterize: non-finite joint coordinate");
        }
    }

    const double reach_line = options.line_half_width + 0.5;
    for (auto [a, b] : layout.edges) {
        const double ax = px(a), ay = py(a), bx = px(b), by = py(b);
        auto box = clip_box(std::min(ax, bx) - reach_line, std::max(ax, bx) + reach_line,
                            std::min(ay, by) - reach_line, std::max(ay, by) + reach_line, h, w);
        const Color color = color_for(layout, a);
        for (auto r = box.r0; r < box.r1; ++r) {
            for (auto c = box.c0; c < box.c1; ++c) {
                double d = segment_distance(c + 0.5, r + 0.5, ax, ay, bx, by);
                double cov = std::clamp(reach_line - d, 0.0, 1.0);
                if (cov > 0.0) {
                    paint(canvas, w, r, c, cov, color);
                }
            }
        }
    }
    const double reach_disc = options.joint_radius + 0.5;
    for (std::size_t j = 0; j < seq.joints; ++j) {
        const double cx = px(j), cy = py(j);
        auto box = clip_box(cx - reach_disc, cx + reach_disc, cy - reach_disc, cy + reach_disc, h, w);
        const Color color = color_for(layout, j);
        for (auto r = box.r0; r < box.r1; ++r) {
            for (auto c = box.c0; c < box.c1; ++c) {
                double cov = std::clamp(reach_disc - std::hypot(c + 0.5 - cx, r + 0.5 - cy), 0.0, 1.0);
                if (cov > 0.0) {
                    paint(canvas, w, r, c, cov, color);
                }
            }
        }
    }

    RgbSequence out(1, h, w);
    for (std::size_t i = 0; i < canvas.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(canvas[i], 0.0, 1.0) * 255.0));
    }
    return out;
}

RgbSequence rasterize_sequence(const SkeletonSequence& seq, const JointLayout& layout,
                               const RasterOptions& options)
{
    RgbSequence out(seq.frames, options.height, options.width);
    const std::size_t fs = out.frame_size();
    for (std::size_t t = 0; t < seq.frames; ++t) {
        auto frame = rasterize_skeleton_to_rgb(seq, t, layout, options);
        std::copy(frame.pixels.begin(), frame.pixels.end(),
                  out.pixels.begin() + static_cast<std::ptrdiff_t>(t * fs));
    }
    return out;
}

namespace {

constexpr std::size_t hand_joints = 21;
constexpr std::size_t left_wrist = 0;
constexpr std::size_t right_wrist = 21;
constexpr std::size_t nose = 42;
constexpr std::size_t neck = 47;
constexpr std::size_t left_shoulder = 48;
constexpr std::size_t left_elbow = 49;
constexpr std::size_t right_shoulder = 50;
constexpr std::size_t right_elbow = 51;

void require_default_layout(const JointLayout& layout)
{
    if (layout.joint_count != 52 || layout.neck != neck || layout.nose != nose) {
        throw ConfigError("synthetic generator needs the 52-joint layout (neck 47, nose 42)");
    }
}

struct Point {
    double x, y;
};

// Places the four joints of each finger from the wrist. side = -1 for the
// left hand (image left), +1 for the right.
void place_hand(SkeletonSequence& seq, std::size_t t, std::size_t base, Point wrist, double rotation,
                const std::array<double, 5>& curl, double side)
{
    static constexpr std::array<double, 5> spread{-0.9, -0.4, 0.0, 0.35, 0.7};
    static constexpr std::array<double, 4> segment{0.028, 0.016, 0.012, 0.010};
    seq.x(t, base) = wrist.x;
    seq.y(t, base) = wrist.y;
    for (std::size_t f = 0; f < 5; ++f) {
        Point p = wrist;
        double angle = side * spread[f] + rotation;
        for (std::size_t k = 0; k < 4; ++k) {
            double len = f == 0 ? 0.8 * segment[k] : segment[k];
            // angle 0 points straight up (negative y)
            p.x += len * std::sin(angle);
            p.y -= len * std::cos(angle);
            const std::size_t j = base + 1 + 4 * f + k;
            seq.x(t, j) = p.x;
            seq.y(t, j) = p.y;
            angle += side * curl[f] * 0.6;
        }
    }
}

} // namespace

SkeletonSequence rest_pose(const JointLayout& layout)
{
    require_default_layout(layout);
    SkeletonSequence pose(1, 52);
    auto set = [&](std::size_t j, double x, double y) {
        pose.x(0, j) = x;
        pose.y(0, j) = y;
    };
    set(nose, 0.50, 0.30);
    set(43, 0.47, 0.28);
    set(44, 0.53, 0.28);
    set(45, 0.44, 0.30);
    set(46, 0.56, 0.30);
    set(neck, 0.50, 0.44);
    set(left_shoulder, 0.38, 0.48);
    set(right_shoulder, 0.62, 0.48);
    const Point lw{0.40, 0.78}, rw{0.60, 0.78};
    set(left_elbow, 0.33, 0.66);
    set(right_elbow, 0.67, 0.66);
    std::array<double, 5> relaxed{0.2, 0.2, 0.2, 0.2, 0.2};
    place_hand(pose, 0, left_wrist, lw, 0.0, relaxed, -1.0);
    place_hand(pose, 0, right_wrist, rw, 0.0, relaxed, 1.0);
    return pose;
}

GlossBank::GlossBank(const JointLayout& layout, std::size_t vocab_size, std::uint64_t seed,
                     std::size_t gloss_frames)
    : layout_(layout), gloss_frames_(gloss_frames)
{
    if (vocab_size < 2) {
        throw ConfigError("synthetic vocabulary needs at least 2 glosses");
    }
    if (gloss_frames < 2) {
        throw ConfigError("gloss duration must be at least 2 frames");
    }
    const SkeletonSequence rest = rest_pose(layout);
    Rng rng(Rng::mix(seed ^ 0x6a09e667f3bcc909ULL));
    const double two_pi = 2.0 * std::numbers::pi;

    for (std::size_t g = 0; g < vocab_size; ++g) {
        struct HandMotion {
            Point offset, amplitude, phase;
            double frequency, rotation, rotation_swing, rotation_phase;
            std::array<double, 5> curl;
        };
        std::array<HandMotion, 2> hands{};
        for (auto& hm : hands) {
            hm.offset = {rng.uniform(-0.12, 0.12), rng.uniform(-0.22, 0.04)};
            hm.amplitude = {rng.uniform(0.02, 0.06), rng.uniform(0.02, 0.06)};
            hm.phase = {rng.uniform(0.0, two_pi), rng.uniform(0.0, two_pi)};
            hm.frequency = rng.uniform() < 0.5 ? 1.0 : 2.0;
            hm.rotation = rng.uniform(-1.0, 1.0);
            hm.rotation_swing = rng.uniform(0.0, 0.4);
            hm.rotation_phase = rng.uniform(0.0, two_pi);
            for (auto& c : hm.curl) {
                c = rng.uniform(0.0, 1.0);
            }
        }
        const double nod = rng.uniform(0.0, 0.012);
        const double nod_phase = rng.uniform(0.0, two_pi);

        SkeletonSequence proto(gloss_frames, 52);
        for (std::size_t t = 0; t < gloss_frames; ++t) {
            const double s = static_cast<double>(t) / static_cast<double>(gloss_frames);
            for (std::size_t j = 42; j < 52; ++j) {
                proto.x(t, j) = rest.x(0, j);
                proto.y(t, j) = rest.y(0, j);
            }
            const double head_dy = nod * std::sin(two_pi * s + nod_phase);
            for (std::size_t j = 42; j < 47; ++j) {
                proto.y(t, j) += head_dy;
            }
            for (std::size_t h = 0; h < 2; ++h) {
                const auto& hm = hands[h];
                const std::size_t base = h == 0 ? left_wrist : right_wrist;
                const double side = h == 0 ? -1.0 : 1.0;
                Point wrist{rest.x(0, base) + hm.offset.x
                                + hm.amplitude.x * std::sin(two_pi * hm.frequency * s + hm.phase.x),
                            rest.y(0, base) + hm.offset.y
                                + hm.amplitude.y * std::sin(two_pi * hm.frequency * s + hm.phase.y)};
                const double rotation
                    = side * hm.rotation + hm.rotation_swing * std::sin(two_pi * s + hm.rotation_phase);
                place_hand(proto, t, base, wrist, rotation, hm.curl, side);

                const std::size_t shoulder = h == 0 ? left_shoulder : right_shoulder;
                const std::size_t elbow = h == 0 ? left_elbow : right_elbow;
                const Point sh{proto.x(t, shoulder), proto.y(t, shoulder)};
                proto.x(t, elbow) = 0.5 * (sh.x + wrist.x) + side * 0.05;
                proto.y(t, elbow) = 0.5 * (sh.y + wrist.y) + 0.02;
            }
        }
        prototypes_.push_back(std::move(proto));
    }
    static_assert(hand_joints == right_wrist - left_wrist);
}

SynthSample synth_render_sentence(const GlossBank& bank, const SynthOptions& options,
                                  const std::vector<std::size_t>& glosses, std::uint64_t seed)
{
    if (glosses.empty()) {
        throw ConfigError("synthetic sentence needs at least one gloss");
    }
    const std::size_t d = bank.gloss_frames();
    const std::size_t tr = options.transition_frames;
    const std::size_t total = glosses.size() * d + (glosses.size() - 1) * tr;
    const std::size_t v = 52;

    SkeletonSequence seq(total, v);
    std::size_t t = 0;
    for (std::size_t n = 0; n < glosses.size(); ++n) {
        if (glosses[n] >= bank.vocab_size()) {
            throw ConfigError("gloss id " + std::to_string(glosses[n]) + " outside vocabulary");
        }
        const auto& proto = bank.prototype(glosses[n]);
        if (n > 0) {
            const auto& prev = bank.prototype(glosses[n - 1]);
            for (std::size_t i = 1; i <= tr; ++i, ++t) {
                const double a = static_cast<double>(i) / static_cast<double>(tr + 1);
                for (std::size_t j = 0; j < v; ++j) {
                    seq.x(t, j) = (1.0 - a) * prev.x(d - 1, j) + a * proto.x(0, j);
                    seq.y(t, j) = (1.0 - a) * prev.y(d - 1, j) + a * proto.y(0, j);
                }
            }
        }
        for (std::size_t f = 0; f < d; ++f, ++t) {
            for (std::size_t j = 0; j < v; ++j) {
                seq.x(t, j) = proto.x(f, j);
                seq.y(t, j) = proto.y(f, j);
            }
        }
    }

    Rng rng(seed);
    for (auto& c : seq.coords) {
        c = static_cast<double>(static_cast<float>(c + options.noise * rng.normal()));
    }

    SynthSample sample;
    sample.rgb = rasterize_sequence(seq, bank.layout(), options.raster);
    sample.skeleton = std::move(seq);
    sample.glosses = glosses;
    return sample;
}

SynthSample synth_generate(const GlossBank& bank, const SynthOptions& options, std::uint64_t seed)
{
    if (options.min_length < 1 || options.max_length < options.min_length) {
        throw ConfigError("sentence length range must satisfy 1 <= min <= max");
    }
    Rng rng(seed);
    const std::size_t span = options.max_length - options.min_length + 1;
    const std::size_t length = options.min_length + static_cast<std::size_t>(rng.below(span));
    std::vector<std::size_t> glosses(length);
    for (auto& g : glosses) {
        g = static_cast<std::size_t>(rng.below(bank.vocab_size()));
    }
    return synth_render_sentence(bank, options, glosses, rng.derive_seed());
}

} // namespace mvst
