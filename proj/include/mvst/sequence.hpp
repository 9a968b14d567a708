#pragma once

#include "mvst/skeleton_graph.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mvst {

/// T frames of V two-dimensional joint coordinates, stored [t][j][xy].
struct SkeletonSequence {
    std::size_t frames = 0;
    std::size_t joints = 0;
    std::vector<double> coords;

    SkeletonSequence() = default;
    SkeletonSequence(std::size_t t, std::size_t v) : frames(t), joints(v), coords(t * v * 2, 0.0) {}

    double& x(std::size_t t, std::size_t j) { return coords[(t * joints + j) * 2]; }
    double& y(std::size_t t, std::size_t j) { return coords[(t * joints + j) * 2 + 1]; }
    double x(std::size_t t, std::size_t j) const { return coords[(t * joints + j) * 2]; }
    double y(std::size_t t, std::size_t j) const { return coords[(t * joints + j) * 2 + 1]; }

    bool operator==(const SkeletonSequence&) const = default;
};

/// T frames of H x W RGB images, 8-bit, stored [t][y][x][c]. Intensity k
/// represents k / 255 in [0, 1].
struct RgbSequence {
    std::size_t frames = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;

    static constexpr std::size_t channels = 3;

    RgbSequence() = default;
    RgbSequence(std::size_t t, std::size_t h, std::size_t w)
        : frames(t), height(h), width(w), pixels(t * h * w * channels, 0) {}

    std::size_t frame_size() const { return height * width * channels; }
    double value(std::size_t t, std::size_t row, std::size_t col, std::size_t c) const
    {
        return pixels[((t * height + row) * width + col) * channels + c] / 255.0;
    }

    bool operator==(const RgbSequence&) const = default;
};

/// One sliding-window position: frame indices into the parent sequence,
/// with the last frame repeated where the window runs past the end.
struct ClipWindow {
    std::size_t start = 0;
    std::vector<std::size_t> frames;
};

/// Windows start at 0, stride, 2*stride, ... When T < m a single window is
/// padded by repeating the last frame; trailing frames not reached by a full
/// window get one extra padded window.
std::vector<ClipWindow> window_schedule(std::size_t frame_count, std::size_t m, std::size_t stride);

struct SkeletonClip {
    ClipWindow window;
    SkeletonSequence frames;
};

struct RgbClip {
    ClipWindow window;
    RgbSequence frames;
};

std::vector<SkeletonClip> sliding_window(const SkeletonSequence& seq, std::size_t m, std::size_t stride);
std::vector<RgbClip> sliding_window(const RgbSequence& seq, std::size_t m, std::size_t stride);

/// Translate so frame 0's neck is the origin and scale so frame 0's
/// neck-to-nose distance is 1, applying one transform to every frame.
/// A degenerate reference distance falls back to unit scale with a warning.
SkeletonSequence normalize_skeleton(const SkeletonSequence& seq, const JointLayout& layout);

// Skeleton file: magic "MVSK", u32 version, u32 T, u32 V, u32 C,
// u32 bytes-per-value (4 or 8), then T*V*C little-endian floats.
inline constexpr std::uint32_t skeleton_file_version = 1;

enum class ValueWidth : std::uint32_t { f32 = 4, f64 = 8 };

std::vector<char> encode_skeleton(const SkeletonSequence& seq, ValueWidth width = ValueWidth::f32);
SkeletonSequence decode_skeleton(const std::vector<char>& bytes, const std::string& source);
void save_skeleton(const std::string& path, const SkeletonSequence& seq,
                   ValueWidth width = ValueWidth::f32);
SkeletonSequence load_skeleton(const std::string& path);
/// Debug mirror of a skeleton file as JSON.
void save_skeleton_json(const std::string& path, const SkeletonSequence& seq);

// RGB file: magic "MVRG", u32 version, u32 T, u32 H, u32 W, u32 C (=3),
// then T*H*W*C bytes, frame-major, interleaved channels.
inline constexpr std::uint32_t rgb_file_version = 1;

std::vector<char> encode_rgb(const RgbSequence& seq);
RgbSequence decode_rgb(const std::vector<char>& bytes, const std::string& source);
void save_rgb(const std::string& path, const RgbSequence& seq);
RgbSequence load_rgb(const std::string& path);

} // namespace mvst
