#include "mvst/sequence.hpp"

#include "mvst/binary_io.hpp"
#include "mvst/error.hpp"
#include "mvst/log.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>

namespace mvst {

std::vector<ClipWindow> window_schedule(std::size_t frame_count, std::size_t m, std::size_t stride)
{
    if (m < 1) {
        throw ConfigError("window length must be at least 1");
    }
    if (stride < 1 || stride > m) {
        throw ConfigError("window stride must lie in [1, " + std::to_string(m) + "], got "
                          + std::to_string(stride));
    }
    if (frame_count == 0) {
        throw DataError(DataError::Kind::shape_mismatch, "sliding window over an empty sequence");
    }
    auto make = [&](std::size_t start) {
        ClipWindow w{start, {}};
        for (std::size_t i = 0; i < m; ++i) {
            w.frames.push_back(std::min(start + i, frame_count - 1));
        }
        return w;
    };
    std::vector<ClipWindow> windows;
    if (frame_count < m) {
        windows.push_back(make(0));
        return windows;
    }
    std::size_t start = 0;
    for (; start + m <= frame_count; start += stride) {
        windows.push_back(make(start));
    }
    if (windows.back().start + m < frame_count) {
        windows.push_back(make(start));
    }
    return windows;
}

std::vector<SkeletonClip> sliding_window(const SkeletonSequence& seq, std::size_t m, std::size_t stride)
{
    std::vector<SkeletonClip> clips;
    for (auto& w : window_schedule(seq.frames, m, stride)) {
        SkeletonSequence frames(m, seq.joints);
        for (std::size_t i = 0; i < m; ++i) {
            auto src = seq.coords.begin() + static_cast<std::ptrdiff_t>(w.frames[i] * seq.joints * 2);
            std::copy_n(src, seq.joints * 2, frames.coords.begin() + static_cast<std::ptrdiff_t>(i * seq.joints * 2));
        }
        clips.push_back({std::move(w), std::move(frames)});
    }
    return clips;
}

std::vector<RgbClip> sliding_window(const RgbSequence& seq, std::size_t m, std::size_t stride)
{
    std::vector<RgbClip> clips;
    const std::size_t fs = seq.frame_size();
    for (auto& w : window_schedule(seq.frames, m, stride)) {
        RgbSequence frames(m, seq.height, seq.width);
        for (std::size_t i = 0; i < m; ++i) {
            std::copy_n(seq.pixels.begin() + static_cast<std::ptrdiff_t>(w.frames[i] * fs), fs,
                        frames.pixels.begin() + static_cast<std::ptrdiff_t>(i * fs));
        }
        clips.push_back({std::move(w), std::move(frames)});
    }
    return clips;
}

SkeletonSequence normalize_skeleton(const SkeletonSequence& seq, const JointLayout& layout)
{
    if (seq.frames == 0) {
        throw DataError(DataError::Kind::shape_mismatch, "normalize_skeleton: empty sequence");
    }
    if (seq.joints != layout.joint_count) {
        throw DataError(DataError::Kind::shape_mismatch,
                        "normalize_skeleton: sequence has " + std::to_string(seq.joints)
                            + " joints, layout has " + std::to_string(layout.joint_count));
    }
    const double ox = seq.x(0, layout.neck);
    const double oy = seq.y(0, layout.neck);
    const double dist = std::hypot(seq.x(0, layout.nose) - ox, seq.y(0, layout.nose) - oy);
    double inv_scale = 1.0;
    if (dist > 1e-12 && std::isfinite(dist)) {
        inv_scale = 1.0 / dist;
    } else {
        log_warning("normalize_skeleton: degenerate neck-nose distance, using unit scale");
    }
    SkeletonSequence out = seq;
    for (std::size_t i = 0; i < out.coords.size(); i += 2) {
        out.coords[i] = (seq.coords[i] - ox) * inv_scale;
        out.coords[i + 1] = (seq.coords[i + 1] - oy) * inv_scale;
    }
    return out;
}

namespace {

constexpr std::string_view skeleton_magic = "MVSK";
constexpr std::string_view rgb_magic = "MVRG";

void check_header(binio::Reader& r, std::string_view magic, std::uint32_t expected_version,
                  const char* what)
{
    if (r.bytes(magic.size()) != magic) {
        throw DataError(DataError::Kind::bad_format, r.source() + ": not a " + what + " file");
    }
    auto version = r.u32();
    if (version != expected_version) {
        throw DataError(DataError::Kind::version_mismatch,
                        r.source() + ": " + what + " file version " + std::to_string(version)
                            + ", expected " + std::to_string(expected_version));
    }
}

} // namespace

std::vector<char> encode_skeleton(const SkeletonSequence& seq, ValueWidth width)
{
    binio::Writer w;
    w.bytes(skeleton_magic);
    w.u32(skeleton_file_version);
    w.u32(static_cast<std::uint32_t>(seq.frames));
    w.u32(static_cast<std::uint32_t>(seq.joints));
    w.u32(2);
    w.u32(static_cast<std::uint32_t>(width));
    for (double v : seq.coords) {
        if (width == ValueWidth::f32) {
            w.f32(static_cast<float>(v));
        } else {
            w.f64(v);
        }
    }
    return w.buffer();
}

SkeletonSequence decode_skeleton(const std::vector<char>& bytes, const std::string& source)
{
    binio::Reader r(bytes, source);
    check_header(r, skeleton_magic, skeleton_file_version, "skeleton");
    auto frames = r.u32();
    auto joints = r.u32();
    auto channels = r.u32();
    auto width = r.u32();
    if (channels != 2) {
        throw DataError(DataError::Kind::shape_mismatch,
                        source + ": expected 2 coordinate channels, got " + std::to_string(channels));
    }
    if (width != 4 && width != 8) {
        throw DataError(DataError::Kind::bad_format,
                        source + ": unsupported value width " + std::to_string(width));
    }
    SkeletonSequence seq(frames, joints);
    r.need(seq.coords.size() * width);
    for (auto& v : seq.coords) {
        v = width == 4 ? static_cast<double>(r.f32()) : r.f64();
        if (std::isnan(v)) {
            throw DataError(DataError::Kind::bad_format, source + ": NaN coordinate");
        }
    }
    if (!r.at_end()) {
        throw DataError(DataError::Kind::bad_format, source + ": trailing bytes after payload");
    }
    return seq;
}

void save_skeleton(const std::string& path, const SkeletonSequence& seq, ValueWidth width)
{
    binio::write_file(path, encode_skeleton(seq, width));
}

SkeletonSequence load_skeleton(const std::string& path)
{
    return decode_skeleton(binio::read_file(path), path);
}

void save_skeleton_json(const std::string& path, const SkeletonSequence& seq)
{
    nlohmann::json frames = nlohmann::json::array();
    for (std::size_t t = 0; t < seq.frames; ++t) {
        nlohmann::json joints = nlohmann::json::array();
        for (std::size_t j = 0; j < seq.joints; ++j) {
            joints.push_back({seq.x(t, j), seq.y(t, j)});
        }
        frames.push_back(std::move(joints));
    }
    nlohmann::json doc = {{"version", skeleton_file_version},
                          {"frames", seq.frames},
                          {"joints", seq.joints},
                          {"channels", 2},
                          {"coords", std::move(frames)}};
    std::ofstream out(path);
    if (!out) {
        throw DataError(DataError::Kind::missing_file, "cannot write file: " + path);
    }
    out << doc.dump(1) << '\n';
}

std::vector<char> encode_rgb(const RgbSequence& seq)
{
    binio::Writer w;
    w.bytes(rgb_magic);
    w.u32(rgb_file_version);
    w.u32(static_cast<std::uint32_t>(seq.frames));
    w.u32(static_cast<std::uint32_t>(seq.height));
    w.u32(static_cast<std::uint32_t>(seq.width));
    w.u32(RgbSequence::channels);
    for (auto p : seq.pixels) {
        w.u8(p);
    }
    return w.buffer();
}

RgbSequence decode_rgb(const std::vector<char>& bytes, const std::string& source)
{
    binio::Reader r(bytes, source);
    check_header(r, rgb_magic, rgb_file_version, "rgb");
    auto frames = r.u32();
    auto height = r.u32();
    auto width = r.u32();
    auto channels = r.u32();
    if (channels != RgbSequence::channels) {
        throw DataError(DataError::Kind::shape_mismatch,
                        source + ": expected 3 channels, got " + std::to_string(channels));
    }
    RgbSequence seq(frames, height, width);
    r.need(seq.pixels.size());
    for (auto& p : seq.pixels) {
        p = r.u8();
    }
    if (!r.at_end()) {
        throw DataError(DataError::Kind::bad_format, source + ": trailing bytes after payload");
    }
    return seq;
}

void save_rgb(const std::string& path, const RgbSequence& seq)
{
    binio::write_file(path, encode_rgb(seq));
}

RgbSequence load_rgb(const std::string& path)
{
    return decode_rgb(binio::read_file(path), path);
}

} // namespace mvst
