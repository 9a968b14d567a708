#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mvst {

/// Small dense row-major matrix used for graph structure.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const DenseMatrix&) const = default;
};

struct JointGroup {
    std::string name;
    std::vector<std::size_t> joints;
};

/// Joint graph loaded from a layout file.
///
/// Text format, one directive per line, '#' starts a comment:
///   mvst-joint-layout 1
///   joints <V>
///   group <name> <first>-<last> | <j> ...
///   anchor neck <j>
///   anchor nose <j>
///   edge <i> <j>
struct JointLayout {
    std::size_t joint_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<JointGroup> groups;
    std::size_t neck = 0;
    std::size_t nose = 0;

    /// Index into `groups` for a joint, or groups.size() when ungrouped.
    std::size_t group_of(std::size_t joint) const;
    /// Throws ConfigError on out-of-range joints, self-loops or bad anchors.
    void validate() const;
};

inline constexpr int joint_layout_version = 1;

JointLayout parse_joint_layout(std::string_view text, const std::string& source = "<layout>");
JointLayout load_joint_layout(const std::string& path);
std::string format_joint_layout(const JointLayout& layout);

/// Path or complete graph helpers for tests and tools.
JointLayout make_layout(std::size_t joint_count, std::vector<std::pair<std::size_t, std::size_t>> edges);

inline constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

/// All-pairs hop counts by BFS from every joint; `unreachable` where disconnected.
std::vector<std::vector<std::size_t>> shortest_path_distances(const JointLayout& layout);

/// Hop-distance-k connectivity plus self-loops: A_k + I.
struct ScaleAdjacency {
    std::size_t k = 1;
    DenseMatrix matrix;
};

ScaleAdjacency build_scale_adjacency(const JointLayout& layout, std::size_t k);
ScaleAdjacency build_scale_adjacency(const std::vector<std::vector<std::size_t>>& distances, std::size_t k);

/// m x m block tiling of a scale adjacency, and (after sym_normalize) its
/// D^-1/2 A D^-1/2 normalization. Node index of joint i in frame a is a*V + i.
struct BlockAdjacency {
    std::size_t k = 1;
    std::size_t frames = 1;
    std::size_t joints = 0;
    DenseMatrix tiled;
    DenseMatrix normalized;
};

BlockAdjacency tile_block(const ScaleAdjacency& adj, std::size_t frames);
BlockAdjacency sym_normalize(BlockAdjacency block);

/// D^-1/2 A D^-1/2 of a V x V adjacency. Throws NumericError on a zero-degree row.
DenseMatrix sym_normalize_matrix(const DenseMatrix& adjacency);

} // namespace mvst
