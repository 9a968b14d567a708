#include "mvst/skeleton_graph.hpp"

#include "mvst/binary_io.hpp"
#include "mvst/error.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace mvst {

std::size_t JointLayout::group_of(std::size_t joint) const
{
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (auto j : groups[g].joints) {
            if (j == joint) {
                return g;
            }
        }
    }
    return groups.size();
}

void JointLayout::validate() const
{
    if (joint_count == 0) {
        throw ConfigError("joint layout: joint count must be positive");
    }
    for (auto [a, b] : edges) {
        if (a >= joint_count || b >= joint_count) {
            throw ConfigError("joint layout: edge " + std::to_string(a) + "-" + std::to_string(b)
                              + " references a joint outside [0, " + std::to_string(joint_count) + ")");
        }
        if (a == b) {
            throw ConfigError("joint layout: self-loop on joint " + std::to_string(a));
        }
    }
    for (const auto& g : groups) {
        for (auto j : g.joints) {
            if (j >= joint_count) {
                throw ConfigError("joint layout: group '" + g.name + "' references joint "
                                  + std::to_string(j));
            }
        }
    }
    if (neck >= joint_count || nose >= joint_count) {
        throw ConfigError("joint layout: anchor joint out of range");
    }
}

JointLayout make_layout(std::size_t joint_count, std::vector<std::pair<std::size_t, std::size_t>> edges)
{
    JointLayout layout;
    layout.joint_count = joint_count;
    layout.edges = std::move(edges);
    layout.neck = 0;
    layout.nose = joint_count > 1 ? 1 : 0;
    layout.validate();
    return layout;
}

JointLayout parse_joint_layout(std::string_view text, const std::string& source)
{
    JointLayout layout;
    bool have_header = false;
    bool have_count = false;
    bool have_neck = false;
    bool have_nose = false;

    std::istringstream lines{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        throw DataError(DataError::Kind::bad_format,
                        source + ":" + std::to_string(line_no) + ": " + why);
    };
    auto parse_index = [&](const std::string& tok) -> std::size_t {
        try {
            std::size_t pos = 0;
            auto v = std::stoull(tok, &pos);
            if (pos != tok.size()) {
                fail("bad joint index '" + tok + "'");
            }
            return static_cast<std::size_t>(v);
        } catch (const std::logic_error&) {
            fail("bad joint index '" + tok + "'");
        }
        return 0;
    };

    while (std::getline(lines, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream words(line);
        std::string head;
        if (!(words >> head)) {
            continue;
        }
        if (!have_header) {
            int version = 0;
            if (head != "mvst-joint-layout" || !(words >> version)) {
                fail("missing 'mvst-joint-layout <version>' header");
            }
            if (version != joint_layout_version) {
                throw DataError(DataError::Kind::version_mismatch,
                                source + ": joint layout version " + std::to_string(version)
                                    + ", expected " + std::to_string(joint_layout_version));
            }
            have_header = true;
            continue;
        }
        std::vector<std::string> args;
        for (std::string w; words >> w;) {
            args.push_back(w);
        }
        if (head == "joints") {
            if (args.size() != 1) {
                fail("'joints' takes one count");
            }
            layout.joint_count = parse_index(args[0]);
            have_count = true;
        } else if (head == "group") {
            if (args.size() < 2) {
                fail("'group' needs a name and joints");
            }
            JointGroup g{args[0], {}};
            for (std::size_t i = 1; i < args.size(); ++i) {
                if (auto dash = args[i].find('-'); dash != std::string::npos) {
                    auto lo = parse_index(args[i].substr(0, dash));
                    auto hi = parse_index(args[i].substr(dash + 1));
                    if (hi < lo) {
                        fail("empty joint range '" + args[i] + "'");
                    }
                    for (auto j = lo; j <= hi; ++j) {
                        g.joints.push_back(j);
                    }
                } else {
                    g.joints.push_back(parse_index(args[i]));
                }
            }
            layout.groups.push_back(std::move(g));
        } else if (head == "anchor") {
            if (args.size() != 2) {
                fail("'anchor' takes a role and a joint");
            }
            if (args[0] == "neck") {
                layout.neck = parse_index(args[1]);
                have_neck = true;
            } else if (args[0] == "nose") {
                layout.nose = parse_index(args[1]);
                have_nose = true;
            } else {
                fail("unknown anchor role '" + args[0] + "'");
            }
        } else if (head == "edge") {
            if (args.size() != 2) {
                fail("'edge' takes two joints");
            }
            layout.edges.emplace_back(parse_index(args[0]), parse_index(args[1]));
        } else {
            fail("unknown directive '" + head + "'");
        }
    }
    if (!have_header || !have_count) {
        throw DataError(DataError::Kind::bad_format, source + ": missing header or joint count");
    }
    if (!have_neck || !have_nose) {
        throw DataError(DataError::Kind::bad_format, source + ": neck and nose anchors are required");
    }
    try {
        layout.validate();
    } catch (const ConfigError& e) {
        throw DataError(DataError::Kind::bad_format, source + ": " + e.what());
    }
    return layout;
}

JointLayout load_joint_layout(const std::string& path)
{
    auto bytes = binio::read_file(path);
    return parse_joint_layout(std::string_view(bytes.data(), bytes.size()), path);
}

std::string format_joint_layout(const JointLayout& layout)
{
    std::ostringstream out;
    out << "mvst-joint-layout " << joint_layout_version << '\n';
    out << "joints " << layout.joint_count << '\n';
    for (const auto& g : layout.groups) {
        out << "group " << g.name;
        for (auto j : g.joints) {
            out << ' ' << j;
        }
        out << '\n';
    }
    out << "anchor neck " << layout.neck << '\n';
    out << "anchor nose " << layout.nose << '\n';
    for (auto [a, b] : layout.edges) {
        out << "edge " << a << ' ' << b << '\n';
    }
    return out.str();
}

std::vector<std::vector<std::size_t>> shortest_path_distances(const JointLayout& layout)
{
    const std::size_t n = layout.joint_count;
    std::vector<std::vector<std::size_t>> neighbours(n);
    for (auto [a, b] : layout.edges) {
        neighbours[a].push_back(b);
        neighbours[b].push_back(a);
    }
    std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, unreachable));
    for (std::size_t src = 0; src < n; ++src) {
        auto& row = dist[src];
        row[src] = 0;
        std::deque<std::size_t> queue{src};
        while (!queue.empty()) {
            auto u = queue.front();
            queue.pop_front();
            for (auto v : neighbours[u]) {
                if (row[v] == unreachable) {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return dist;
}

ScaleAdjacency build_scale_adjacency(const std::vector<std::vector<std::size_t>>& distances, std::size_t k)
{
    if (k < 1) {
        throw ConfigError("scale k must be at least 1");
    }
    const std::size_t n = distances.size();
    ScaleAdjacency adj{k, DenseMatrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || distances[i][j] == k) {
                adj.matrix(i, j) = 1.0;
            }
        }
    }
    return adj;
}

ScaleAdjacency build_scale_adjacency(const JointLayout& layout, std::size_t k)
{
    return build_scale_adjacency(shortest_path_distances(layout), k);
}

BlockAdjacency tile_block(const ScaleAdjacency& adj, std::size_t frames)
{
    if (frames < 1) {
        throw ConfigError("block tiling needs at least one frame");
    }
    const std::size_t v = adj.matrix.rows;
    BlockAdjacency block;
    block.k = adj.k;
    block.frames = frames;
    block.joints = v;
    block.tiled = DenseMatrix(frames * v, frames * v);
    for (std::size_t a = 0; a < frames; ++a) {
        for (std::size_t b = 0; b < frames; ++b) {
            for (std::size_t i = 0; i < v; ++i) {
                for (std::size_t j = 0; j < v; ++j) {
                    block.tiled(a * v + i, b * v + j) = adj.matrix(i, j);
                }
            }
        }
    }
    return block;
}

DenseMatrix sym_normalize_matrix(const DenseMatrix& adjacency)
{
    const std::size_t n = adjacency.rows;
    std::vector<double> degree(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < adjacency.cols; ++j) {
            degree[i] += adjacency(i, j);
        }
        if (degree[i] <= 0.0) {
            throw NumericError("sym_normalize: row " + std::to_string(i) + " has zero degree");
        }
    }
    DenseMatrix out(n, adjacency.cols);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < adjacency.cols; ++j) {
            out(i, j) = adjacency(i, j) / std::sqrt(degree[i] * degree[j]);
        }
    }
    return out;
}

BlockAdjacency sym_normalize(BlockAdjacency block)
{
    block.normalized = sym_normalize_matrix(block.tiled);
    return block;
}

} // namespace mvst
