#include "mvst/binary_io.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

namespace mvst::binio {

std::vector<char> read_file(const std::string& path)
{
    if (!std::filesystem::exists(path)) {
        throw DataError(DataError::Kind::missing_file, "missing file: " + path);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(DataError::Kind::missing_file, "cannot open file: " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<char>& data)
{
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError(DataError::Kind::missing_file, "cannot write file: " + path);
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw DataError(DataError::Kind::bad_format, "write failed: " + path);
    }
}

} // namespace mvst::binio
