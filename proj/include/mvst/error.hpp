#pragma once

#include <stdexcept>
#include <string>

namespace mvst {

/// Shape or extent disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid run configuration or argument value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unreadable, missing, truncated or inconsistent data on disk.
class DataError : public std::runtime_error {
public:
    enum class Kind { missing_file, truncated, version_mismatch, bad_format, shape_mismatch };

    DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Non-finite values or broken numeric invariants during compute.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mvst
