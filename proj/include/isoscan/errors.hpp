#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isoscan {

/// Bad scenario/config/grid content. Maps to exit code 2 in the CLI.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Corrupt or truncated file input. Carries the byte offset of the failure.
/// Maps to exit code 3 in the CLI.
class decode_error : public std::runtime_error {
public:
    decode_error(const std::string& msg, std::size_t byte_offset)
        : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

/// Sensor/region association failure. Maps to exit code 4 in the CLI.
class analysis_error : public std::runtime_error {
public:
    explicit analysis_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace isoscan
