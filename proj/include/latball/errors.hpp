#pragma once

#include <stdexcept>
#include <string>

namespace latball {

// Numeric failure surfaced to the CLI as exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed run description surfaced to the CLI as exit code 2.
struct ManifestError : std::runtime_error {
    explicit ManifestError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace latball
