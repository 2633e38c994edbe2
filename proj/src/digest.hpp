#pragma once

#include <string>

namespace clirforge {

/// Hex SHA-256 of a file's bytes; throws Error when the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace clirforge
