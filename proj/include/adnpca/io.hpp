#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace adnpca::io {

// Writes to a temporary sibling file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace adnpca::io
