#pragma once

#include <filesystem>
#include <string>

namespace vsense {

// Formats a double with 17 significant digits, enough to round-trip exactly.
std::string fmt17(double v);

// Writes to a sibling temp file and renames into place, so a crash or error
// never leaves a partial file at the final path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace vsense
