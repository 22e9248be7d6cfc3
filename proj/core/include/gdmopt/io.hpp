#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gdmopt {

// Writes `contents` to a sibling temp file, then renames it over `path`, so
// readers observe either the old file or the complete new one.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace gdmopt
