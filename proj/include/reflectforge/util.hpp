#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace reflectforge {

std::string sha256_hex(std::string_view data);

std::string to_lower_ascii(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);

// Creates parent directories, writes to a temp file, then renames into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace reflectforge
