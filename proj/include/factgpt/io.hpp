#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace factgpt {

// Throws Error{IoError}.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

void append_file(const std::filesystem::path& path, std::string_view content);

// RFC 3339 UTC with second precision, e.g. "2024-03-01T12:00:00Z".
std::string utc_timestamp(std::chrono::system_clock::time_point t);

// Source of record timestamps. Tests and reproducible runs pin it.
using Clock = std::function<std::string()>;

Clock system_clock_source();
Clock fixed_clock_source(std::string timestamp);

}  // namespace factgpt
