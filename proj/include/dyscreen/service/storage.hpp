#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dyscreen::service {

/// Appends `line` plus a newline with O_APPEND and fsyncs before returning.
void append_line_durable(const std::filesystem::path& path, std::string_view line);

/// Writes to a temporary sibling, fsyncs, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Splits a JSON-lines file. A final line without a trailing newline is reported through
/// `truncated_tail` instead of being returned, since it may be a torn write.
std::vector<std::string> read_lines(const std::filesystem::path& path, std::string* truncated_tail = nullptr);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// `bytes` bytes from the OS entropy source, hex encoded.
std::string random_hex(std::size_t bytes);

}  // namespace dyscreen::service
