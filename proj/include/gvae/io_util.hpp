#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gvae {

// Shortest round-trip decimal representation of a double (std::to_chars),
// locale-independent and deterministic.
std::string format_double(double v);

// Strict double parse of the full token; throws DataError otherwise.
double parse_double(const std::string& token, const std::string& context);

// Writes content to path via a temp file in the same directory plus rename,
// so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Splits one CSV line on commas. No quoting; fields must not contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

// Reads a whole file; throws DataError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace gvae
