#pragma once

#include <string>
#include <vector>

namespace vibrosheet {

// All CSV output goes through this: 6 significant digits, locale-free,
// so identical inputs always produce identical bytes.
std::string format_num(double x);

// Splits one CSV line on commas. No quoting support; none of our formats
// need it.
std::vector<std::string> split_csv_line(const std::string& line);

double parse_double(const std::string& field, int line_no);

// Writes `text` to `path` via a temp file + rename.
void write_file_atomic(const std::string& path, const std::string& text);

std::string read_file(const std::string& path);

// FNV-1a 64-bit over a string, hex-encoded.
std::string fnv1a_hex(const std::string& data);

}  // namespace vibrosheet
