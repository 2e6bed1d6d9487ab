#pragma once

#include "prawn/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace prawn::io {

// Little-endian primitives shared by the binary matrix/model formats.
void write_u32(std::ostream& out, std::uint32_t value);
void write_f32(std::ostream& out, float value);
void write_f64(std::ostream& out, double value);
std::uint32_t read_u32(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);
void write_magic(std::ostream& out, const char magic[4]);
void expect_magic(std::istream& in, const char magic[4], const char* what);

// "GREM" feature/embedding matrix: magic, u32 rows, u32 cols,
// little-endian f32 row-major.
void write_matrix(std::ostream& out, const Mat& matrix);
Mat read_matrix(std::istream& in);
void write_matrix_file(const std::string& path, const Mat& matrix);
Mat read_matrix_file(const std::string& path);

// Minimal CSV line splitting; fields here never contain commas.
std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::string> read_lines(const std::string& path);

} // namespace prawn::io
