#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wfl/noise.hpp"
#include "wfl/operator.hpp"

namespace wfl::io {

/// Shortest round-trip decimal form, locale-independent.
std::string fmt(double v);

void write_csv(const std::filesystem::path& file, const ScalarPath& p);  // t,value
void write_csv(const std::filesystem::path& file, const FieldPath& p);   // t,coeff_1..coeff_M
void write_csv(const std::filesystem::path& file, const Field& f);       // x,value

/// Generic CSV with a header row.
void write_table(const std::filesystem::path& file, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

// WFL1 container, little-endian:
//   char[4] "WFL1", u32 rows, u32 cols, f64 extent, rows*cols f64 row-major.
// For paths, rows = steps+1, cols = 1 or M, extent = T.
// For field snapshots, rows = number of snapshots, cols = grid n, extent = final time.
struct Wfl1 {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  double extent = 0.0;
  std::vector<double> data;
};

void write_wfl1(const std::filesystem::path& file, const Wfl1& blob);
Wfl1 read_wfl1(const std::filesystem::path& file);

void write_wfl1(const std::filesystem::path& file, const ScalarPath& p);
void write_wfl1(const std::filesystem::path& file, const FieldPath& p);

} // namespace wfl::io
