#pragma once

// Output formats: CSV tables, JSON documents and a versioned text format for
// dense complex matrices.
//
// Matrix text format, version 1:
//   line 1: "lagspec-matrix v1"
//   line 2: "<rows> <cols>"
//   then one line per row: re im re im ... (2*cols shortest round-trip doubles)

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "lagspec/linalg.hpp"

namespace lagspec {

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string render() const;
};

// Small helpers for building rows.
inline std::string cell(double v) { return format_double(v); }
std::string cell(long long v);
inline std::string cell(int v) { return cell(static_cast<long long>(v)); }
inline std::string cell(long v) { return cell(static_cast<long long>(v)); }
std::string cell(unsigned long long v);
inline std::string cell(unsigned long v) { return cell(static_cast<unsigned long long>(v)); }
inline std::string cell(bool v) { return v ? "1" : "0"; }

// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::filesystem::path write_csv(const std::filesystem::path& dir, const CsvTable& table);
std::filesystem::path write_json(const std::filesystem::path& path, const nlohmann::json& doc);

inline constexpr const char* kMatrixFormatTag = "lagspec-matrix v1";

void write_matrix(std::ostream& out, const ComplexMatrix& m);
ComplexMatrix read_matrix(std::istream& in);

}  // namespace lagspec
