#include "lagspec/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "lagspec/errors.hpp"

namespace lagspec {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc{}) throw IoError("format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

std::string cell(long long v) { return std::to_string(v); }
std::string cell(unsigned long long v) { return std::to_string(v); }

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw DomainError("CsvTable " + name + ": row has " + std::to_string(row.size()) +
                      " cells, header has " + std::to_string(header.size()));
  }
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::filesystem::path write_csv(const std::filesystem::path& dir, const CsvTable& table) {
  const auto path = dir / (table.name + ".csv");
  write_file_atomic(path, table.render());
  return path;
}

std::filesystem::path write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
  return path;
}

void write_matrix(std::ostream& out, const ComplexMatrix& m) {
  out << kMatrixFormatTag << '\n' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j).real()) << ' ' << format_double(m(i, j).imag());
    }
    out << '\n';
  }
}

ComplexMatrix read_matrix(std::istream& in) {
  std::string tag;
  if (!std::getline(in, tag) || tag != kMatrixFormatTag) {
    throw IoError("read_matrix: missing '" + std::string(kMatrixFormatTag) + "' header");
  }
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1) {
    throw IoError("read_matrix: bad dimension line");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string re, im;
      if (!(in >> re >> im)) throw IoError("read_matrix: truncated data");
      double vr = 0, vi = 0;
      const auto r1 = std::from_chars(re.data(), re.data() + re.size(), vr);
      const auto r2 = std::from_chars(im.data(), im.data() + im.size(), vi);
      if (r1.ec != std::errc{} || r2.ec != std::errc{}) {
        throw IoError("read_matrix: unparsable entry at (" + std::to_string(i) + ", " +
                      std::to_string(j) + ")");
      }
      m(i, j) = Complex{vr, vi};
    }
  }
  return m;
}

}  // namespace lagspec
