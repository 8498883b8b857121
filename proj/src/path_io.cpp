#include "wfl/path_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

#include "wfl/errors.hpp"

namespace wfl::io {

namespace {

std::ofstream open_out(const std::filesystem::path& file, bool binary = false) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file, binary ? std::ios::binary : std::ios::out);
  if (!os) throw ParameterError("cannot open " + file.string() + " for writing");
  return os;
}

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ParameterError("WFL1: truncated file");
  return v;
}

} // namespace

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& file, const ScalarPath& p) {
  auto os = open_out(file);
  os << "t,value\n";
  for (std::size_t k = 0; k < p.values.size(); ++k) os << fmt(p.time(k)) << ',' << fmt(p.values[k]) << '\n';
}

void write_csv(const std::filesystem::path& file, const FieldPath& p) {
  auto os = open_out(file);
  os << 't';
  for (std::size_t i = 0; i < p.M; ++i) os << ",coeff_" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k <= p.steps; ++k) {
    os << fmt(p.time(k));
    for (double c : p.row(k)) os << ',' << fmt(c);
    os << '\n';
  }
}

void write_csv(const std::filesystem::path& file, const Field& f) {
  auto os = open_out(file);
  os << "x,value\n";
  for (std::size_t j = 0; j < f.size(); ++j) os << fmt(f.grid().x(j)) << ',' << fmt(f[j]) << '\n';
}

void write_table(const std::filesystem::path& file, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  auto os = open_out(file);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
    os << '\n';
  }
}

void write_wfl1(const std::filesystem::path& file, const Wfl1& blob) {
  if (blob.data.size() != static_cast<std::size_t>(blob.rows) * blob.cols)
    throw ParameterError("WFL1: data size does not match rows*cols");
  auto os = open_out(file, true);
  os.write("WFL1", 4);
  put_le<std::uint32_t>(os, blob.rows);
  put_le<std::uint32_t>(os, blob.cols);
  put_le<double>(os, blob.extent);
  for (double v : blob.data) put_le<double>(os, v);
}

Wfl1 read_wfl1(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw ParameterError("cannot open " + file.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "WFL1", 4) != 0) throw ParameterError("WFL1: bad magic in " + file.string());
  Wfl1 b;
  b.rows = get_le<std::uint32_t>(is);
  b.cols = get_le<std::uint32_t>(is);
  b.extent = get_le<double>(is);
  b.data.resize(static_cast<std::size_t>(b.rows) * b.cols);
  for (double& v : b.data) v = get_le<double>(is);
  return b;
}

void write_wfl1(const std::filesystem::path& file, const ScalarPath& p) {
  write_wfl1(file, Wfl1{static_cast<std::uint32_t>(p.values.size()), 1u, p.T, p.values});
}

void write_wfl1(const std::filesystem::path& file, const FieldPath& p) {
  write_wfl1(file, Wfl1{static_cast<std::uint32_t>(p.steps + 1), static_cast<std::uint32_t>(p.M), p.T, p.coeffs});
}

} // namespace wfl::io
