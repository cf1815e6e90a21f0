#pragma once

// Reader and writer for 2-D float arrays in the NumPy ".npy" format,
// version 1.0. Only little-endian float32/float64 in C order is accepted.

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "error.hpp"

namespace phonedyn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace npy {

static_assert(std::endian::native == std::endian::little,
              "npy I/O assumes a little-endian host");

inline constexpr std::string_view kMagic = "\x93NUMPY";

struct Header {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
  std::size_t data_offset = 0;  // bytes from start of file
};

namespace detail {

inline void skip_space(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

// Finds `'key':` in the header dict and returns the position right after it.
inline std::size_t find_key(std::string_view dict, std::string_view key) {
  for (const char quote : {'\'', '"'}) {
    std::string needle;
    needle += quote;
    needle += key;
    needle += quote;
    auto pos = dict.find(needle);
    if (pos == std::string_view::npos) continue;
    pos += needle.size();
    skip_space(dict, pos);
    if (pos >= dict.size() || dict[pos] != ':') break;
    ++pos;
    skip_space(dict, pos);
    return pos;
  }
  throw FormatError("npy header is missing key '" + std::string(key) + "'");
}

inline Header parse_dict(std::string_view dict) {
  Header h;

  auto pos = find_key(dict, "descr");
  if (pos >= dict.size() || (dict[pos] != '\'' && dict[pos] != '"'))
    throw FormatError("npy header: malformed descr");
  const char quote = dict[pos];
  const auto end = dict.find(quote, pos + 1);
  if (end == std::string_view::npos) throw FormatError("npy header: unterminated descr");
  h.descr = std::string(dict.substr(pos + 1, end - pos - 1));

  pos = find_key(dict, "fortran_order");
  if (dict.substr(pos, 4) == "True") {
    h.fortran_order = true;
  } else if (dict.substr(pos, 5) == "False") {
    h.fortran_order = false;
  } else {
    throw FormatError("npy header: malformed fortran_order");
  }

  pos = find_key(dict, "shape");
  if (pos >= dict.size() || dict[pos] != '(') throw FormatError("npy header: malformed shape");
  const auto close = dict.find(')', pos);
  if (close == std::string_view::npos) throw FormatError("npy header: unterminated shape");
  std::string_view tuple = dict.substr(pos + 1, close - pos - 1);
  std::size_t i = 0;
  while (i < tuple.size()) {
    skip_space(tuple, i);
    if (i >= tuple.size()) break;
    if (!std::isdigit(static_cast<unsigned char>(tuple[i])))
      throw FormatError("npy header: malformed shape entry");
    std::size_t value = 0;
    while (i < tuple.size() && std::isdigit(static_cast<unsigned char>(tuple[i]))) {
      value = value * 10 + static_cast<std::size_t>(tuple[i] - '0');
      ++i;
    }
    h.shape.push_back(value);
    skip_space(tuple, i);
    if (i < tuple.size() && tuple[i] == ',') ++i;
  }
  return h;
}

}  // namespace detail

/// Reads and validates the preamble; leaves the stream at the data start.
inline Header read_header(std::istream& in) {
  std::array<char, 10> pre{};
  if (!in.read(pre.data(), pre.size())) throw FormatError("npy: file too short for header");
  if (std::string_view(pre.data(), kMagic.size()) != kMagic) throw FormatError("npy: bad magic string");
  const auto major = static_cast<unsigned char>(pre[6]);
  const auto minor = static_cast<unsigned char>(pre[7]);
  if (major != 1 || minor != 0)
    throw FormatError("npy: unsupported format version " + std::to_string(major) + "." +
                      std::to_string(minor) + " (expected 1.0)");
  const std::size_t header_len =
      static_cast<unsigned char>(pre[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(pre[9])) << 8);
  std::string dict(header_len, '\0');
  if (!in.read(dict.data(), static_cast<std::streamsize>(header_len)))
    throw FormatError("npy: truncated header");
  Header h = detail::parse_dict(dict);
  h.data_offset = pre.size() + header_len;
  return h;
}

inline Header read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open npy file: " + path.string());
  return read_header(in);
}

/// Element size for an accepted descr, or 0 when unsupported.
inline std::size_t float_width(std::string_view descr) {
  if (descr == "<f8" || descr == "=f8") return 8;
  if (descr == "<f4" || descr == "=f4") return 4;
  return 0;
}

/// Loads a 2-D float array, widening to double.
inline RowMatrix read_matrix(std::istream& in, const std::string& what = "npy") {
  const Header h = read_header(in);
  if (h.shape.size() != 2)
    throw DimensionError(what + ": expected a 2-D array, got " + std::to_string(h.shape.size()) +
                         "-D");
  const std::size_t width = float_width(h.descr);
  if (width == 0) throw FormatError(what + ": unsupported element type '" + h.descr + "'");
  if (h.fortran_order) throw FormatError(what + ": fortran_order arrays are not supported");

  const auto rows = static_cast<Eigen::Index>(h.shape[0]);
  const auto cols = static_cast<Eigen::Index>(h.shape[1]);
  RowMatrix m(rows, cols);
  const std::size_t count = h.shape[0] * h.shape[1];
  if (width == 8) {
    if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(count * 8)))
      throw FormatError(what + ": truncated data section");
  } else {
    std::vector<float> buf(count);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * 4)))
      throw FormatError(what + ": truncated data section");
    for (std::size_t i = 0; i < count; ++i) m.data()[i] = static_cast<double>(buf[i]);
  }
  return m;
}

inline RowMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open npy file: " + path.string());
  return read_matrix(in, path.string());
}

/// Writes a float64 C-order array. The preamble is padded so the data
/// starts on a 64-byte boundary, as numpy does.
inline void write_matrix(std::ostream& out, const RowMatrix& m) {
  std::ostringstream dict;
  dict << "{'descr': '<f8', 'fortran_order': False, 'shape': (" << m.rows() << ", " << m.cols()
       << "), }";
  std::string header = dict.str();
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  const char version[2] = {1, 0};
  out.write(version, 2);
  const char len[2] = {static_cast<char>(header.size() & 0xff),
                       static_cast<char>((header.size() >> 8) & 0xff)};
  out.write(len, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

inline void write_matrix(const std::filesystem::path& path, const RowMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write npy file: " + path.string());
  write_matrix(out, m);
  if (!out) throw FormatError("write failed: " + path.string());
}

}  // namespace npy
}  // namespace phonedyn
