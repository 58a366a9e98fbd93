#include "barseg/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "barseg/error.hpp"

namespace barseg::io {
namespace {

constexpr std::array<char, 4> kMagic{'B', 'S', 'E', 'G'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                  static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) throw FormatError("BSEG: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes{};
  for (auto& c : bytes) {
    c = static_cast<char>(bits & 0xff);
    bits >>= 8;
  }
  os.write(bytes.data(), bytes.size());
}

double get_f64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) throw FormatError("BSEG: truncated payload");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
  return std::bit_cast<double>(bits);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace

void write_bseg(std::ostream& os, const Eigen::MatrixXd& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.cols() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("BSEG: matrix too large");
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, static_cast<std::uint32_t>(m.rows()));
  put_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(os, m(r, c));
}

void write_bseg(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto os = open_out(path, std::ios::out | std::ios::binary);
  write_bseg(os, m);
}

Eigen::MatrixXd read_bseg(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("BSEG: bad magic");
  const auto rows = get_u32(is);
  const auto cols = get_u32(is);
  Eigen::MatrixXd m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = get_f64(is);
  return m;
}

Eigen::MatrixXd read_bseg(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_bseg(is);
}

void write_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  os << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << m(r, c);
    }
    os << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto os = open_out(path);
  write_csv(os, m);
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  if (path.extension() == ".bseg")
    write_bseg(path, m);
  else
    write_csv(path, m);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
    throw InvalidArgument("PGM: pixel count does not match dimensions");
  auto os = open_out(path, std::ios::out | std::ios::binary);
  os << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  GrayImage img;
  is >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || img.width < 0 || img.height < 0) throw FormatError("PGM: unsupported header");
  is.get();  // single whitespace after maxval
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  if (!is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size())))
    throw FormatError("PGM: truncated pixel data");
  return img;
}

}  // namespace barseg::io
