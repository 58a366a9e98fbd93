#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace barseg::io {

/// Binary matrix container: magic "BSEG", u32 rows, u32 cols, then rows*cols
/// little-endian f64 values in row-major order.
void write_bseg(const std::filesystem::path& path, const Eigen::MatrixXd& m);
void write_bseg(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_bseg(const std::filesystem::path& path);
Eigen::MatrixXd read_bseg(std::istream& is);

/// Comma separated, one matrix row per line, 17 significant digits.
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
void write_csv(std::ostream& os, const Eigen::MatrixXd& m);

/// Writes m to `path`, choosing BSEG for a ".bseg" extension and CSV otherwise.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

/// 8-bit grayscale image, binary PGM (P5).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;  // row-major

  unsigned char at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace barseg::io
