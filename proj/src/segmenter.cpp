#include "barseg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "barseg/error.hpp"

namespace barseg {
namespace {

constexpr int kBandWidth = 4;

double kernel_weight(int i, int j) {
  const int d = std::abs(i - j);
  if (d == 0) return 0.0;
  return d <= kBandWidth ? 2.0 : 1.0;
}

void check_square(const Eigen::MatrixXd& A, const char* op) {
  if (A.rows() != A.cols()) throw InvalidArgument(std::string(op) + ": autosimilarity must be square");
}

// Unchecked cost; callers validate the range.
double cost(const Eigen::MatrixXd& A, int b1, int b2) {
  const int n = b2 - b1;
  double sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j) sum += kernel_weight(i, j) * A(b1 + i, b1 + j);
  return sum / n;
}

}  // namespace

Eigen::MatrixXd cosine_autosimilarity(const Eigen::MatrixXd& Z) {
  if (!Z.allFinite()) throw InvalidArgument("cosine_autosimilarity: embedding has non-finite entries");
  Eigen::MatrixXd normalized = Z;
  std::vector<bool> nonzero(static_cast<std::size_t>(Z.cols()));
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const double norm = Z.col(j).norm();
    nonzero[static_cast<std::size_t>(j)] = norm > 0;
    if (norm > 0)
      normalized.col(j) /= norm;
    else
      normalized.col(j).setZero();
  }
  Eigen::MatrixXd A = normalized.transpose() * normalized;
  // Exact symmetry, range and unit diagonal despite rounding.
  A = (0.5 * (A + A.transpose())).cwiseMax(-1.0).cwiseMin(1.0);
  for (Eigen::Index j = 0; j < A.rows(); ++j)
    if (nonzero[static_cast<std::size_t>(j)]) A(j, j) = 1.0;
  return A;
}

Eigen::MatrixXd kernel(int n) {
  if (n < 1) throw InvalidArgument("kernel: size must be >= 1");
  Eigen::MatrixXd K(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) K(i, j) = kernel_weight(i, j);
  return K;
}

double penalty(int n) {
  if (n < 1) throw InvalidArgument("penalty: segment size must be >= 1");
  if (n == 8) return 0.0;
  if (n == 4) return 0.25;
  if (n % 2 == 0) return 0.5;
  return 1.0;
}

double segment_cost(const Eigen::MatrixXd& A, int b1, int b2) {
  check_square(A, "segment_cost");
  if (b1 < 0 || b2 <= b1 || b2 > A.rows())
    throw InvalidArgument("segment_cost: invalid segment [" + std::to_string(b1) + ", " + std::to_string(b2) +
                          ") for " + std::to_string(A.rows()) + " bars");
  return cost(A, b1, b2);
}

double compute_ck8max(const Eigen::MatrixXd& A) {
  check_square(A, "compute_ck8max");
  const int b = static_cast<int>(A.rows());
  if (b < 1) throw InvalidArgument("compute_ck8max: empty autosimilarity");
  const int width = std::min(8, b);
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t + width <= b; ++t) best = std::max(best, cost(A, t, t + width));
  return best;
}

double segment_score(const Eigen::MatrixXd& A, int b1, int b2, double c_k8_max) {
  if (!(c_k8_max > 0))
    throw DegenerateError("segment_score: c_k8_max = " + std::to_string(c_k8_max) +
                          " is not positive; the autosimilarity has no positive off-diagonal structure");
  return segment_cost(A, b1, b2) / c_k8_max - penalty(b2 - b1);
}

Segmentation dp_segment(const Eigen::MatrixXd& A, int max_segment) {
  check_square(A, "dp_segment");
  const int b = static_cast<int>(A.rows());
  if (b < 1) throw InvalidArgument("dp_segment: need at least one bar");
  if (max_segment < 1) throw InvalidArgument("dp_segment: max_segment must be >= 1");
  // A single bar has one segmentation and a zero cost, so no normalizer is needed.
  if (b == 1) return Segmentation{{0, 1}, {}, -penalty(1)};
  const double ck8 = compute_ck8max(A);
  if (!(ck8 > 0))
    throw DegenerateError("dp_segment: c_k8_max = " + std::to_string(ck8) +
                          " is not positive; the autosimilarity has no positive off-diagonal structure");

  std::vector<double> best(static_cast<std::size_t>(b) + 1, -std::numeric_limits<double>::infinity());
  std::vector<int> prev(static_cast<std::size_t>(b) + 1, -1);
  best[0] = 0.0;
  for (int i = 1; i <= b; ++i) {
    for (int j = std::max(0, i - max_segment); j < i; ++j) {
      const double candidate = best[j] + (cost(A, j, i) / ck8 - penalty(i - j));
      // >= prefers the larger j, i.e. the shorter last segment.
      if (candidate >= best[i]) {
        best[i] = candidate;
        prev[i] = j;
      }
    }
  }

  Segmentation seg;
  seg.total_score = best[b];
  for (int i = b; i > 0; i = prev[i]) seg.boundaries_bars.push_back(i);
  seg.boundaries_bars.push_back(0);
  std::reverse(seg.boundaries_bars.begin(), seg.boundaries_bars.end());
  return seg;
}

void attach_times(Segmentation& seg, const BarGrid& grid) {
  seg.boundaries_seconds.clear();
  for (int bar : seg.boundaries_bars) {
    if (bar < 0 || static_cast<std::size_t>(bar) >= grid.downbeats().size())
      throw InvalidArgument("attach_times: boundary " + std::to_string(bar) + " outside the bar grid");
    seg.boundaries_seconds.push_back(grid.downbeats()[static_cast<std::size_t>(bar)]);
  }
}

io::GrayImage autosimilarity_image(const Eigen::MatrixXd& A) {
  io::GrayImage img;
  img.width = static_cast<int>(A.cols());
  img.height = static_cast<int>(A.rows());
  img.pixels.resize(static_cast<std::size_t>(A.size()));
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
      const double v = std::clamp(A(r, c), -1.0, 1.0);
      img.pixels[static_cast<std::size_t>(r * A.cols() + c)] =
          static_cast<unsigned char>(std::lround(255.0 * (v + 1.0) / 2.0));
    }
  return img;
}

}  // namespace barseg
