#pragma once

#include <vector>

#include <Eigen/Core>

#include "barseg/bar_tensor.hpp"
#include "barseg/matrix_io.hpp"

namespace barseg {

/// b x b cosine similarities between bar embeddings (columns of Z).
/// Rows and columns of zero-norm bars are all zero, diagonal included.
Eigen::MatrixXd cosine_autosimilarity(const Eigen::MatrixXd& Z);

/// Homogeneity kernel: 0 on the diagonal, 2 where 1 <= |i - j| <= 4, 1 elsewhere.
Eigen::MatrixXd kernel(int n);

/// Regularity penalty on a segment of n bars.
double penalty(int n);

/// Kernel-weighted similarity inside bars [b1, b2), divided by the segment length.
double segment_cost(const Eigen::MatrixXd& A, int b1, int b2);

/// Largest cost over all 8-bar windows (over the whole matrix when b < 8).
double compute_ck8max(const Eigen::MatrixXd& A);

/// cost / c_k8_max - penalty(b2 - b1). Throws DegenerateError when c_k8_max <= 0.
double segment_score(const Eigen::MatrixXd& A, int b1, int b2, double c_k8_max);

struct Segmentation {
  std::vector<int> boundaries_bars;       // 0 = first, b = last
  std::vector<double> boundaries_seconds;  // filled by attach_times
  double total_score = 0.0;

  std::size_t segments() const noexcept { return boundaries_bars.empty() ? 0 : boundaries_bars.size() - 1; }
};

/// Exact dynamic program maximizing the summed segment scores over all
/// segmentations with segment lengths in [1, max_segment]. Ties go to the
/// shorter last segment.
Segmentation dp_segment(const Eigen::MatrixXd& A, int max_segment = 32);

/// Maps bar boundaries to downbeat times.
void attach_times(Segmentation& seg, const BarGrid& grid);

/// 8-bit rendering, v in [-1, 1] -> round(255 * (v + 1) / 2).
io::GrayImage autosimilarity_image(const Eigen::MatrixXd& A);

}  // namespace barseg
