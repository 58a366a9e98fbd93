#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "barseg/audio.hpp"
#include "barseg/features.hpp"

namespace barseg {

/// Downbeat times in seconds; b + 1 strictly increasing times delimit b bars.
class BarGrid {
 public:
  BarGrid() = default;
  /// Throws InvalidArgument unless times are finite, >= 0, strictly increasing and at least two.
  explicit BarGrid(std::vector<double> downbeats);

  const std::vector<double>& downbeats() const noexcept { return downbeats_; }
  std::size_t bars() const noexcept { return downbeats_.empty() ? 0 : downbeats_.size() - 1; }
  double bar_start(std::size_t i) const { return downbeats_.at(i); }

 private:
  std::vector<double> downbeats_;
};

/// One float per line, seconds. Blank lines are ignored.
BarGrid load_downbeats(const std::filesystem::path& path);

/// b x (f * s) matrix; row i is bar i's f x s patch flattened frequency-major
/// (all s frames of bin 0, then bin 1, ...).
struct BarwiseTF {
  Eigen::MatrixXd values;
  int bins = 0;
  int subdivision = 96;
  FeatureKind kind = FeatureKind::nnlms;

  Eigen::Index bars() const noexcept { return values.rows(); }
  /// Bar i as an f x s matrix.
  Eigen::MatrixXd bar(Eigen::Index i) const;
};

/// { start + floor(k * (end - start) / s) : 0 <= k < s }.
std::vector<Eigen::Index> select_frames(Eigen::Index start, Eigen::Index end, int subdivision);

/// Index of the frame whose center is nearest to time t (seconds).
Eigen::Index nearest_frame(double t, double sample_rate, int hop);

/// b x s frame indices, one row per bar. Frames past n_frames are rejected.
std::vector<std::vector<Eigen::Index>> bar_frame_indices(const BarGrid& grid, Eigen::Index n_frames,
                                                         double sample_rate, int hop, int subdivision);

BarwiseTF barwise_tf(const Spectrogram& spec, const BarGrid& grid, int subdivision = 96);

/// Equivalent to barwise_tf(compute_feature(signal, kind), grid, s) but computes
/// only the frames that are actually sampled.
BarwiseTF barwise_tf_from_audio(const AudioSignal& signal, FeatureKind kind, const BarGrid& grid,
                                int subdivision = 96, const StftParams& params = {});

}  // namespace barseg
