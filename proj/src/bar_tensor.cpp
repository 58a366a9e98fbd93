#include "barseg/bar_tensor.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "barseg/error.hpp"

namespace barseg {

BarGrid::BarGrid(std::vector<double> downbeats) : downbeats_(std::move(downbeats)) {
  if (downbeats_.size() < 2) throw InvalidArgument("downbeats: need at least 2 downbeats to delimit a bar");
  for (std::size_t i = 0; i < downbeats_.size(); ++i) {
    if (!std::isfinite(downbeats_[i]) || downbeats_[i] < 0)
      throw InvalidArgument("downbeats: time " + std::to_string(i) + " is negative or not finite");
    if (i > 0 && downbeats_[i] <= downbeats_[i - 1])
      throw InvalidArgument("downbeats: non-monotone times at index " + std::to_string(i));
  }
}

BarGrid load_downbeats(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::vector<double> times;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    double t = 0;
    if (!(ls >> t)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected a time in seconds");
    }
    times.push_back(t);
  }
  return BarGrid(std::move(times));
}

Eigen::MatrixXd BarwiseTF::bar(Eigen::Index i) const {
  Eigen::MatrixXd patch(bins, subdivision);
  for (int r = 0; r < bins; ++r)
    for (int c = 0; c < subdivision; ++c) patch(r, c) = values(i, static_cast<Eigen::Index>(r) * subdivision + c);
  return patch;
}

std::vector<Eigen::Index> select_frames(Eigen::Index start, Eigen::Index end, int subdivision) {
  if (subdivision < 1) throw InvalidArgument("select_frames: subdivision must be >= 1");
  if (start < 0 || end <= start)
    throw InvalidArgument("select_frames: require end > start >= 0 (got " + std::to_string(start) + ", " +
                          std::to_string(end) + ")");
  std::vector<Eigen::Index> frames(static_cast<std::size_t>(subdivision));
  const Eigen::Index span = end - start;
  for (int k = 0; k < subdivision; ++k) frames[k] = start + (k * span) / subdivision;
  return frames;
}

Eigen::Index nearest_frame(double t, double sample_rate, int hop) {
  return static_cast<Eigen::Index>(std::llround(t * sample_rate / hop));
}

std::vector<std::vector<Eigen::Index>> bar_frame_indices(const BarGrid& grid, Eigen::Index n_frames,
                                                         double sample_rate, int hop, int subdivision) {
  const auto& db = grid.downbeats();
  if (db.size() < 2) throw InvalidArgument("barwise_tf: empty bar grid");
  const auto last = nearest_frame(db.back(), sample_rate, hop);
  if (last >= n_frames)
    throw InvalidArgument("barwise_tf: last downbeat at " + std::to_string(db.back()) +
                          " s lies beyond the spectrogram");
  std::vector<std::vector<Eigen::Index>> out;
  out.reserve(grid.bars());
  for (std::size_t i = 0; i + 1 < db.size(); ++i) {
    const auto fs = nearest_frame(db[i], sample_rate, hop);
    const auto fe = nearest_frame(db[i + 1], sample_rate, hop);
    if (fe <= fs)
      throw InvalidArgument("barwise_tf: bar " + std::to_string(i) + " spans no frame (downbeats closer than one hop)");
    out.push_back(select_frames(fs, fe, subdivision));
  }
  return out;
}

namespace {

BarwiseTF gather(const Eigen::MatrixXd& columns, FeatureKind kind, std::size_t bars, int subdivision) {
  BarwiseTF out;
  out.bins = static_cast<int>(columns.rows());
  out.subdivision = subdivision;
  out.kind = kind;
  out.values.resize(static_cast<Eigen::Index>(bars), columns.rows() * subdivision);
  for (std::size_t i = 0; i < bars; ++i)
    for (Eigen::Index r = 0; r < columns.rows(); ++r)
      for (int k = 0; k < subdivision; ++k)
        out.values(static_cast<Eigen::Index>(i), r * subdivision + k) =
            columns(r, static_cast<Eigen::Index>(i) * subdivision + k);
  return out;
}

}  // namespace

BarwiseTF barwise_tf(const Spectrogram& spec, const BarGrid& grid, int subdivision) {
  const auto idx = bar_frame_indices(grid, spec.frames(), spec.sample_rate, spec.hop, subdivision);
  Eigen::MatrixXd columns(spec.bins(), static_cast<Eigen::Index>(idx.size()) * subdivision);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (int k = 0; k < subdivision; ++k)
      columns.col(static_cast<Eigen::Index>(i) * subdivision + k) = spec.values.col(idx[i][k]);
  return gather(columns, spec.kind, idx.size(), subdivision);
}

BarwiseTF barwise_tf_from_audio(const AudioSignal& signal, FeatureKind kind, const BarGrid& grid, int subdivision,
                                const StftParams& params) {
  if (signal.samples.empty()) throw InvalidArgument("barwise_tf: empty signal");
  const auto idx =
      bar_frame_indices(grid, frame_count(signal.size(), params.hop), signal.sample_rate, params.hop, subdivision);
  std::vector<Eigen::Index> flat;
  flat.reserve(idx.size() * static_cast<std::size_t>(subdivision));
  for (const auto& bar : idx) flat.insert(flat.end(), bar.begin(), bar.end());
  const auto spec = compute_feature_frames(signal, kind, flat, params);
  return gather(spec.values, kind, idx.size(), subdivision);
}

}  // namespace barseg
