#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "barseg/autoencoder.hpp"
#include "barseg/bar_tensor.hpp"
#include "barseg/features.hpp"
#include "barseg/lowrank.hpp"
#include "barseg/metrics.hpp"
#include "barseg/segmenter.hpp"

namespace barseg {

enum class Compressor { none, pca, nmf, ae };

std::string_view to_string(Compressor c) noexcept;
Compressor parse_compressor(std::string_view name);

struct PipelineConfig {
  FeatureKind feature = FeatureKind::nnlms;
  Compressor compressor = Compressor::pca;
  int d_c = 0;  // required unless compressor == none
  int subdivision = 96;
  int max_segment = 32;
  std::vector<double> tolerances{0.5, 3.0};
  std::uint64_t seed = 42;
  StftParams stft;
  int nmf_max_iters = 500;
  double nmf_tol = 1e-8;
  int ae_max_epochs = 1000;
  int ae_batch_size = 8;

  std::string song_id;
  std::filesystem::path audio;
  std::filesystem::path downbeats;
  std::filesystem::path annotations;  // optional
  std::filesystem::path out_dir;      // no files written when empty

  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct SongResult {
  std::string song_id;
  PipelineConfig config;
  std::size_t bars = 0;
  Segmentation segmentation;
  std::optional<EvalReport> evaluation;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  Eigen::MatrixXd embedding;       // d_c x b
  Eigen::MatrixXd autosimilarity;  // b x b
  std::optional<AETrainResult> autoencoder;
};

/// d_c x b embedding of the bars (columns). compressor == none returns the
/// transposed barwise matrix itself.
Eigen::MatrixXd compress_bars(const BarwiseTF& tf, const PipelineConfig& cfg, std::vector<std::string>& warnings,
                              std::optional<AETrainResult>* ae_result = nullptr);

/// Embedding -> autosimilarity -> segmentation -> optional evaluation, on an
/// already computed barwise matrix.
SongResult segment_barwise(const BarwiseTF& tf, const BarGrid& grid, const PipelineConfig& cfg,
                           const std::optional<BoundarySet>& reference = std::nullopt);

/// Full per-song pipeline from audio. When cfg.out_dir is set, writes
/// result.json, timing.json, boundaries.txt, autosimilarity.pgm and embedding.bseg
/// (plus loss_trace.csv and network.bin for the autoencoder).
/// Errors are rethrown as StageError naming the failing stage.
SongResult run_song(const PipelineConfig& cfg);

/// Deterministic JSON (no timings): config echo, boundaries, score, evaluation.
std::string result_json(const SongResult& result);
std::string timing_json(const SongResult& result);

void write_song_outputs(const SongResult& result, const std::filesystem::path& dir);

/// Two columns "start end" per segment.
void write_boundaries(const std::filesystem::path& path, const Segmentation& seg);

void render_autosimilarity(const Eigen::MatrixXd& A, const std::filesystem::path& path);

struct BatchFailure {
  std::string song_id;
  std::string error;
};

struct AggregateScore {
  double tolerance = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::size_t songs = 0;
};

struct BatchReport {
  std::vector<SongResult> results;  // sorted by song id
  std::vector<BatchFailure> failures;
  std::vector<AggregateScore> aggregate;

  bool ok() const noexcept { return failures.empty(); }
};

/// Runs every <dir>/<song>/ holding audio.wav, downbeats.txt and optionally
/// annotations.txt. Per-song failures are recorded and the batch continues.
/// Throws InvalidArgument when the directory holds no song directories.
BatchReport run_batch(const std::filesystem::path& dataset_dir, const PipelineConfig& cfg, int jobs = 1);

/// aggregate.csv and aggregate.json (plus per-song outputs under cfg.out_dir/<song>).
void write_batch_report(const BatchReport& report, const std::filesystem::path& dir);

std::string batch_json(const BatchReport& report);

}  // namespace barseg
