#include "barseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "barseg/error.hpp"
#include "barseg/matrix_io.hpp"

namespace barseg {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

template <typename Fn>
auto timed(std::vector<StageTiming>& timings, const char* stage, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    timings.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto value = fn();
      record();
      return value;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

json config_json(const PipelineConfig& cfg) {
  json j;
  j["feature"] = to_string(cfg.feature);
  j["compressor"] = to_string(cfg.compressor);
  j["d_c"] = cfg.d_c;
  j["subdivision"] = cfg.subdivision;
  j["max_segment"] = cfg.max_segment;
  j["tolerances"] = cfg.tolerances;
  j["seed"] = cfg.seed;
  j["n_fft"] = cfg.stft.n_fft;
  j["hop"] = cfg.stft.hop;
  j["nmf_max_iters"] = cfg.nmf_max_iters;
  j["nmf_tol"] = cfg.nmf_tol;
  j["ae_max_epochs"] = cfg.ae_max_epochs;
  j["ae_batch_size"] = cfg.ae_batch_size;
  j["audio"] = cfg.audio.string();
  j["downbeats"] = cfg.downbeats.string();
  j["annotations"] = cfg.annotations.string();
  return j;
}

json hit_rate_json(const HitRate& h) {
  json j;
  j["tol"] = h.tolerance;
  j["precision"] = h.precision;
  j["recall"] = h.recall;
  j["f_measure"] = h.f_measure;
  j["n_est"] = h.n_est;
  j["n_ref"] = h.n_ref;
  j["n_matched"] = h.n_matched;
  if (!h.warning.empty()) j["warning"] = h.warning;
  return j;
}

json result_object(const SongResult& r) {
  json j;
  j["song_id"] = r.song_id;
  j["config"] = config_json(r.config);
  j["n_bars"] = r.bars;
  j["boundaries_bars"] = r.segmentation.boundaries_bars;
  j["boundaries_seconds"] = r.segmentation.boundaries_seconds;
  j["total_score"] = r.segmentation.total_score;
  if (r.evaluation) {
    json scores = json::array();
    for (const auto& h : r.evaluation->scores) scores.push_back(hit_rate_json(h));
    j["evaluation"] = scores;
  }
  if (r.autoencoder) {
    j["autoencoder"] = {{"initial_loss", r.autoencoder->initial_loss},
                        {"best_loss", r.autoencoder->best_loss},
                        {"best_epoch", r.autoencoder->best_epoch},
                        {"epochs", r.autoencoder->loss_trace.size()},
                        {"stop_reason", r.autoencoder->stop_reason == StopReason::early_stop ? "early_stop"
                                                                                              : "max_epochs"}};
  }
  j["warnings"] = r.warnings;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text << '\n';
}

}  // namespace

std::string_view to_string(Compressor c) noexcept {
  switch (c) {
    case Compressor::none: return "none";
    case Compressor::pca: return "pca";
    case Compressor::nmf: return "nmf";
    case Compressor::ae: return "ae";
  }
  return "unknown";
}

Compressor parse_compressor(std::string_view name) {
  for (auto c : {Compressor::none, Compressor::pca, Compressor::nmf, Compressor::ae})
    if (to_string(c) == name) return c;
  throw InvalidArgument("unknown compressor '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  if (compressor != Compressor::none && d_c < 1)
    throw InvalidArgument("config: d_c is required for compressor " + std::string(to_string(compressor)));
  if (subdivision < 1) throw InvalidArgument("config: subdivision must be >= 1");
  if (max_segment < 1) throw InvalidArgument("config: max_segment must be >= 1");
  if (tolerances.empty()) throw InvalidArgument("config: at least one tolerance is required");
  for (double t : tolerances)
    if (!(t > 0)) throw InvalidArgument("config: tolerances must be positive");
  if (feature == FeatureKind::stft_power && compressor == Compressor::ae)
    throw InvalidArgument("config: the autoencoder needs a compact feature, not stft_power");
}

Eigen::MatrixXd compress_bars(const BarwiseTF& tf, const PipelineConfig& cfg, std::vector<std::string>& warnings,
                              std::optional<AETrainResult>* ae_result) {
  const Eigen::MatrixXd X = tf.values.transpose();  // n x b, one bar per column
  switch (cfg.compressor) {
    case Compressor::none: return X;
    case Compressor::pca: return pca_compress(X, cfg.d_c).H;
    case Compressor::nmf: {
      NmfOptions opts;
      opts.max_iters = cfg.nmf_max_iters;
      opts.tol = cfg.nmf_tol;
      opts.seed = cfg.seed;
      return nmf_compress(X, cfg.d_c, opts).H;
    }
    case Compressor::ae: {
      if (!is_nonnegative(tf.kind))
        warnings.push_back(std::string(to_string(tf.kind)) +
                           " has negative values that the autoencoder's final ReLU cannot reconstruct");
      std::vector<Eigen::MatrixXd> bars;
      bars.reserve(static_cast<std::size_t>(tf.bars()));
      for (Eigen::Index i = 0; i < tf.bars(); ++i) bars.push_back(tf.bar(i));
      AEConfig ae;
      ae.d_c = cfg.d_c;
      ae.seed = cfg.seed;
      ae.max_epochs = cfg.ae_max_epochs;
      ae.batch_size = cfg.ae_batch_size;
      auto trained = train_single_song(bars, ae);
      Eigen::MatrixXd Z = trained.embedding;
      if (ae_result) *ae_result = std::move(trained);
      return Z;
    }
  }
  throw InvalidArgument("unknown compressor");
}

SongResult segment_barwise(const BarwiseTF& tf, const BarGrid& grid, const PipelineConfig& cfg,
                           const std::optional<BoundarySet>& reference) {
  SongResult r;
  r.config = cfg;
  r.song_id = cfg.song_id;
  r.bars = static_cast<std::size_t>(tf.bars());
  r.embedding = timed(r.timings, "compress", [&] { return compress_bars(tf, cfg, r.warnings, &r.autoencoder); });
  r.autosimilarity = timed(r.timings, "autosimilarity", [&] { return cosine_autosimilarity(r.embedding); });
  r.segmentation = timed(r.timings, "segment", [&] {
    auto seg = dp_segment(r.autosimilarity, cfg.max_segment);
    attach_times(seg, grid);
    return seg;
  });
  if (reference) {
    r.evaluation = timed(r.timings, "evaluate", [&] {
      const BoundarySet est(r.segmentation.boundaries_seconds);
      auto report = evaluate(est, *reference, cfg.tolerances);
      for (const auto& h : report.scores)
        if (!h.warning.empty()) r.warnings.push_back(h.warning);
      return report;
    });
  }
  return r;
}

SongResult run_song(const PipelineConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  std::vector<StageTiming> timings;
  const auto signal = timed(timings, "load_audio", [&] { return load_wav(cfg.audio); });
  const auto grid = timed(timings, "load_downbeats", [&] { return load_downbeats(cfg.downbeats); });
  std::optional<BoundarySet> reference;
  if (!cfg.annotations.empty())
    reference = timed(timings, "load_annotations", [&] { return load_annotations(cfg.annotations); });

  const auto tf = timed(timings, "features",
                        [&] { return barwise_tf_from_audio(signal, cfg.feature, grid, cfg.subdivision, cfg.stft); });

  auto result = segment_barwise(tf, grid, cfg, reference);
  timings.insert(timings.end(), result.timings.begin(), result.timings.end());
  result.timings = std::move(timings);
  if (result.song_id.empty()) result.song_id = cfg.audio.stem().string();

  if (!cfg.out_dir.empty()) timed(result.timings, "write_outputs", [&] { write_song_outputs(result, cfg.out_dir); });
  return result;
}

std::string result_json(const SongResult& result) { return result_object(result).dump(2); }

std::string timing_json(const SongResult& result) {
  json stages = json::object();
  for (const auto& t : result.timings) stages[t.stage] = t.seconds;
  json j;
  j["song_id"] = result.song_id;
  j["stages"] = stages;
  return j.dump(2);
}

void write_boundaries(const fs::path& path, const Segmentation& seg) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  for (std::size_t i = 0; i + 1 < seg.boundaries_seconds.size(); ++i)
    os << seg.boundaries_seconds[i] << '\t' << seg.boundaries_seconds[i + 1] << '\n';
}

void render_autosimilarity(const Eigen::MatrixXd& A, const fs::path& path) {
  io::write_pgm(path, autosimilarity_image(A));
}

void write_song_outputs(const SongResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "result.json", result_json(result));
  write_text(dir / "timing.json", timing_json(result));
  write_boundaries(dir / "boundaries.txt", result.segmentation);
  render_autosimilarity(result.autosimilarity, dir / "autosimilarity.pgm");
  io::write_bseg(dir / "embedding.bseg", result.embedding);
  if (result.autoencoder) {
    write_loss_trace(dir / "loss_trace.csv", *result.autoencoder);
    save_network(dir / "network.bin", result.autoencoder->network);
  }
}

BatchReport run_batch(const fs::path& dataset_dir, const PipelineConfig& cfg, int jobs) {
  if (!fs::is_directory(dataset_dir)) throw InvalidArgument("batch: " + dataset_dir.string() + " is not a directory");
  std::vector<fs::path> songs;
  for (const auto& entry : fs::directory_iterator(dataset_dir))
    if (entry.is_directory()) songs.push_back(entry.path());
  if (songs.empty()) throw InvalidArgument("batch: no song directories in " + dataset_dir.string());
  std::sort(songs.begin(), songs.end());

  std::vector<std::optional<SongResult>> results(songs.size());
  std::vector<std::string> errors(songs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < songs.size(); i = next++) {
      PipelineConfig song_cfg = cfg;
      song_cfg.song_id = songs[i].filename().string();
      song_cfg.audio = songs[i] / "audio.wav";
      song_cfg.downbeats = songs[i] / "downbeats.txt";
      song_cfg.annotations = fs::exists(songs[i] / "annotations.txt") ? songs[i] / "annotations.txt" : fs::path();
      song_cfg.out_dir = cfg.out_dir.empty() ? fs::path() : cfg.out_dir / song_cfg.song_id;
      try {
        results[i] = run_song(song_cfg);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n_workers = std::clamp(jobs, 1, static_cast<int>(songs.size()));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  BatchReport report;
  for (std::size_t i = 0; i < songs.size(); ++i) {
    if (results[i])
      report.results.push_back(std::move(*results[i]));
    else
      report.failures.push_back({songs[i].filename().string(), errors[i]});
  }

  for (double tol : cfg.tolerances) {
    AggregateScore agg;
    agg.tolerance = tol;
    for (const auto& r : report.results) {
      if (!r.evaluation) continue;
      if (const auto* h = r.evaluation->at(tol)) {
        agg.precision += h->precision;
        agg.recall += h->recall;
        agg.f_measure += h->f_measure;
        ++agg.songs;
      }
    }
    if (agg.songs > 0) {
      agg.precision /= static_cast<double>(agg.songs);
      agg.recall /= static_cast<double>(agg.songs);
      agg.f_measure /= static_cast<double>(agg.songs);
    }
    report.aggregate.push_back(agg);
  }
  return report;
}

std::string batch_json(const BatchReport& report) {
  json j;
  json songs = json::array();
  for (const auto& r : report.results) songs.push_back(result_object(r));
  json failures = json::array();
  for (const auto& f : report.failures) failures.push_back({{"song_id", f.song_id}, {"error", f.error}});
  json aggregate = json::array();
  for (const auto& a : report.aggregate)
    aggregate.push_back({{"tol", a.tolerance},
                         {"precision", a.precision},
                         {"recall", a.recall},
                         {"f_measure", a.f_measure},
                         {"n_songs", a.songs}});
  j["aggregate"] = aggregate;
  j["failures"] = failures;
  j["songs"] = songs;
  return j.dump(2);
}

void write_batch_report(const BatchReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "aggregate.json", batch_json(report));
  std::ofstream csv(dir / "aggregate.csv");
  if (!csv) throw Error("cannot write aggregate.csv");
  csv << std::setprecision(17) << "tol,precision,recall,f_measure,n_songs\n";
  for (const auto& a : report.aggregate)
    csv << a.tolerance << ',' << a.precision << ',' << a.recall << ',' << a.f_measure << ',' << a.songs << '\n';
}

}  // namespace barseg
