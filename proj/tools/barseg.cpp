// barseg: barwise-compression music structure analysis from the command line.
//
//   barseg features song.wav --feature nnlms --out nnlms.csv
//   barseg segment song.wav --downbeats db.txt --annotations ann.txt --compressor pca --dc 16 --out out/
//   barseg eval --estimated out/boundaries.txt --annotations ann.txt
//   barseg batch dataset/ --compressor nmf --dc-sweep 8,16,24,32,40 --out results/

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "barseg/error.hpp"
#include "barseg/matrix_io.hpp"
#include "barseg/pipeline.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace barseg;

namespace {

struct CommonOptions {
  std::string feature = "nnlms";
  std::string compressor = "pca";
  int d_c = 0;
  std::vector<int> dc_sweep;
  int subdivision = 96;
  int max_segment = 32;
  std::vector<double> tolerances{0.5, 3.0};
  std::uint64_t seed = 42;
  int ae_max_epochs = 1000;
  int ae_batch_size = 8;
  int nmf_max_iters = 500;
  std::string out;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--feature", o.feature, "chroma, mel, lms, nnlms or mfcc")->capture_default_str();
  app->add_option("--compressor", o.compressor, "none, pca, nmf or ae")->capture_default_str();
  app->add_option("--dc", o.d_c, "Latent dimension");
  app->add_option("--dc-sweep", o.dc_sweep, "Comma separated latent dimensions, one run each")->delimiter(',');
  app->add_option("--subdivision", o.subdivision, "Frames per bar")->capture_default_str();
  app->add_option("--max-segment", o.max_segment, "Longest segment in bars")->capture_default_str();
  app->add_option("--tolerances", o.tolerances, "Hit-rate tolerances in seconds")->delimiter(',')->capture_default_str();
  app->add_option("--seed", o.seed, "Seed for NMF and autoencoder initialization")->capture_default_str();
  app->add_option("--ae-max-epochs", o.ae_max_epochs, "Autoencoder epoch budget")->capture_default_str();
  app->add_option("--ae-batch-size", o.ae_batch_size, "Autoencoder minibatch size")->capture_default_str();
  app->add_option("--nmf-max-iters", o.nmf_max_iters, "NMF iteration budget")->capture_default_str();
  app->add_option("--out", o.out, "Output directory");
}

PipelineConfig make_config(const CommonOptions& o) {
  PipelineConfig cfg;
  cfg.feature = parse_feature_kind(o.feature);
  cfg.compressor = parse_compressor(o.compressor);
  cfg.d_c = o.d_c;
  cfg.subdivision = o.subdivision;
  cfg.max_segment = o.max_segment;
  cfg.tolerances = o.tolerances;
  cfg.seed = o.seed;
  cfg.ae_max_epochs = o.ae_max_epochs;
  cfg.ae_batch_size = o.ae_batch_size;
  cfg.nmf_max_iters = o.nmf_max_iters;
  cfg.out_dir = o.out;
  return cfg;
}

// One config per requested latent dimension; output goes to <out>/dc<N> when sweeping.
std::vector<PipelineConfig> expand_sweep(const PipelineConfig& base, const CommonOptions& o) {
  if (o.dc_sweep.empty()) return {base};
  std::vector<PipelineConfig> out;
  for (int dc : o.dc_sweep) {
    auto cfg = base;
    cfg.d_c = dc;
    if (!base.out_dir.empty()) cfg.out_dir = base.out_dir / ("dc" + std::to_string(dc));
    out.push_back(cfg);
  }
  return out;
}

void print_summary(const SongResult& r) {
  std::cout << r.song_id << " [" << to_string(r.config.feature) << "/" << to_string(r.config.compressor);
  if (r.config.compressor != Compressor::none) std::cout << " d_c=" << r.config.d_c;
  std::cout << "] " << r.bars << " bars, " << r.segmentation.segments() << " segments:";
  for (double t : r.segmentation.boundaries_seconds) std::cout << ' ' << t;
  std::cout << '\n';
  if (r.evaluation)
    for (const auto& h : r.evaluation->scores)
      std::cout << "  tol " << h.tolerance << "s  P=" << h.precision << " R=" << h.recall << " F=" << h.f_measure
                << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

int run_features(const std::string& audio, const std::string& feature, const std::string& downbeats, int subdivision,
                 const std::string& out) {
  const auto signal = load_wav(audio);
  const auto kind = parse_feature_kind(feature);
  Eigen::MatrixXd m;
  if (downbeats.empty())
    m = compute_feature(signal, kind).values;
  else
    m = barwise_tf_from_audio(signal, kind, load_downbeats(downbeats), subdivision).values;
  io::write_matrix(out, m);
  std::cout << "wrote " << m.rows() << "x" << m.cols() << " " << feature << " matrix to " << out << '\n';
  return 0;
}

int run_eval(const std::string& estimated, const std::string& annotations, const std::string& downbeats,
             const std::vector<double>& tolerances) {
  const auto est = load_annotations(estimated);
  auto ref = load_annotations(annotations);
  if (!downbeats.empty()) ref = align_to_downbeats(ref, load_downbeats(downbeats));
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& h : evaluate(est, ref, tolerances).scores) {
    out.push_back({{"tol", h.tolerance},
                   {"precision", h.precision},
                   {"recall", h.recall},
                   {"f_measure", h.f_measure},
                   {"n_est", h.n_est},
                   {"n_ref", h.n_ref},
                   {"n_matched", h.n_matched}});
    if (!h.warning.empty()) std::cerr << "warning: " << h.warning << '\n';
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barwise-compression music structure analysis"};
  app.require_subcommand(1);
  // Keys live in [segment] or [batch] sections; command line flags take precedence.
  app.set_config("--config", "", "TOML/INI configuration file");

  std::string audio, feature = "nnlms", downbeats, out;
  int subdivision = 96;
  auto* features = app.add_subcommand("features", "Compute a feature spectrogram (or barwise matrix)");
  features->add_option("audio", audio, "WAV file")->required()->check(CLI::ExistingFile);
  features->add_option("--feature", feature, "stft_power, chroma, mel, lms, nnlms or mfcc")->capture_default_str();
  features->add_option("--downbeats", downbeats, "Downbeat file; output the barwise matrix instead");
  features->add_option("--subdivision", subdivision, "Frames per bar")->capture_default_str();
  features->add_option("--out", out, "Output matrix (.csv or .bseg)")->required();

  CommonOptions seg_opts;
  std::string seg_audio, seg_downbeats, seg_annotations;
  auto* segment = app.add_subcommand("segment", "Segment one song");
  segment->add_option("audio", seg_audio, "WAV file")->required()->check(CLI::ExistingFile);
  segment->add_option("--downbeats", seg_downbeats, "Downbeat file")->required()->check(CLI::ExistingFile);
  segment->add_option("--annotations", seg_annotations, "Reference annotations")->check(CLI::ExistingFile);
  add_common(segment, seg_opts);
  segment->fallthrough();

  std::string estimated, eval_annotations, eval_downbeats;
  std::vector<double> eval_tolerances{0.5, 3.0};
  auto* eval = app.add_subcommand("eval", "Score estimated boundaries against annotations");
  eval->add_option("--estimated", estimated, "Estimated boundaries")->required()->check(CLI::ExistingFile);
  eval->add_option("--annotations", eval_annotations, "Reference annotations")->required()->check(CLI::ExistingFile);
  eval->add_option("--downbeats", eval_downbeats, "Align the reference on these downbeats first");
  eval->add_option("--tolerances", eval_tolerances, "Tolerances in seconds")->delimiter(',')->capture_default_str();

  CommonOptions batch_opts;
  std::string dataset;
  int jobs = 1;
  auto* batch = app.add_subcommand("batch", "Run every <dir>/<song>/{audio.wav,downbeats.txt,annotations.txt}");
  batch->add_option("dataset", dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  batch->add_option("--jobs", jobs, "Songs processed concurrently")->capture_default_str();
  add_common(batch, batch_opts);
  batch->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (features->parsed()) return run_features(audio, feature, downbeats, subdivision, out);
    if (eval->parsed()) return run_eval(estimated, eval_annotations, eval_downbeats, eval_tolerances);

    if (segment->parsed()) {
      auto base = make_config(seg_opts);
      base.audio = seg_audio;
      base.downbeats = seg_downbeats;
      base.annotations = seg_annotations;
      for (const auto& cfg : expand_sweep(base, seg_opts)) print_summary(run_song(cfg));
      return 0;
    }

    if (batch->parsed()) {
      bool failed = false;
      for (const auto& cfg : expand_sweep(make_config(batch_opts), batch_opts)) {
        const auto report = run_batch(dataset, cfg, jobs);
        if (!cfg.out_dir.empty()) write_batch_report(report, cfg.out_dir);
        for (const auto& r : report.results) print_summary(r);
        for (const auto& f : report.failures) std::cerr << "FAILED " << f.song_id << ": " << f.error << '\n';
        for (const auto& a : report.aggregate)
          std::cout << "mean over " << a.songs << " songs, tol " << a.tolerance << "s: P=" << a.precision
                    << " R=" << a.recall << " F=" << a.f_measure << '\n';
        failed = failed || !report.ok();
      }
      return failed ? 2 : 0;
    }
  } catch (const barseg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
