#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "barseg/autoencoder.hpp"
#include "barseg/error.hpp"
#include "barseg/pipeline.hpp"

namespace py = pybind11;
using namespace barseg;

namespace {

AudioSignal to_signal(std::vector<double> samples, double sample_rate) {
  return AudioSignal{std::move(samples), sample_rate};
}

py::dict hit_rate_dict(const HitRate& h) {
  py::dict d;
  d["tol"] = h.tolerance;
  d["precision"] = h.precision;
  d["recall"] = h.recall;
  d["f_measure"] = h.f_measure;
  d["n_est"] = h.n_est;
  d["n_ref"] = h.n_ref;
  d["n_matched"] = h.n_matched;
  d["matches"] = h.matches;
  if (!h.warning.empty()) d["warning"] = h.warning;
  return d;
}

}  // namespace

PYBIND11_MODULE(_barseg, m) {
  m.doc() = "Barwise compression and dynamic-programming segmentation of music.";

  auto base = py::register_exception<Error>(m, "BarsegError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<StageError>(m, "StageError", base.ptr());

  m.def(
      "load_wav",
      [](const std::filesystem::path& path) {
        auto s = load_wav(path);
        return py::make_tuple(Eigen::Map<const Eigen::VectorXd>(s.samples.data(), static_cast<Eigen::Index>(s.size())),
                              s.sample_rate);
      },
      py::arg("path"), "Decode a PCM WAV file to (mono samples, sample_rate).");

  m.def(
      "feature",
      [](std::vector<double> samples, double sample_rate, const std::string& kind, int n_fft, int hop) {
        return compute_feature(to_signal(std::move(samples), sample_rate), parse_feature_kind(kind),
                               StftParams{n_fft, hop})
            .values;
      },
      py::arg("samples"), py::arg("sample_rate") = 44100.0, py::arg("kind") = "nnlms", py::arg("n_fft") = 2048,
      py::arg("hop") = 32, "Feature matrix, bins x frames.");

  m.def(
      "barwise_tf",
      [](std::vector<double> samples, std::vector<double> downbeats, double sample_rate, const std::string& kind,
         int subdivision) {
        return barwise_tf_from_audio(to_signal(std::move(samples), sample_rate), parse_feature_kind(kind),
                                     BarGrid(std::move(downbeats)), subdivision)
            .values;
      },
      py::arg("samples"), py::arg("downbeats"), py::arg("sample_rate") = 44100.0, py::arg("kind") = "nnlms",
      py::arg("subdivision") = 96, "Barwise TF matrix, one vectorized bar per row (frequency-major).");

  m.def(
      "pca",
      [](const Eigen::MatrixXd& X, int d_c) {
        const auto model = pca_compress(X, d_c);
        return py::dict(py::arg("W") = model.W, py::arg("H") = model.H, py::arg("mu") = model.mu);
      },
      py::arg("X"), py::arg("d_c"), "PCA of X (one bar per column). Returns W, H and mu.");

  m.def(
      "nmf",
      [](const Eigen::MatrixXd& X, int d_c, int max_iters, double tol, std::uint64_t seed) {
        const auto model = nmf_compress(X, d_c, {max_iters, tol, seed});
        return py::dict(py::arg("W") = model.W, py::arg("H") = model.H, py::arg("loss_trace") = model.loss_trace);
      },
      py::arg("X"), py::arg("d_c"), py::arg("max_iters") = 500, py::arg("tol") = 1e-8, py::arg("seed") = 42,
      "HALS NMF of a nonnegative X (one bar per column).");

  m.def(
      "train_autoencoder",
      [](const Eigen::MatrixXd& tf, int bins, int subdivision, int d_c, int max_epochs, int batch_size,
         std::uint64_t seed) {
        if (tf.cols() != static_cast<Eigen::Index>(bins) * subdivision)
          throw InvalidArgument("train_autoencoder: rows must have bins * subdivision entries");
        std::vector<Eigen::MatrixXd> bars;
        for (Eigen::Index i = 0; i < tf.rows(); ++i) {
          const Eigen::RowVectorXd row = tf.row(i);
          bars.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              row.data(), bins, subdivision));
        }
        AEConfig cfg;
        cfg.d_c = d_c;
        cfg.max_epochs = max_epochs;
        cfg.batch_size = batch_size;
        cfg.seed = seed;
        const auto r = [&] {
          py::gil_scoped_release release;
          return train_single_song(bars, cfg);
        }();
        return py::dict(py::arg("embedding") = r.embedding, py::arg("loss_trace") = r.loss_trace,
                        py::arg("lr_trace") = r.lr_trace, py::arg("initial_loss") = r.initial_loss,
                        py::arg("best_loss") = r.best_loss, py::arg("best_epoch") = r.best_epoch);
      },
      py::arg("tf"), py::arg("bins"), py::arg("subdivision") = 96, py::arg("d_c") = 8, py::arg("max_epochs") = 1000,
      py::arg("batch_size") = 8, py::arg("seed") = 42,
      "Single-song autoencoder on a barwise TF matrix; the embedding is d_c x bars.");

  m.def("cosine_autosimilarity", &cosine_autosimilarity, py::arg("Z"));
  m.def("kernel", &kernel, py::arg("n"));
  m.def("penalty", &penalty, py::arg("n"));
  m.def("segment_cost", &segment_cost, py::arg("A"), py::arg("b1"), py::arg("b2"));
  m.def("compute_ck8max", &compute_ck8max, py::arg("A"));
  m.def("segment_score", &segment_score, py::arg("A"), py::arg("b1"), py::arg("b2"), py::arg("c_k8_max"));
  m.def(
      "dp_segment",
      [](const Eigen::MatrixXd& A, int max_segment) {
        const auto seg = dp_segment(A, max_segment);
        return py::make_tuple(seg.boundaries_bars, seg.total_score);
      },
      py::arg("A"), py::arg("max_segment") = 32, "Optimal bar boundaries and their total score.");

  m.def(
      "hit_rate",
      [](std::vector<double> est, std::vector<double> ref, double tol) {
        return hit_rate_dict(hit_rate(BoundarySet(std::move(est)), BoundarySet(std::move(ref)), tol));
      },
      py::arg("est"), py::arg("ref"), py::arg("tol"));
  m.def(
      "align_to_downbeats",
      [](std::vector<double> times, std::vector<double> downbeats) {
        return align_to_downbeats(BoundarySet(std::move(times)), BarGrid(std::move(downbeats))).times();
      },
      py::arg("times"), py::arg("downbeats"));
  m.def(
      "load_annotations", [](const std::filesystem::path& path) { return load_annotations(path).times(); },
      py::arg("path"));

  m.def(
      "run_song_json",
      [](const std::filesystem::path& audio, const std::filesystem::path& downbeats,
         std::optional<std::filesystem::path> annotations, const std::string& feature, const std::string& compressor,
         int d_c, int subdivision, int max_segment, std::vector<double> tolerances, std::uint64_t seed,
         int ae_max_epochs, std::optional<std::filesystem::path> out_dir) {
        PipelineConfig cfg;
        cfg.audio = audio;
        cfg.downbeats = downbeats;
        if (annotations) cfg.annotations = *annotations;
        cfg.feature = parse_feature_kind(feature);
        cfg.compressor = parse_compressor(compressor);
        cfg.d_c = d_c;
        cfg.subdivision = subdivision;
        cfg.max_segment = max_segment;
        cfg.tolerances = std::move(tolerances);
        cfg.seed = seed;
        cfg.ae_max_epochs = ae_max_epochs;
        if (out_dir) cfg.out_dir = *out_dir;
        cfg.song_id = audio.parent_path().filename().string();
        py::gil_scoped_release release;
        return result_json(run_song(cfg));
      },
      py::arg("audio"), py::arg("downbeats"), py::arg("annotations") = py::none(), py::arg("feature") = "nnlms",
      py::arg("compressor") = "pca", py::arg("d_c") = 8, py::arg("subdivision") = 96, py::arg("max_segment") = 32,
      py::arg("tolerances") = std::vector<double>{0.5, 3.0}, py::arg("seed") = 42, py::arg("ae_max_epochs") = 1000,
      py::arg("out_dir") = py::none());
}
