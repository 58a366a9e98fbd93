#include "barseg/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "barseg/error.hpp"

namespace barseg {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr Eigen::Index kFrameBlock = 1024;

// numpy "reflect" padding: mirror about the edge samples without repeating them.
std::size_t reflect_index(std::int64_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::int64_t>(2 * (n - 1));
  i = std::abs(i) % period;
  if (i >= static_cast<std::int64_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

std::vector<double> hann_periodic(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

void check_stft_params(const AudioSignal& signal, const StftParams& params) {
  if (params.hop < 1 || params.n_fft < params.hop)
    throw InvalidArgument("stft: require n_fft >= hop >= 1");
  if (params.n_fft % 2 != 0) throw InvalidArgument("stft: n_fft must be even");
  if (signal.samples.empty()) throw InvalidArgument("stft: signal has no samples");
  if (!(signal.sample_rate > 0)) throw InvalidArgument("stft: sample rate must be positive");
}

Spectrogram with_values(const Spectrogram& like, Eigen::MatrixXd values, FeatureKind kind) {
  Spectrogram out;
  out.values = std::move(values);
  out.hop = like.hop;
  out.n_fft = like.n_fft;
  out.sample_rate = like.sample_rate;
  out.kind = kind;
  return out;
}

void require_kind(const Spectrogram& s, FeatureKind kind, const char* op) {
  if (s.kind != kind)
    throw InvalidArgument(std::string(op) + ": expected a " + std::string(to_string(kind)) + " spectrogram, got " +
                          std::string(to_string(s.kind)));
}

int pitch_class(double hz) {
  const double midi = 69.0 + 12.0 * std::log2(hz / 440.0);
  const auto note = static_cast<long>(std::lround(midi));
  return static_cast<int>(((note % 12) + 12) % 12);
}

// For every bin, the local maximum reached by steepest ascent over neighbouring bins.
void assign_peaks(const double* p, Eigen::Index n, std::vector<Eigen::Index>& root,
                  std::vector<Eigen::Index>& stack) {
  constexpr Eigen::Index kUnknown = -1;
  std::fill(root.begin(), root.end(), kUnknown);
  auto step = [p, n](Eigen::Index k) {
    const double left = k > 0 ? p[k - 1] : -1.0;
    const double right = k + 1 < n ? p[k + 1] : -1.0;
    if (left > p[k] && left >= right) return k - 1;
    if (right > p[k]) return k + 1;
    return k;
  };
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index cur = k;
    stack.clear();
    while (root[cur] == kUnknown) {
      const auto next = step(cur);
      if (next == cur) {
        root[cur] = cur;
        break;
      }
      stack.push_back(cur);
      cur = next;
    }
    for (auto s : stack) root[s] = root[cur];
  }
}

}  // namespace

std::string_view to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::stft_power: return "stft_power";
    case FeatureKind::chroma: return "chroma";
    case FeatureKind::mel: return "mel";
    case FeatureKind::lms: return "lms";
    case FeatureKind::nnlms: return "nnlms";
    case FeatureKind::mfcc: return "mfcc";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view name) {
  for (auto k : {FeatureKind::stft_power, FeatureKind::chroma, FeatureKind::mel, FeatureKind::lms, FeatureKind::nnlms,
                 FeatureKind::mfcc})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown feature '" + std::string(name) + "'");
}

bool is_nonnegative(FeatureKind kind) noexcept {
  return kind == FeatureKind::stft_power || kind == FeatureKind::chroma || kind == FeatureKind::mel ||
         kind == FeatureKind::nnlms;
}

Eigen::Index frame_count(std::size_t n_samples, int hop) {
  return 1 + static_cast<Eigen::Index>(n_samples / static_cast<std::size_t>(hop));
}

Spectrogram stft_power_frames(const AudioSignal& signal, std::span<const Eigen::Index> frames,
                              const StftParams& params) {
  check_stft_params(signal, params);
  const int n_fft = params.n_fft;
  const Eigen::Index n_frames = frame_count(signal.size(), params.hop);
  const auto window = hann_periodic(n_fft);
  const std::size_t n = signal.size();

  Spectrogram out;
  out.hop = params.hop;
  out.n_fft = n_fft;
  out.sample_rate = signal.sample_rate;
  out.kind = FeatureKind::stft_power;
  out.values.resize(n_fft / 2 + 1, static_cast<Eigen::Index>(frames.size()));

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buffer(n_fft);
  std::vector<std::complex<double>> spectrum;

  for (std::size_t col = 0; col < frames.size(); ++col) {
    const auto t = frames[col];
    if (t < 0 || t >= n_frames) throw InvalidArgument("stft: frame index " + std::to_string(t) + " out of range");
    const std::int64_t start = static_cast<std::int64_t>(t) * params.hop - n_fft / 2;
    for (int m = 0; m < n_fft; ++m) {
      const std::int64_t j = start + m;
      const std::size_t idx = (j >= 0 && static_cast<std::size_t>(j) < n) ? static_cast<std::size_t>(j)
                                                                           : reflect_index(j, n);
      buffer[m] = signal.samples[idx] * window[m];
    }
    fft.fwd(spectrum, buffer);
    for (int k = 0; k <= n_fft / 2; ++k) out.values(k, static_cast<Eigen::Index>(col)) = std::norm(spectrum[k]);
  }
  return out;
}

Spectrogram stft_power(const AudioSignal& signal, const StftParams& params) {
  check_stft_params(signal, params);
  std::vector<Eigen::Index> frames(static_cast<std::size_t>(frame_count(signal.size(), params.hop)));
  std::iota(frames.begin(), frames.end(), Eigen::Index{0});
  return stft_power_frames(signal, frames, params);
}

double hz_to_mel(double hz) noexcept {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz >= min_log_hz) return min_log_mel + std::log(hz / min_log_hz) / logstep;
  return hz / f_sp;
}

double mel_to_hz(double mel) noexcept {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel >= min_log_mel) return min_log_hz * std::exp(logstep * (mel - min_log_mel));
  return f_sp * mel;
}

Eigen::MatrixXd mel_filterbank(double sample_rate, int n_fft, int n_mels, double fmin, double fmax) {
  if (n_mels < 1) throw InvalidArgument("mel: n_mels must be positive");
  if (fmin < 0 || fmin >= fmax) throw InvalidArgument("mel: require 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0)
    throw InvalidArgument("mel: fmax " + std::to_string(fmax) + " Hz exceeds Nyquist " +
                          std::to_string(sample_rate / 2.0) + " Hz");
  const int n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    const double norm = 2.0 / (hi - lo);
    for (int k = 0; k < n_bins; ++k) {
      const double hz = k * sample_rate / n_fft;
      const double rising = (hz - lo) / (center - lo);
      const double falling = (hi - hz) / (hi - center);
      fb(m, k) = norm * std::max(0.0, std::min(rising, falling));
    }
  }
  return fb;
}

Eigen::MatrixXd dct_matrix(int n) {
  if (n < 1) throw InvalidArgument("dct: size must be positive");
  Eigen::MatrixXd d(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) d(k, i) = scale * std::cos(kPi * k * (2 * i + 1) / (2.0 * n));
  }
  return d;
}

Spectrogram mel_spectrogram(const Spectrogram& power, const MelParams& params) {
  require_kind(power, FeatureKind::stft_power, "mel_spectrogram");
  const auto fb = mel_filterbank(power.sample_rate, power.n_fft, params.n_mels, params.fmin, params.fmax);
  if (fb.cols() != power.bins()) throw InvalidArgument("mel_spectrogram: bin count does not match n_fft");
  Eigen::MatrixXd mel = fb * power.values;
  return with_values(power, std::move(mel), FeatureKind::mel);
}

Spectrogram lms(const Spectrogram& mel) {
  require_kind(mel, FeatureKind::mel, "lms");
  Eigen::MatrixXd v = mel.values.unaryExpr([](double x) { return 10.0 * std::log10(std::max(x, kLogFloor)); });
  return with_values(mel, std::move(v), FeatureKind::lms);
}

Spectrogram nnlms(const Spectrogram& mel) {
  require_kind(mel, FeatureKind::mel, "nnlms");
  Eigen::MatrixXd v = mel.values.unaryExpr([](double x) { return std::log1p(x); });
  return with_values(mel, std::move(v), FeatureKind::nnlms);
}

Spectrogram chroma(const Spectrogram& power) {
  require_kind(power, FeatureKind::stft_power, "chroma");
  constexpr double kLowestPitchHz = 27.5;  // A0
  const Eigen::Index n = power.bins();
  const double bin_hz = power.sample_rate / power.n_fft;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(12, power.frames());
  std::vector<Eigen::Index> root(static_cast<std::size_t>(n)), stack;
  std::vector<int> peak_class(static_cast<std::size_t>(n));

  for (Eigen::Index t = 0; t < power.frames(); ++t) {
    const double* p = power.values.col(t).data();
    assign_peaks(p, n, root, stack);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (root[k] != k) continue;
      double offset = 0.0;
      if (k > 0 && k + 1 < n && p[k - 1] > 0 && p[k] > 0 && p[k + 1] > 0) {
        const double a = std::log(p[k - 1]), b = std::log(p[k]), c = std::log(p[k + 1]);
        const double denom = a - 2.0 * b + c;
        if (denom < 0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
      }
      const double hz = (k + offset) * bin_hz;
      peak_class[k] = hz >= kLowestPitchHz ? pitch_class(hz) : -1;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      const int pc = peak_class[root[k]];
      if (pc >= 0) out(pc, t) += p[k];
    }
  }
  return with_values(power, std::move(out), FeatureKind::chroma);
}

Spectrogram mfcc(const Spectrogram& power, int n_coeffs, int n_mels) {
  require_kind(power, FeatureKind::stft_power, "mfcc");
  if (n_coeffs < 1 || n_coeffs > n_mels) throw InvalidArgument("mfcc: require 1 <= n_coeffs <= n_mels");
  const auto log_mel = lms(mel_spectrogram(power, {n_mels, 0.0, power.sample_rate / 2.0}));
  Eigen::MatrixXd coeffs = dct_matrix(n_mels).topRows(n_coeffs) * log_mel.values;
  return with_values(power, std::move(coeffs), FeatureKind::mfcc);
}

Spectrogram feature_from_power(const Spectrogram& power, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::stft_power: return power;
    case FeatureKind::chroma: return chroma(power);
    case FeatureKind::mel: return mel_spectrogram(power);
    case FeatureKind::lms: return lms(mel_spectrogram(power));
    case FeatureKind::nnlms: return nnlms(mel_spectrogram(power));
    case FeatureKind::mfcc: return mfcc(power);
  }
  throw InvalidArgument("unknown feature kind");
}

int feature_bins(FeatureKind kind, const StftParams& params) {
  switch (kind) {
    case FeatureKind::stft_power: return params.n_fft / 2 + 1;
    case FeatureKind::chroma: return 12;
    case FeatureKind::mel:
    case FeatureKind::lms:
    case FeatureKind::nnlms: return MelParams{}.n_mels;
    case FeatureKind::mfcc: return 32;
  }
  return 0;
}

Spectrogram compute_feature_frames(const AudioSignal& signal, FeatureKind kind, std::span<const Eigen::Index> frames,
                                   const StftParams& params) {
  check_stft_params(signal, params);
  Spectrogram out;
  out.hop = params.hop;
  out.n_fft = params.n_fft;
  out.sample_rate = signal.sample_rate;
  out.kind = kind;
  out.values.resize(feature_bins(kind, params), static_cast<Eigen::Index>(frames.size()));
  for (std::size_t start = 0; start < frames.size(); start += kFrameBlock) {
    const auto count = std::min<std::size_t>(kFrameBlock, frames.size() - start);
    const auto block = feature_from_power(stft_power_frames(signal, frames.subspan(start, count), params), kind);
    out.values.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(count)) = block.values;
  }
  return out;
}

Spectrogram compute_feature(const AudioSignal& signal, FeatureKind kind, const StftParams& params) {
  check_stft_params(signal, params);
  std::vector<Eigen::Index> frames(static_cast<std::size_t>(frame_count(signal.size(), params.hop)));
  std::iota(frames.begin(), frames.end(), Eigen::Index{0});
  return compute_feature_frames(signal, kind, frames, params);
}

}  // namespace barseg
