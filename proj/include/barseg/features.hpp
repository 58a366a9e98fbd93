#pragma once

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "barseg/audio.hpp"

namespace barseg {

enum class FeatureKind { stft_power, chroma, mel, lms, nnlms, mfcc };

std::string_view to_string(FeatureKind kind) noexcept;
FeatureKind parse_feature_kind(std::string_view name);

/// True for kinds whose entries are guaranteed >= 0.
bool is_nonnegative(FeatureKind kind) noexcept;

/// Frequency x time matrix. Column t is the frame centered on sample t * hop.
struct Spectrogram {
  Eigen::MatrixXd values;
  int hop = 32;
  int n_fft = 2048;
  double sample_rate = 44100.0;
  FeatureKind kind = FeatureKind::stft_power;

  Eigen::Index bins() const noexcept { return values.rows(); }
  Eigen::Index frames() const noexcept { return values.cols(); }
  double frame_time(Eigen::Index t) const noexcept { return static_cast<double>(t * hop) / sample_rate; }
};

struct StftParams {
  int n_fft = 2048;
  int hop = 32;
};

/// 1 + floor(n_samples / hop): the number of centered frames.
Eigen::Index frame_count(std::size_t n_samples, int hop);

/// Power spectrogram |FFT|^2 with a periodic Hann window and reflect-padded centered frames.
Spectrogram stft_power(const AudioSignal& signal, const StftParams& params = {});

/// Same as stft_power but only for the listed frame indices (columns in the given order).
Spectrogram stft_power_frames(const AudioSignal& signal, std::span<const Eigen::Index> frames,
                              const StftParams& params = {});

/// Slaney-style mel scale (linear below 1 kHz, logarithmic above).
double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// n_mels x (n_fft/2 + 1) triangular filterbank with area normalization.
Eigen::MatrixXd mel_filterbank(double sample_rate, int n_fft, int n_mels, double fmin, double fmax);

/// Orthonormal DCT-II matrix (n x n); its transpose is the inverse transform.
Eigen::MatrixXd dct_matrix(int n);

struct MelParams {
  int n_mels = 80;
  double fmin = 80.0;
  double fmax = 16000.0;
};

inline constexpr double kLogFloor = 1e-10;

Spectrogram mel_spectrogram(const Spectrogram& power, const MelParams& params = {});

/// 10 * log10(max(mel, 1e-10)).
Spectrogram lms(const Spectrogram& mel);

/// ln(mel + 1).
Spectrogram nnlms(const Spectrogram& mel);

/// 12 pitch classes (C first) at A4 = 440 Hz. Each bin's energy goes to the pitch
/// class of the spectral peak it belongs to; peak frequencies are refined by
/// parabolic interpolation of the log power.
Spectrogram chroma(const Spectrogram& power);

/// First n_coeffs orthonormal DCT-II coefficients of a full-band 128-filter
/// log-mel (dB) spectrogram.
Spectrogram mfcc(const Spectrogram& power, int n_coeffs = 32, int n_mels = 128);

/// Maps a power spectrogram to the requested feature kind.
Spectrogram feature_from_power(const Spectrogram& power, FeatureKind kind);

/// Number of rows produced for the given feature kind.
int feature_bins(FeatureKind kind, const StftParams& params = {});

/// Whole-signal feature computed in bounded-memory blocks of frames.
Spectrogram compute_feature(const AudioSignal& signal, FeatureKind kind, const StftParams& params = {});

/// Feature columns for selected frames only; column i equals column frames[i]
/// of compute_feature(signal, kind, params).
Spectrogram compute_feature_frames(const AudioSignal& signal, FeatureKind kind, std::span<const Eigen::Index> frames,
                                   const StftParams& params = {});

}  // namespace barseg
