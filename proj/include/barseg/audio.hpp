#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace barseg {

/// Mono audio, amplitudes in [-1, 1].
struct AudioSignal {
  std::vector<double> samples;
  double sample_rate = 44100.0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Decodes a RIFF/WAVE file holding 16-bit integer or 32-bit float PCM.
/// Multichannel input is averaged to mono; int16 samples are scaled by 1/32768.
/// Throws FormatError for other codecs, malformed headers and truncated data.
AudioSignal load_wav(const std::filesystem::path& path);
AudioSignal decode_wav(std::span<const unsigned char> bytes);

/// Writes mono 16-bit PCM. Samples are clipped to [-1, 32767/32768].
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

}  // namespace barseg
