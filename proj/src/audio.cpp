#include "barseg/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "barseg/error.hpp"

namespace barseg {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) throw FormatError(std::string("WAV: truncated ") + what);
  }

  std::string tag() {
    require(4, "chunk header");
    std::string t(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }

  std::uint16_t u16() {
    require(2, "header field");
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    require(4, "header field");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }

  std::span<const unsigned char> take(std::size_t n, const char* what) {
    require(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) { pos_ += std::min(n, remaining()); }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

FormatChunk parse_fmt(std::span<const unsigned char> body) {
  ByteReader r(body);
  FormatChunk fmt;
  fmt.format = r.u16();
  fmt.channels = r.u16();
  fmt.sample_rate = r.u32();
  r.u32();  // byte rate
  r.u16();  // block align
  fmt.bits_per_sample = r.u16();
  if (fmt.format == kFormatExtensible) {
    const auto cb_size = r.u16();
    if (cb_size < 22) throw FormatError("WAV: extensible format chunk too short");
    r.u16();  // valid bits
    r.u32();  // channel mask
    // The first two bytes of the sub-format GUID carry the actual format tag.
    fmt.format = r.u16();
  }
  return fmt;
}

double read_sample(const unsigned char* p, const FormatChunk& fmt) {
  if (fmt.format == kFormatPcm) {
    const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
    return static_cast<double>(v) / 32768.0;
  }
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | p[i];
  return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

AudioSignal decode_wav(std::span<const unsigned char> bytes) {
  ByteReader r(bytes);
  if (r.tag() != "RIFF") throw FormatError("WAV: missing RIFF header");
  r.u32();
  if (r.tag() != "WAVE") throw FormatError("WAV: missing WAVE tag");

  FormatChunk fmt;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    const auto id = r.tag();
    const auto size = r.u32();
    if (id == "fmt ") {
      fmt = parse_fmt(r.take(size, "fmt chunk"));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("WAV: data chunk before fmt chunk");
      const bool pcm16 = fmt.format == kFormatPcm && fmt.bits_per_sample == 16;
      const bool float32 = fmt.format == kFormatFloat && fmt.bits_per_sample == 32;
      if (!pcm16 && !float32)
        throw FormatError("WAV: unsupported codec (format " + std::to_string(fmt.format) + ", " +
                          std::to_string(fmt.bits_per_sample) + " bits)");
      if (fmt.channels < 1 || fmt.channels > 2) throw FormatError("WAV: only mono or stereo is supported");
      if (fmt.sample_rate == 0) throw FormatError("WAV: zero sample rate");

      const std::size_t frame_bytes = static_cast<std::size_t>(fmt.channels) * fmt.bits_per_sample / 8;
      if (size % frame_bytes != 0) throw FormatError("WAV: data size is not a whole number of frames");
      const auto data = r.take(size, "data chunk");

      AudioSignal signal;
      signal.sample_rate = fmt.sample_rate;
      const std::size_t n = size / frame_bytes;
      const std::size_t sample_bytes = fmt.bits_per_sample / 8;
      signal.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < fmt.channels; ++c)
          acc += read_sample(data.data() + i * frame_bytes + c * sample_bytes, fmt);
        const double v = acc / fmt.channels;
        if (!std::isfinite(v)) throw FormatError("WAV: non-finite sample at index " + std::to_string(i));
        signal.samples[i] = v;
      }
      return signal;
    } else {
      r.skip(size + (size & 1u));
    }
  }
  throw FormatError(have_fmt ? "WAV: missing data chunk" : "WAV: missing fmt chunk");
}

AudioSignal load_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate));
  const auto data_size = static_cast<std::uint32_t>(signal.samples.size() * 2);

  auto u32 = [&os](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto u16 = [&os](std::uint16_t v) {
    os.put(static_cast<char>(v & 0xff));
    os.put(static_cast<char>(v >> 8));
  };

  os.write("RIFF", 4);
  u32(36 + data_size);
  os.write("WAVEfmt ", 8);
  u32(16);
  u16(kFormatPcm);
  u16(1);
  u32(rate);
  u32(rate * 2);
  u16(2);
  u16(16);
  os.write("data", 4);
  u32(data_size);
  for (double x : signal.samples) {
    const double scaled = std::round(x * 32768.0);
    u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0))));
  }
}

}  // namespace barseg
