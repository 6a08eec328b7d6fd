#include "nsf/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "nsf/errors.hpp"

namespace nsf {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void append_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(v & 0xFF);
  out.push_back((v >> 8) & 0xFF);
  out.push_back((v >> 16) & 0xFF);
  out.push_back((v >> 24) & 0xFF);
}

void append_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back((v >> 8) & 0xFF);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FileError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FileError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) break;
    if (std::memcmp(id, "fmt ", 4) == 0 && size >= 16) {
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      sample_rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 40) {
        // First two bytes of the SubFormat GUID carry the actual format.
        format = read_u16(bytes.data() + body + 24);
      }
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }
  if (channels == 0 || sample_rate == 0 || data == nullptr) {
    throw FileError("missing fmt/data chunk in WAV file: " + path);
  }

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw FileError("unsupported WAV encoding (need 16-bit PCM or 32-bit "
                    "float): " + path);
  }
  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_size / frame_bytes;

  WavData wav;
  wav.sample_rate = sample_rate;
  wav.samples.resize(static_cast<Eigen::Index>(frames), channels);
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        std::int16_t raw;
        std::memcpy(&raw, p, 2);
        v = raw / 32768.0;
      } else {
        float raw;
        std::memcpy(&raw, p, 4);
        v = raw;
      }
      wav.samples(static_cast<Eigen::Index>(i), c) = v;
    }
  }
  return wav;
}

void write_wav(const std::string& path, const WavData& data, int bits) {
  if (bits != 16 && bits != 32) {
    throw ConfigError("write_wav: bits must be 16 or 32");
  }
  if (data.samples.size() == 0 || !(data.sample_rate > 0.0)) {
    throw ConfigError("write_wav: empty signal or invalid sample rate");
  }
  const auto frames = data.samples.rows();
  const auto channels = static_cast<std::uint16_t>(data.samples.cols());
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * block);
  const std::uint32_t rate = static_cast<std::uint32_t>(
      std::lround(data.sample_rate));

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  const char* riff = "RIFF";
  out.insert(out.end(), riff, riff + 4);
  append_u32(out, 36 + data_size);
  const char* wavefmt = "WAVEfmt ";
  out.insert(out.end(), wavefmt, wavefmt + 8);
  append_u32(out, 16);
  append_u16(out, bits == 16 ? kFormatPcm : kFormatFloat);
  append_u16(out, channels);
  append_u32(out, rate);
  append_u32(out, rate * block);
  append_u16(out, block);
  append_u16(out, static_cast<std::uint16_t>(bits));
  const char* datatag = "data";
  out.insert(out.end(), datatag, datatag + 4);
  append_u32(out, data_size);
  for (Eigen::Index i = 0; i < frames; ++i) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      const double v = data.samples(i, c);
      if (bits == 16) {
        const double clamped = std::clamp(v, -1.0, 32767.0 / 32768.0);
        const auto raw = static_cast<std::int16_t>(
            std::lround(clamped * 32768.0));
        append_u16(out, static_cast<std::uint16_t>(raw));
      } else {
        const float raw = static_cast<float>(v);
        unsigned char buf[4];
        std::memcpy(buf, &raw, 4);
        out.insert(out.end(), buf, buf + 4);
      }
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw FileError("cannot write WAV file: " + path);
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw FileError("short write on WAV file: " + path);
}

}  // namespace nsf
