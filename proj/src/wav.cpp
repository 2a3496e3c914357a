#include "jackprobe/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace jackprobe {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

struct Format {
  std::uint16_t code = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> b) {
  require(b.size() >= 12 && tag_is(b, 0, "RIFF") && tag_is(b, 8, "WAVE"), "not a RIFF/WAVE file");

  Format fmt;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, b.size() - body);
    if (tag_is(b, pos, "fmt ")) {
      require(avail >= 16, "truncated fmt chunk");
      fmt.code = read_u16(b, body);
      fmt.channels = read_u16(b, body + 2);
      fmt.rate = read_u32(b, body + 4);
      fmt.block_align = read_u16(b, body + 12);
      fmt.bits = read_u16(b, body + 14);
      if (fmt.code == kFormatExtensible) {
        require(avail >= 26, "truncated extensible fmt chunk");
        fmt.code = read_u16(b, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      data = b.subspan(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }

  require(have_fmt, "missing fmt chunk");
  require(have_data, "missing data chunk");
  const bool pcm16 = fmt.code == kFormatPcm && fmt.bits == 16;
  const bool f32 = fmt.code == kFormatFloat && fmt.bits == 32;
  require(pcm16 || f32, "unsupported encoding",
          "format " + std::to_string(fmt.code) + ", " + std::to_string(fmt.bits) + " bits");
  require(fmt.channels == 1 || fmt.channels == 2, "unsupported channel count",
          std::to_string(fmt.channels));
  require(fmt.rate > 0, "invalid sample rate");

  const std::size_t width = fmt.bits / 8;
  const std::size_t frame_bytes = width * fmt.channels;
  const std::size_t frames = data.size() / frame_bytes;
  require(frames > 0, "zero-length data chunk");

  AudioBuffer::Samples s(static_cast<Eigen::Index>(frames), fmt.channels);
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::size_t at = i * frame_bytes + c * width;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(read_u16(data, at)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(data, at);
        float f;
        std::memcpy(&f, &raw, sizeof f);
        v = f;
      }
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return AudioBuffer(std::move(s), static_cast<int>(fmt.rate));
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, WavEncoding encoding) {
  require(!buffer.empty(), "empty buffer");
  const std::uint16_t channels = static_cast<std::uint16_t>(buffer.channels());
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(buffer.length()) * block;
  const auto rate = static_cast<std::uint32_t>(buffer.sample_rate());

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  const auto& s = buffer.samples();
  for (Eigen::Index i = 0; i < buffer.length(); ++i) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      const double x = s(i, c);
      if (encoding == WavEncoding::pcm16) {
        const double clamped = std::clamp(x, -1.0, 1.0);
        const long q = std::clamp(std::lround(clamped * 32768.0), -32768L, 32767L);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        const float f = static_cast<float>(x);
        std::uint32_t raw;
        std::memcpy(&raw, &f, sizeof raw);
        put_u32(out, raw);
      }
    }
  }
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "unreadable file", path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.what(), path.string() + (e.detail().empty() ? "" : ": " + e.detail()));
  }
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path, WavEncoding encoding) {
  const auto bytes = encode_wav(buffer, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "unwritable path", path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), "write failed", path.string());
}

}  // namespace jackprobe
