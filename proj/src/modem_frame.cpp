#include <boost/crc.hpp>

#include "jackprobe/modem.hpp"

namespace jackprobe {
namespace {

struct LfsrTaps {
  int degree;
  std::vector<int> taps;
};

// Primitive feedback polynomials, taps counted from 1.
const std::vector<LfsrTaps>& primitive_taps() {
  static const std::vector<LfsrTaps> table = {
      {2, {2, 1}},   {3, {3, 2}},    {4, {4, 3}},     {5, {5, 3}},          {6, {6, 5}},
      {7, {7, 6}},   {8, {8, 6, 5, 4}}, {9, {9, 5}},  {10, {10, 7}},        {11, {11, 9}},
      {12, {12, 6, 4, 1}}, {13, {13, 4, 3, 1}}, {14, {14, 5, 3, 1}}, {15, {15, 14}},
      {16, {16, 15, 13, 4}},
  };
  return table;
}

void push_bits(Bits& out, std::uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
}

std::uint64_t read_bits(std::span<const std::uint8_t> bits, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 1) | (bits[at + static_cast<std::size_t>(i)] & 1u);
  return v;
}

}  // namespace

Bits mls_sequence(int length) {
  for (const auto& p : primitive_taps()) {
    if ((1 << p.degree) - 1 != length) continue;
    std::uint32_t state = (1u << p.degree) - 1;
    Bits out;
    out.reserve(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
      out.push_back(static_cast<std::uint8_t>(state & 1u));
      std::uint32_t fb = 0;
      for (int t : p.taps) fb ^= (state >> (p.degree - t)) & 1u;
      state = (state >> 1) | (fb << (p.degree - 1));
    }
    return out;
  }
  throw Error("preamble length must be 2^m - 1 with 2 <= m <= 16", std::to_string(length));
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

Bits frame_body_bits(std::span<const std::uint8_t> payload) {
  require(payload.size() <= kMaxPayload, "payload too long", std::to_string(payload.size()) + " bytes");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(payload.size() + 2);
  bytes.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
  bytes.push_back(static_cast<std::uint8_t>(payload.size() & 0xFF));
  bytes.insert(bytes.end(), payload.begin(), payload.end());

  Bits out;
  out.reserve(bytes.size() * 8 + 32);
  for (auto b : bytes) push_bits(out, b, 8);
  push_bits(out, crc32(bytes), 32);
  return out;
}

Bits serialize_frame(std::span<const std::uint8_t> payload, int preamble_len) {
  Bits out = mls_sequence(preamble_len);
  const Bits body = frame_body_bits(payload);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::size_t frame_bit_count(std::size_t payload_bytes, int preamble_len) {
  return static_cast<std::size_t>(preamble_len) + 16 + 8 * payload_bytes + 32;
}

std::string to_string(FrameStatus status) {
  switch (status) {
    case FrameStatus::ok: return "ok";
    case FrameStatus::no_preamble: return "no preamble found";
    case FrameStatus::crc_mismatch: return "CRC mismatch";
    case FrameStatus::truncated: return "length field exceeds remaining signal";
  }
  return "unknown";
}

FrameParse parse_frame_body(std::span<const std::uint8_t> bits) {
  FrameParse result;
  if (bits.size() < 48) {
    result.status = FrameStatus::truncated;
    return result;
  }
  const auto len = static_cast<std::size_t>(read_bits(bits, 0, 16));
  if (bits.size() < 48 + 8 * len) {
    result.status = FrameStatus::truncated;
    return result;
  }
  std::vector<std::uint8_t> bytes{static_cast<std::uint8_t>(len >> 8), static_cast<std::uint8_t>(len & 0xFF)};
  for (std::size_t i = 0; i < len; ++i)
    bytes.push_back(static_cast<std::uint8_t>(read_bits(bits, 16 + 8 * i, 8)));
  result.payload.assign(bytes.begin() + 2, bytes.end());
  result.crc_received = static_cast<std::uint32_t>(read_bits(bits, 16 + 8 * len, 32));
  result.crc_computed = crc32(bytes);
  result.status = result.crc_received == result.crc_computed ? FrameStatus::ok : FrameStatus::crc_mismatch;
  return result;
}

}  // namespace jackprobe
