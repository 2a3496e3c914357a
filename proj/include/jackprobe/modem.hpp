#pragma once

// Multi-band on-off keying modem for the near-ultrasonic band, with CRC-32
// framing and a BER harness over the channel simulator.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jackprobe/audio.hpp"
#include "jackprobe/capacity.hpp"
#include "jackprobe/channel.hpp"

namespace jackprobe {

struct ModemConfig {
  double f_lo = 14000.0;
  double f_hi = 21000.0;
  double band_width = 100.0;
  double symbol_ms = 20.0;
  int sample_rate = 44100;
  int preamble_len = 63;
  double amplitude_per_band = 0.01;

  void validate() const;
  int band_count() const;
  double raw_bit_rate() const { return band_count() * 1000.0 / symbol_ms; }
  Eigen::Index symbol_samples() const;
  double band_center(int band) const { return f_lo + (band + 0.5) * band_width; }
};

using BandSet = std::vector<int>;  // indices into the config's band grid, ascending

BandSet all_bands(const ModemConfig& config);

/// Bands of [f_lo, f_hi] whose profiled SNR reaches min_snr_db.
BandSet allocate_bands(const BandSnrProfile& profile, const ModemConfig& config, double min_snr_db);

// ---------------------------------------------------------------------------
// Framing

using Bits = std::vector<std::uint8_t>;

constexpr std::size_t kMaxPayload = 65535;

/// Maximal-length sequence of length 2^m - 1 from an all-ones LFSR.
Bits mls_sequence(int length);

/// CRC-32 (0x04C11DB7 reflected, init and xorout all-ones).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// 16-bit big-endian length, payload MSB-first, CRC over both.
Bits frame_body_bits(std::span<const std::uint8_t> payload);

/// Preamble followed by the frame body.
Bits serialize_frame(std::span<const std::uint8_t> payload, int preamble_len = 63);

std::size_t frame_bit_count(std::size_t payload_bytes, int preamble_len = 63);

enum class FrameStatus { ok, no_preamble, crc_mismatch, truncated };

std::string to_string(FrameStatus status);

struct FrameParse {
  FrameStatus status = FrameStatus::ok;
  std::vector<std::uint8_t> payload;  // best effort when the CRC fails
  std::uint32_t crc_received = 0;
  std::uint32_t crc_computed = 0;
};

/// Inverse of frame_body_bits. Bits past the declared frame are ignored.
FrameParse parse_frame_body(std::span<const std::uint8_t> bits);

// ---------------------------------------------------------------------------
// Modulation

AudioBuffer modulate(std::span<const std::uint8_t> payload, const ModemConfig& config,
                     const BandSet& bands);

struct DemodResult {
  FrameStatus status = FrameStatus::no_preamble;
  std::vector<std::uint8_t> payload;
  std::string detail;
  Eigen::Index offset = 0;    // sample index of the first preamble symbol
  double correlation = 0;     // preamble NCC at the chosen offset
  Bits body_bits;             // decided bits after the preamble

  bool ok() const { return status == FrameStatus::ok; }
};

/// When `body_bits` is set the frame length is taken as known and exactly
/// that many bits are decided after the preamble (oracle mode for BER).
DemodResult demodulate(const AudioBuffer& buffer, const ModemConfig& config, const BandSet& bands,
                       std::optional<std::size_t> body_bits = std::nullopt);

/// Power below f_lo - 500 Hz and above f_hi + 500 Hz over power in [f_lo, f_hi].
double out_of_band_ratio(const AudioBuffer& buffer, const ModemConfig& config);

// ---------------------------------------------------------------------------
// BER harness

struct BerOptions {
  std::size_t frame_bytes = 1024;
  bool random_offset = true;   // up to one symbol of silence before each frame
  bool tail_guard = true;      // one symbol of silence after each frame
  BandSet bands;               // empty: every band of the config
};

struct BerReport {
  std::uint64_t bits_sent = 0;
  std::uint64_t bit_errors = 0;
  double ber = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_recovered = 0;
  double effective_throughput = 0;  // payload bits of CRC-valid frames / audio seconds
  double audio_seconds = 0;
  double raw_bit_rate = 0;
  double capacity_bound_bps = 0;    // Shannon sum over the used bands, may be inf
  bool below_capacity = true;
};

/// Per-band SNR (dB) the model gives a tone of the config amplitude.
double band_snr_db(const ModemConfig& config, const ChannelModel& model, int band);

BerReport ber_test(const ModemConfig& config, const ChannelModel& model, std::uint64_t n_bits,
                   std::uint64_t seed, const BerOptions& options = {});

}  // namespace jackprobe
