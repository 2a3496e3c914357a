#include <cmath>
#include <limits>
#include <random>

#include "jackprobe/modem.hpp"

namespace jackprobe {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

double band_snr_db(const ModemConfig& config, const ChannelModel& model, int band) {
  if (!model.has_noise()) return std::numeric_limits<double>::infinity();
  const double gain_db = realized_response_db(model, config.band_center(band), config.sample_rate);
  const double tone = 0.5 * config.amplitude_per_band * config.amplitude_per_band * from_db(gain_db);
  const double noise = model.noise_rms() * model.noise_rms() * 2.0 * config.band_width / config.sample_rate;
  return to_db(tone / noise);
}

BerReport ber_test(const ModemConfig& config, const ChannelModel& model, std::uint64_t n_bits,
                   std::uint64_t seed, const BerOptions& options) {
  config.validate();
  model.validate();
  require(n_bits >= 1000, "n_bits must be >= 1000", std::to_string(n_bits));
  require(options.frame_bytes >= 1 && options.frame_bytes <= kMaxPayload, "invalid frame size");
  const BandSet bands = options.bands.empty() ? all_bands(config) : options.bands;

  BerReport report;
  report.raw_bit_rate = static_cast<double>(bands.size()) * 1000.0 / config.symbol_ms;
  const Eigen::Index ns = config.symbol_samples();
  std::uint64_t remaining = (n_bits + 7) / 8;
  double good_bits = 0;

  for (std::uint64_t frame = 0; remaining > 0; ++frame) {
    const std::size_t bytes = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, options.frame_bytes));
    remaining -= bytes;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(frame >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<std::uint8_t> payload(bytes);
    for (auto& b : payload) b = static_cast<std::uint8_t>(byte(rng));
    const Eigen::Index lead =
        options.random_offset ? std::uniform_int_distribution<Eigen::Index>(0, ns - 1)(rng) : 0;
    const Eigen::Index tail = options.tail_guard ? ns : 0;

    const AudioBuffer tx = modulate(payload, config, bands);
    Signal<double> air = Signal<double>::Zero(lead + tx.length() + tail);
    air.segment(lead, tx.length()) = tx.channel(0);
    ChannelModel channel = model;
    channel.noise_seed = mix_seed(seed, frame);
    const AudioBuffer rx = simulate_channel(AudioBuffer::mono(std::move(air), config.sample_rate), channel);

    const std::size_t body = 48 + 8 * bytes;
    const DemodResult got = demodulate(rx, config, bands, body);
    const std::uint64_t payload_bits = 8 * bytes;
    report.frames_sent += 1;
    report.bits_sent += payload_bits;
    report.audio_seconds += rx.duration_seconds();

    if (got.body_bits.size() < body) {
      report.bit_errors += payload_bits;
      continue;
    }
    for (std::size_t i = 0; i < payload_bits; ++i) {
      const int sent = (payload[i / 8] >> (7 - i % 8)) & 1;
      if (got.body_bits[16 + i] != sent) report.bit_errors += 1;
    }
    if (got.ok() && got.payload == payload) {
      report.frames_recovered += 1;
      good_bits += static_cast<double>(payload_bits);
    }
  }

  report.ber = static_cast<double>(report.bit_errors) / static_cast<double>(report.bits_sent);
  report.effective_throughput = good_bits / report.audio_seconds;
  double bound = 0;
  for (int b : bands) {
    const double snr = band_snr_db(config, model, b);
    bound += std::isinf(snr) ? snr : shannon_capacity(config.band_width, from_db(snr));
  }
  report.capacity_bound_bps = bound;
  report.below_capacity = report.effective_throughput < bound;
  return report;
}

}  // namespace jackprobe
