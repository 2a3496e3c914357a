#pragma once

// Parametric headphone-as-microphone channel: spherical spreading, a
// first-order low-pass cascade and seeded white Gaussian noise.

#include <cstdint>
#include <limits>

#include "jackprobe/audio.hpp"

namespace jackprobe {

struct ChannelModel {
  double distance_m = 1.0;
  double reference_gain_db = -10.0;  // at 1 m
  double corner_hz = 1500.0;         // +inf disables the low-pass
  double rolloff_db_per_octave = 12.0;
  double noise_floor_dbfs = -60.0;   // RMS re full scale; -inf disables noise
  std::uint64_t noise_seed = 0;

  static ChannelModel identity();
  static ChannelModel headphone(double distance_m);
  static ChannelModel microphone(double distance_m);

  void validate() const;

  /// Spreading plus reference gain, linear amplitude.
  double broadband_gain() const;
  /// Number of first-order sections (6 dB/octave each).
  int sections() const;
  bool has_noise() const { return std::isfinite(noise_floor_dbfs); }
  double noise_rms() const;

  ChannelModel without_noise() const;
};

/// Analog prototype magnitude: broadband gain times (1 + (f/fc)^2)^(-n/2), in dB.
double ideal_response_db(const ChannelModel& model, double f_hz);

/// Magnitude of the digital realization at sample rate `rate`, in dB.
double realized_response_db(const ChannelModel& model, double f_hz, int rate);

AudioBuffer simulate_channel(const AudioBuffer& input, const ChannelModel& model);

/// Shared filtered signal with per-channel noise of pairwise correlation rho.
AudioBuffer stereo_capture(const AudioBuffer& input, const ChannelModel& model, double noise_correlation);

struct CombinedChannels {
  AudioBuffer mono;
  long lag = 0;  // right[n + lag] was averaged with left[n]
};

CombinedChannels combine_channels_detailed(const AudioBuffer& stereo);

/// Aligns right to left (|lag| <= 10 ms) and averages over the overlap.
AudioBuffer combine_channels(const AudioBuffer& stereo);

struct CombiningResult {
  double snr_left_db = 0;
  double snr_right_db = 0;
  double snr_combined_db = 0;
  double gain_db = 0;
  double noise_correlation = 0;  // measured, mean over trials
  int trials = 0;
};

/// Trial t uses noise_seed + t. SNRs are measured against the noise-free
/// channel output.
CombiningResult combining_gain_experiment(const ChannelModel& model, double noise_correlation,
                                          const AudioBuffer& probe, int trials);

/// Noise floor (dBFS) that puts a tone of `amplitude` at `snr_db` within one
/// band of `band_width` Hz after the model's broadband gain.
double noise_floor_for_band_snr(double amplitude, double broadband_gain, double band_width,
                                int sample_rate, double snr_db);

}  // namespace jackprobe
