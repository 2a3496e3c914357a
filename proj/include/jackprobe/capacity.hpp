#pragma once

// Per-band SNR profiling from tone recordings and Shannon-Hartley capacity.

#include <string>
#include <vector>

#include "jackprobe/audio.hpp"

namespace jackprobe {

/// B * log2(1 + S/N) in bits per second.
double shannon_capacity(double bandwidth_hz, double snr_linear);

struct ApproxCapacity {
  double bits_per_second = 0;
  bool clamped = false;  // snr_db was negative and treated as 0
};

/// High-SNR linear approximation 0.33 * B * SNR_dB.
ApproxCapacity capacity_approx(double bandwidth_hz, double snr_db);

struct BandSnr {
  double f_lo = 0;
  double f_hi = 0;
  double snr_db = 0;
};

struct BandSnrProfile {
  std::vector<BandSnr> bands;
  double band_width = 100.0;
  double max_freq = 22000.0;
  int sample_rate = 44100;

  /// Throws unless bands are contiguous, ordered and band_width wide.
  void validate() const;
};

/// One scheduled tone: band index on the band_width grid starting at 0 Hz.
struct ToneSegment {
  int band = 0;
  double start_s = 0;
  double duration_s = 0;
};

using ToneSchedule = std::vector<ToneSegment>;

struct ProfileOptions {
  double band_width = 100.0;
  double max_freq = 22000.0;
  double guard_s = 0.01;          // trimmed from both ends of every tone interval
  Eigen::Index fft_len = 4096;
};

/// SNR_dB per band = tone-segment band power over the mean band power of all
/// noise-only stretches (everything outside the guarded tone intervals).
/// Unscheduled bands compare the noise estimate with itself (0 dB).
BandSnrProfile profile_band_snr(const AudioBuffer& recording, const ToneSchedule& schedule,
                                const ProfileOptions& options = {});

struct BandCapacity {
  double f_lo = 0;
  double f_hi = 0;
  double snr_db = 0;
  double exact_bps = 0;
  double approx_bps = 0;
};

struct CapacityTotals {
  double exact_bps = 0;
  double approx_bps = 0;
};

struct CapacityReport {
  std::vector<BandCapacity> bands;
  double hearing_cutoff = 10000.0;
  CapacityTotals total;
  CapacityTotals inaudible;  // bands with f_lo >= hearing_cutoff

  /// Sum over bands lying entirely inside [f_lo, f_hi], in frequency order.
  CapacityTotals cumulative(double f_lo, double f_hi) const;
};

CapacityReport capacity_report(const BandSnrProfile& profile, double hearing_cutoff = 10000.0);

/// f_lo_hz,f_hi_hz,snr_db,capacity_exact_bps,capacity_approx_bps
std::string capacity_csv(const CapacityReport& report);

struct ToneSweep {
  AudioBuffer audio;
  ToneSchedule schedule;
};

/// Sequential band-center tones with silent gaps before, between and after.
ToneSweep make_tone_sweep(const std::vector<int>& bands, double band_width, double tone_s,
                          double gap_s, double amplitude, int sample_rate);

}  // namespace jackprobe
