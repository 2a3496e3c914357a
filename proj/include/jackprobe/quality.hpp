#pragma once

// Objective speech-quality measurement for reference/recording pairs:
// voice activity on the reference, cross-correlation alignment, four SNR-style
// measures and the band-energy reports used for plotting.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "jackprobe/audio.hpp"

namespace jackprobe {

struct VadOptions {
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  double floor_percentile = 10.0;
  double threshold_db = 6.0;
  int hangover_frames = 2;
};

/// Per-frame speech activity derived from a reference signal.
struct VadMask {
  std::vector<bool> labels;
  Eigen::Index frame_len = 0;
  Eigen::Index hop = 0;
  int source_rate = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t active_count() const;
  std::size_t inactive_count() const { return size() - active_count(); }
};

/// Frame active iff its power is within `threshold_db` above the
/// `floor_percentile` frame power or in the hangover after an active run.
VadMask detect_voice_activity(const AudioBuffer& ref, const VadOptions& options = {});

struct Alignment {
  long lag = 0;             // > 0: rec is delayed relative to ref
  double correlation = 0;   // normalized by the energies inside the overlap
};

/// Argmax over [-max_lag, max_lag] of the cross-correlation normalized by the
/// energies of both signals inside the overlap. Lags overlapping less than
/// half the shorter signal are skipped; ties resolve toward the smaller |lag|.
Alignment align_by_cross_correlation(const AudioBuffer& ref, const AudioBuffer& rec, long max_lag);

/// Overlapping parts of ref and rec once rec is advanced by `lag` samples.
std::pair<AudioBuffer, AudioBuffer> trim_to_overlap(const AudioBuffer& ref, const AudioBuffer& rec,
                                                    long lag);

/// Mean active-frame power over mean inactive-frame power, in dB.
double snr_vad(const AudioBuffer& rec, const VadMask& mask);

/// Frame-power histogram estimate: 95th-percentile level minus the mode of the
/// low-power cluster, clamped to [0, 100] dB.
double nist_stnr(const AudioBuffer& signal);

/// Waveform amplitude distribution estimate under a gamma-speech plus
/// Gaussian-noise model, clamped to [-20, 100] dB.
double wada_snr(const AudioBuffer& signal);

/// Statistic log(mean|x|) - mean(log|x|) used by wada_snr.
double wada_statistic(const AudioBuffer& signal);

/// Signal-to-artifacts ratio with a single reference source: rec is projected
/// onto ref delayed by 0..filter_len-1 samples. Capped at 100 dB.
double sar(const AudioBuffer& ref, const AudioBuffer& rec, int filter_len = 512);

constexpr double kWadaFloorDb = -20.0;
constexpr double kWadaCeilingDb = 100.0;
constexpr double kSarCapDb = 100.0;
constexpr double kRatioCapDb = 100.0;

struct QualityOptions {
  VadOptions vad;
  int sar_filter_len = 512;
  double max_lag_seconds = 1.0;
};

struct QualityReport {
  double nist_stnr_db = 0;
  double wada_snr_db = 0;
  double snr_vad_db = 0;
  double sar_db = 0;
  long alignment_lag = 0;
  std::optional<double> pesq_mos;  // never computed
};

/// Common rate (the lower of the two) -> align -> VAD on ref -> trim -> metrics.
QualityReport quality_report(const AudioBuffer& ref, const AudioBuffer& rec,
                             const QualityOptions& options = {});

struct SpectralReport {
  std::vector<double> band_lo;                // Hz
  std::vector<double> band_centers;           // Hz
  Eigen::VectorXd active_mean_db;             // NaN when no active frame
  Eigen::VectorXd inactive_mean_db;           // NaN when no inactive frame
  double histogram_lo_db = 0;                 // lower edge of histogram row 0
  Eigen::MatrixXi histograms;                 // 1 dB rows x bands
  Eigen::MatrixXd spectrogram_db;             // frames x bins
  std::vector<double> frame_times;            // s, frame starts
  std::vector<double> bin_centers;            // Hz
  std::size_t active_frames = 0;
  std::size_t inactive_frames = 0;
};

SpectralReport spectral_report(const AudioBuffer& rec, const VadMask& mask, double band_width = 100.0);

/// band_means.csv, histograms.csv and spectrogram.csv in `dir`.
void write_spectral_csv(const SpectralReport& report, const std::filesystem::path& dir);

}  // namespace jackprobe
