#include "jackprobe/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace jackprobe {
namespace {

constexpr double kSnrCapDb = 100.0;

/// Welch-averaged periodogram accumulator.
struct SpectrumAverage {
  Signal<double> sum;
  double frames = 0;

  void add(const Signal<double>& x, Eigen::Index begin, Eigen::Index end, Eigen::Index fft_len,
           int rate) {
    const Eigen::Index len = end - begin;
    if (len <= 0) return;
    auto accumulate = [&](Eigen::Index at, Eigen::Index n) {
      const auto spec = power_spectrum(x.segment(at, n), fft_len, rate);
      if (sum.size() == 0) sum = Signal<double>::Zero(spec.bins());
      sum += spec.power;
      frames += 1;
    };
    if (len < fft_len) {
      accumulate(begin, len);
      return;
    }
    const Eigen::Index hop = fft_len / 2;
    for (Eigen::Index at = begin; at + fft_len <= end; at += hop) accumulate(at, fft_len);
  }

  SpectralFrame<double> mean(Eigen::Index fft_len, int rate) const {
    SpectralFrame<double> s;
    s.power = sum / frames;
    s.fft_len = fft_len;
    s.bin_width = static_cast<double>(rate) / static_cast<double>(fft_len);
    return s;
  }
};

Eigen::Index to_sample(double seconds, int rate) {
  return static_cast<Eigen::Index>(std::llround(seconds * rate));
}

}  // namespace

double shannon_capacity(double bandwidth_hz, double snr_linear) {
  require(bandwidth_hz > 0, "bandwidth must be positive");
  require(snr_linear >= 0, "negative SNR", std::to_string(snr_linear));
  return bandwidth_hz * std::log2(1.0 + snr_linear);
}

ApproxCapacity capacity_approx(double bandwidth_hz, double snr_db) {
  require(bandwidth_hz > 0, "bandwidth must be positive");
  if (snr_db < 0) return {0.0, true};
  return {0.33 * bandwidth_hz * snr_db, false};
}

void BandSnrProfile::validate() const {
  require(band_width > 0, "band width must be positive");
  require(sample_rate > 0 && max_freq <= sample_rate / 2.0 + 1e-9, "max_freq above Nyquist");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    require(std::abs(bands[i].f_hi - bands[i].f_lo - band_width) < 1e-6 * band_width,
            "band width mismatch", std::to_string(i));
    if (i > 0)
      require(std::abs(bands[i].f_lo - bands[i - 1].f_hi) < 1e-6 * band_width,
              "bands not contiguous", std::to_string(i));
  }
}

BandSnrProfile profile_band_snr(const AudioBuffer& recording, const ToneSchedule& schedule,
                                const ProfileOptions& options) {
  const Signal<double> x = require_mono(recording, "profile_band_snr").col(0);
  const int rate = recording.sample_rate();
  const double nyquist = rate / 2.0;
  require(options.band_width > 0, "band width must be positive");
  require(options.max_freq <= nyquist + 1e-9, "band above Nyquist",
          "max_freq " + std::to_string(options.max_freq));
  require(is_pow2(options.fft_len), "fft length must be a power of two");
  const auto n_bands = static_cast<int>(std::floor(options.max_freq / options.band_width + 1e-9));
  require(n_bands >= 1, "no bands below max_freq");

  const Eigen::Index n = x.size();
  const Eigen::Index guard = to_sample(options.guard_s, rate);

  std::vector<std::pair<Eigen::Index, Eigen::Index>> busy;
  std::map<int, SpectrumAverage> tone_spectra;
  for (const auto& seg : schedule) {
    require(seg.band >= 0 && seg.band < n_bands, "band above Nyquist",
            "band index " + std::to_string(seg.band));
    require(seg.start_s >= 0 && seg.duration_s > 0, "invalid tone segment");
    const Eigen::Index begin = to_sample(seg.start_s, rate);
    const Eigen::Index end = to_sample(seg.start_s + seg.duration_s, rate);
    require(end <= n, "schedule extends past recording end",
            "segment ends at " + std::to_string(seg.start_s + seg.duration_s) + " s");
    busy.emplace_back(std::max<Eigen::Index>(0, begin - guard), std::min(n, end + guard));
    const Eigen::Index a = std::min(begin + guard, end);
    const Eigen::Index b = std::max(end - guard, a);
    require(b > a, "tone segment shorter than the guard", std::to_string(seg.start_s));
    tone_spectra[seg.band].add(x, a, b, options.fft_len, rate);
  }

  // Noise-only stretches: the complement of the guarded tone intervals.
  std::sort(busy.begin(), busy.end());
  SpectrumAverage noise;
  Eigen::Index cursor = 0;
  for (const auto& [b, e] : busy) {
    if (b > cursor) noise.add(x, cursor, b, options.fft_len, rate);
    cursor = std::max(cursor, e);
  }
  if (cursor < n) noise.add(x, cursor, n, options.fft_len, rate);
  require(noise.frames > 0, "recording has no noise-only segment");
  const auto noise_spec = noise.mean(options.fft_len, rate);

  BandSnrProfile profile;
  profile.band_width = options.band_width;
  profile.max_freq = options.max_freq;
  profile.sample_rate = rate;
  for (int k = 0; k < n_bands; ++k) {
    const double lo = k * options.band_width;
    const double hi = (k + 1) * options.band_width;
    const double hi_query = std::min(hi, nyquist);
    const double p_noise = band_power(noise_spec, lo, hi_query);
    double snr_db = 0.0;
    if (auto it = tone_spectra.find(k); it != tone_spectra.end()) {
      const double p_tone = band_power(it->second.mean(options.fft_len, rate), lo, hi_query);
      snr_db = p_noise > 0 ? std::clamp(to_db(p_tone / p_noise), -kSnrCapDb, kSnrCapDb)
                           : (p_tone > 0 ? kSnrCapDb : 0.0);
    }
    profile.bands.push_back({lo, hi, snr_db});
  }
  return profile;
}

CapacityTotals CapacityReport::cumulative(double f_lo, double f_hi) const {
  CapacityTotals t;
  for (const auto& b : bands) {
    if (b.f_lo >= f_lo && b.f_hi <= f_hi) {
      t.exact_bps += b.exact_bps;
      t.approx_bps += b.approx_bps;
    }
  }
  return t;
}

CapacityReport capacity_report(const BandSnrProfile& profile, double hearing_cutoff) {
  profile.validate();
  CapacityReport report;
  report.hearing_cutoff = hearing_cutoff;
  for (const auto& b : profile.bands) {
    const double width = b.f_hi - b.f_lo;
    BandCapacity c{b.f_lo, b.f_hi, b.snr_db, shannon_capacity(width, from_db(b.snr_db)),
                   capacity_approx(width, b.snr_db).bits_per_second};
    report.bands.push_back(c);
  }
  const double inf = std::numeric_limits<double>::infinity();
  report.total = report.cumulative(-inf, inf);
  report.inaudible = report.cumulative(hearing_cutoff, inf);
  return report;
}

std::string capacity_csv(const CapacityReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "f_lo_hz,f_hi_hz,snr_db,capacity_exact_bps,capacity_approx_bps\n";
  for (const auto& b : report.bands)
    out << b.f_lo << ',' << b.f_hi << ',' << b.snr_db << ',' << b.exact_bps << ',' << b.approx_bps << '\n';
  return out.str();
}

ToneSweep make_tone_sweep(const std::vector<int>& bands, double band_width, double tone_s,
                          double gap_s, double amplitude, int sample_rate) {
  require(!bands.empty() && tone_s > 0 && gap_s >= 0 && band_width > 0, "invalid sweep");
  const Eigen::Index tone_n = to_sample(tone_s, sample_rate);
  const Eigen::Index gap_n = to_sample(gap_s, sample_rate);
  const auto count = static_cast<Eigen::Index>(bands.size());
  Signal<double> x = Signal<double>::Zero(gap_n + count * (tone_n + gap_n));

  ToneSchedule schedule;
  for (Eigen::Index i = 0; i < count; ++i) {
    const int band = bands[static_cast<std::size_t>(i)];
    const double f = (band + 0.5) * band_width;
    require(f < sample_rate / 2.0, "band above Nyquist", std::to_string(band));
    const Eigen::Index start = gap_n + i * (tone_n + gap_n);
    for (Eigen::Index k = 0; k < tone_n; ++k)
      x[start + k] = amplitude * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(k) / sample_rate);
    schedule.push_back({band, static_cast<double>(start) / sample_rate,
                              static_cast<double>(tone_n) / sample_rate});
  }
  return {AudioBuffer::mono(std::move(x), sample_rate), std::move(schedule)};
}

}  // namespace jackprobe
