#include "jackprobe/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "jackprobe/quality.hpp"

namespace jackprobe {
namespace {

/// y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]
struct FirstOrderSection {
  double b0 = 1, b1 = 0, a1 = 0;

  /// Impulse-invariant pole; zero placed so |H| matches the analog prototype
  /// at DC and at Nyquist.
  static FirstOrderSection lowpass(double corner_hz, int rate) {
    FirstOrderSection s;
    s.a1 = -std::exp(-2.0 * std::numbers::pi * corner_hz / rate);
    const double nyq_ratio = rate / (2.0 * corner_hz);
    const double h_nyq = 1.0 / std::sqrt(1.0 + nyq_ratio * nyq_ratio);
    s.b0 = ((1.0 + s.a1) + h_nyq * (1.0 - s.a1)) / 2.0;
    s.b1 = ((1.0 + s.a1) - h_nyq * (1.0 - s.a1)) / 2.0;
    return s;
  }

  void apply(Signal<double>& x) const {
    double x1 = 0, y1 = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double y = b0 * x[i] + b1 * x1 - a1 * y1;
      x1 = x[i];
      y1 = y;
      x[i] = y;
    }
  }

  double magnitude(double f, int rate) const {
    const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f / rate);
    return std::abs((b0 + b1 * z) / (1.0 + a1 * z));
  }
};

bool filter_active(const ChannelModel& m, int rate) {
  return std::isfinite(m.corner_hz) && m.corner_hz < rate / 2.0 && m.sections() > 0;
}

Signal<double> shaped_signal(const AudioBuffer& input, const ChannelModel& model) {
  model.validate();
  Signal<double> y = require_mono(input, "simulate_channel").col(0) * model.broadband_gain();
  if (filter_active(model, input.sample_rate())) {
    const auto section = FirstOrderSection::lowpass(model.corner_hz, input.sample_rate());
    for (int i = 0; i < model.sections(); ++i) section.apply(y);
  }
  return y;
}

Signal<double> gaussian_noise(Eigen::Index n, double rms, std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> dist(0.0, rms);
  Signal<double> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = dist(rng);
  return out;
}

double ratio_db(double signal_energy, double noise_energy) {
  return to_db(signal_energy / noise_energy);
}

}  // namespace

ChannelModel ChannelModel::identity() {
  ChannelModel m;
  m.distance_m = 1.0;
  m.reference_gain_db = 0.0;
  m.corner_hz = std::numeric_limits<double>::infinity();
  m.rolloff_db_per_octave = 0.0;
  m.noise_floor_dbfs = -std::numeric_limits<double>::infinity();
  return m;
}

ChannelModel ChannelModel::headphone(double distance_m) {
  ChannelModel m;
  m.distance_m = distance_m;
  return m;
}

ChannelModel ChannelModel::microphone(double distance_m) {
  ChannelModel m;
  m.distance_m = distance_m;
  m.corner_hz = 8000.0;
  return m;
}

void ChannelModel::validate() const {
  require(distance_m > 0, "distance must be positive");
  require(corner_hz > 0, "corner frequency must be positive");
  require(rolloff_db_per_octave >= 0, "roll-off must be non-negative");
  require(!std::isnan(noise_floor_dbfs) && noise_floor_dbfs < std::numeric_limits<double>::infinity(),
          "invalid noise floor");
  sections();
}

int ChannelModel::sections() const {
  const long n = std::lround(rolloff_db_per_octave / 6.0);
  require(std::abs(rolloff_db_per_octave - 6.0 * static_cast<double>(n)) <= 0.1,
          "roll-off must be a multiple of 6 dB/octave", std::to_string(rolloff_db_per_octave));
  return static_cast<int>(n);
}

double ChannelModel::broadband_gain() const {
  return std::pow(10.0, (reference_gain_db - 20.0 * std::log10(distance_m)) / 20.0);
}

double ChannelModel::noise_rms() const {
  return has_noise() ? std::pow(10.0, noise_floor_dbfs / 20.0) : 0.0;
}

ChannelModel ChannelModel::without_noise() const {
  ChannelModel m = *this;
  m.noise_floor_dbfs = -std::numeric_limits<double>::infinity();
  return m;
}

double ideal_response_db(const ChannelModel& model, double f_hz) {
  double db = 20.0 * std::log10(model.broadband_gain());
  if (std::isfinite(model.corner_hz)) {
    const double r = f_hz / model.corner_hz;
    db -= 10.0 * model.sections() * std::log10(1.0 + r * r);
  }
  return db;
}

double realized_response_db(const ChannelModel& model, double f_hz, int rate) {
  double db = 20.0 * std::log10(model.broadband_gain());
  if (filter_active(model, rate)) {
    const auto s = FirstOrderSection::lowpass(model.corner_hz, rate);
    db += 20.0 * model.sections() * std::log10(s.magnitude(f_hz, rate));
  }
  return db;
}

AudioBuffer simulate_channel(const AudioBuffer& input, const ChannelModel& model) {
  Signal<double> y = shaped_signal(input, model);
  if (model.has_noise()) y += gaussian_noise(y.size(), model.noise_rms(), model.noise_seed, 0);
  return AudioBuffer::mono(std::move(y), input.sample_rate());
}

AudioBuffer stereo_capture(const AudioBuffer& input, const ChannelModel& model, double rho) {
  require(rho >= 0.0 && rho <= 1.0, "noise correlation must lie in [0, 1]", std::to_string(rho));
  const Signal<double> shared = shaped_signal(input, model);
  if (!model.has_noise()) return AudioBuffer::stereo(shared, shared, input.sample_rate());
  const Signal<double> g = gaussian_noise(shared.size(), model.noise_rms(), model.noise_seed, 0);
  const Signal<double> h = gaussian_noise(shared.size(), model.noise_rms(), model.noise_seed, 1);
  const Signal<double> right_noise = rho * g + std::sqrt(1.0 - rho * rho) * h;
  return AudioBuffer::stereo(shared + g, shared + right_noise, input.sample_rate());
}

CombinedChannels combine_channels_detailed(const AudioBuffer& stereo) {
  require(stereo.channels() == 2, "stereo input required");
  const int rate = stereo.sample_rate();
  const AudioBuffer left = AudioBuffer::mono(stereo.channel(0), rate);
  const AudioBuffer right = AudioBuffer::mono(stereo.channel(1), rate);
  require(stereo.length() > 0, "zero-length overlap");

  long lag = 0;
  if (left.samples().squaredNorm() > 0 && right.samples().squaredNorm() > 0 && stereo.length() > 1) {
    const long max_lag = std::min<long>(std::lround(0.010 * rate), static_cast<long>(stereo.length()) - 1);
    lag = align_by_cross_correlation(left, right, max_lag).lag;
  }
  const Eigen::Index l_start = lag < 0 ? -lag : 0;
  const Eigen::Index r_start = lag > 0 ? lag : 0;
  const Eigen::Index n = stereo.length() - std::abs(lag);
  require(n > 0, "zero-length overlap");
  Signal<double> mono = (stereo.channel(0).segment(l_start, n) + stereo.channel(1).segment(r_start, n)) * 0.5;
  return {AudioBuffer::mono(std::move(mono), rate), lag};
}

AudioBuffer combine_channels(const AudioBuffer& stereo) { return combine_channels_detailed(stereo).mono; }

CombiningResult combining_gain_experiment(const ChannelModel& model, double rho,
                                          const AudioBuffer& probe, int trials) {
  require(trials >= 1, "trials must be >= 1");
  require(model.has_noise(), "combining experiment needs a noisy channel");
  const Signal<double> clean = simulate_channel(probe, model.without_noise()).channel(0);
  const double clean_energy = clean.squaredNorm();
  require(clean_energy > 0, "probe is silent after the channel");

  CombiningResult result;
  result.trials = trials;
  for (int t = 0; t < trials; ++t) {
    ChannelModel trial = model;
    trial.noise_seed = model.noise_seed + static_cast<std::uint64_t>(t);
    const AudioBuffer st = stereo_capture(probe, trial, rho);
    const Signal<double> nl = st.channel(0) - clean;
    const Signal<double> nr = st.channel(1) - clean;
    const CombinedChannels comb = combine_channels_detailed(st);

    const Eigen::Index n = comb.mono.length();
    const Eigen::Index l_start = comb.lag < 0 ? -comb.lag : 0;
    const Eigen::Index r_start = comb.lag > 0 ? comb.lag : 0;
    const Signal<double> clean_comb = (clean.segment(l_start, n) + clean.segment(r_start, n)) * 0.5;
    const double comb_noise = (comb.mono.channel(0) - clean_comb).squaredNorm();

    result.snr_left_db += ratio_db(clean_energy, nl.squaredNorm());
    result.snr_right_db += ratio_db(clean_energy, nr.squaredNorm());
    result.snr_combined_db += ratio_db(clean_comb.squaredNorm(), comb_noise);
    result.noise_correlation += nl.dot(nr) / std::sqrt(nl.squaredNorm() * nr.squaredNorm());
  }
  result.snr_left_db /= trials;
  result.snr_right_db /= trials;
  result.snr_combined_db /= trials;
  result.noise_correlation /= trials;
  result.gain_db = result.snr_combined_db - 0.5 * (result.snr_left_db + result.snr_right_db);
  return result;
}

double noise_floor_for_band_snr(double amplitude, double broadband_gain, double band_width,
                                int sample_rate, double snr_db) {
  // Tone power (a g)^2 / 2 against white noise of variance s^2 spread over
  // fs/2, of which band_width / (fs/2) falls in the band.
  const double tone_power = 0.5 * std::pow(amplitude * broadband_gain, 2);
  const double band_noise = tone_power / from_db(snr_db);
  const double variance = band_noise * (sample_rate / 2.0) / band_width;
  return 10.0 * std::log10(variance);
}

}  // namespace jackprobe
