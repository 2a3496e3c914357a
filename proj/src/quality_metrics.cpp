#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "jackprobe/quality.hpp"

namespace jackprobe {
namespace {

// Statistic value at -20, -19, ..., 100 dB SNR.
constexpr std::array<double, 121> kWadaTable = {
#include "wada_table.inc"
};

// log E|n| - E log|n| for Gaussian n.
const double kGaussianStatistic =
    0.5 * std::log(2.0 / std::numbers::pi) + 0.5 * (std::numbers::egamma + std::numbers::ln2);

// Standard errors above the Gaussian statistic below which the input is
// reported at the floor.
constexpr double kNoiseOnlySigmas = 3.0;

double clamp_ratio_db(double ratio) {
  if (std::isnan(ratio)) return 0.0;
  return std::clamp(to_db(ratio), -kRatioCapDb, kRatioCapDb);
}

double require_min_duration(const AudioBuffer& signal, const char* op) {
  require_mono(signal, op);
  require(signal.duration_seconds() >= 1.0 - 1e-9, "signal too short", std::string(op) + " needs >= 1 s");
  return signal.duration_seconds();
}

}  // namespace

double snr_vad(const AudioBuffer& rec, const VadMask& mask) {
  const auto& x = require_mono(rec, "snr_vad");
  require(mask.frame_len > 0 && mask.hop > 0, "empty mask");
  require(mask.source_rate == rec.sample_rate(), "mask sample rate mismatch");
  const Eigen::Index n = frame_count(x.rows(), mask.frame_len, mask.hop);
  require(static_cast<std::size_t>(n) == mask.size(), "mask does not cover the recording",
          std::to_string(mask.size()) + " labels, " + std::to_string(n) + " frames");

  const auto frames = frame_samples(x.col(0), mask.frame_len, mask.hop, rec.sample_rate());
  const Signal<double> power = frame_powers(frames);
  double active = 0, inactive = 0;
  std::size_t n_active = 0, n_inactive = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.labels[i]) {
      active += power[static_cast<Eigen::Index>(i)];
      ++n_active;
    } else {
      inactive += power[static_cast<Eigen::Index>(i)];
      ++n_inactive;
    }
  }
  require(n_active > 0, "mask has no active frames");
  require(n_inactive > 0, "mask has no inactive frames");
  return clamp_ratio_db((active / n_active) / (inactive / n_inactive));
}

double nist_stnr(const AudioBuffer& signal) {
  require_min_duration(signal, "nist_stnr");
  const auto frames = frame_signal(signal, 20.0, 10.0);
  const Signal<double> power = frame_powers(frames);

  require(power.maxCoeff() > 0.0, "all-zero signal");
  // 1 dB bins anchored at the loudest frame: bin b holds (top - b - 1, top - b].
  // Levels (including digital silence) are floored at the top of the clamp range.
  const double top = to_db(power.maxCoeff());
  std::vector<double> level;
  for (Eigen::Index i = 0; i < power.size(); ++i)
    level.push_back(power[i] > 0.0 ? std::max(to_db(power[i]), top - kRatioCapDb) : top - kRatioCapDb);
  std::vector<int> hist;
  for (double l : level) {
    const auto b = static_cast<std::size_t>(std::floor(top - l));
    if (b >= hist.size()) hist.resize(b + 1, 0);
    ++hist[b];
  }
  auto bin_level = [&](std::size_t b) { return top - static_cast<double>(b) - 0.5; };

  // Otsu split of the histogram; bins at or past `split` form the low cluster.
  const double total = static_cast<double>(level.size());
  double sum_all = 0;
  for (std::size_t b = 0; b < hist.size(); ++b) sum_all += hist[b] * bin_level(b);
  std::size_t split = 0;
  double best = 0, w_hi = 0, sum_hi = 0;
  for (std::size_t b = 0; b + 1 < hist.size(); ++b) {
    w_hi += hist[b];
    sum_hi += hist[b] * bin_level(b);
    const double w_lo = total - w_hi;
    if (w_hi == 0 || w_lo == 0) continue;
    const double d = sum_hi / w_hi - (sum_all - sum_hi) / w_lo;
    const double between = w_hi * w_lo * d * d;
    if (between > best) {
      best = between;
      split = b + 1;
    }
  }

  // Ties go to the quieter bin.
  std::size_t mode = split;
  for (std::size_t b = split; b < hist.size(); ++b)
    if (hist[b] >= hist[mode]) mode = b;

  const double speech = percentile(level, 95.0);
  return std::clamp(speech - bin_level(mode), 0.0, 100.0);
}

double wada_statistic(const AudioBuffer& signal) {
  const auto& x = require_mono(signal, "wada_snr");
  const double peak = x.cwiseAbs().maxCoeff();
  require(peak > 0.0, "all-zero signal");
  const Eigen::ArrayXd a = x.col(0).array().abs().max(1e-10 * peak);
  return std::log(a.mean()) - a.log().mean();
}

double wada_snr(const AudioBuffer& signal) {
  require_min_duration(signal, "wada_snr");
  const auto& x = signal.samples();
  const double peak = x.cwiseAbs().maxCoeff();
  require(peak > 0.0, "all-zero signal");
  const Eigen::ArrayXd a = x.col(0).array().abs().max(1e-10 * peak);
  const double mean_abs = a.mean();
  const Eigen::ArrayXd d = a / mean_abs - a.log();
  const double g = std::log(mean_abs) - a.log().mean();

  // Statistically indistinguishable from pure Gaussian noise.
  const double se = std::sqrt((d - d.mean()).square().mean() / static_cast<double>(a.size()));
  if (g <= kGaussianStatistic + kNoiseOnlySigmas * se) return kWadaFloorDb;

  if (g <= kWadaTable.front()) return kWadaFloorDb;
  if (g >= kWadaTable.back()) return kWadaCeilingDb;
  const auto it = std::upper_bound(kWadaTable.begin(), kWadaTable.end(), g);
  const auto i = static_cast<std::size_t>(it - kWadaTable.begin());
  const double frac = (g - kWadaTable[i - 1]) / (kWadaTable[i] - kWadaTable[i - 1]);
  return std::clamp(kWadaFloorDb + static_cast<double>(i - 1) + frac, kWadaFloorDb, kWadaCeilingDb);
}

double sar(const AudioBuffer& ref, const AudioBuffer& rec, int filter_len) {
  const auto& r = require_mono(ref, "sar");
  const auto& y = require_mono(rec, "sar");
  require(ref.sample_rate() == rec.sample_rate(), "sample rate mismatch");
  require(ref.length() == rec.length(), "length mismatch after alignment trim");
  require(filter_len >= 1 && filter_len <= ref.length(), "invalid filter length",
          std::to_string(filter_len));
  const double ref_energy = r.squaredNorm();
  require(ref_energy > 0.0, "reference is all-zero");

  const Eigen::Index taps = filter_len;
  // Normal equations: Toeplitz autocorrelation of ref against the
  // correlation of rec with delayed copies of ref.
  const Signal<double> auto_c = cross_correlation(r.col(0), r.col(0), taps - 1);
  const Signal<double> cross_c = cross_correlation(r.col(0), y.col(0), taps - 1);
  Eigen::MatrixXd gram(taps, taps);
  for (Eigen::Index i = 0; i < taps; ++i)
    for (Eigen::Index j = 0; j < taps; ++j) gram(i, j) = auto_c[taps - 1 + std::abs(i - j)];
  gram.diagonal().array() += 1e-12 * auto_c[taps - 1];
  const Eigen::VectorXd rhs = cross_c.tail(taps);
  const Eigen::VectorXd h = gram.ldlt().solve(rhs);

  const Signal<double> target = convolve(r.col(0), h);  // length N + taps - 1
  Signal<double> padded = Signal<double>::Zero(target.size());
  padded.head(y.rows()) = y.col(0);
  const double target_energy = target.squaredNorm();
  const double artifact_energy = (padded - target).squaredNorm();
  const double total = padded.squaredNorm();

  if (artifact_energy < 1e-12 * total || artifact_energy == 0.0) return kSarCapDb;
  return std::min(kSarCapDb, to_db(target_energy / artifact_energy));
}

}  // namespace jackprobe
