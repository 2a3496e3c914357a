#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "jackprobe/quality.hpp"

namespace jackprobe {
namespace {

constexpr double kMinDb = -200.0;

double safe_db(double power) { return std::max(kMinDb, to_db(power)); }

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "unwritable path", path.string());
  out << std::setprecision(10);
  return out;
}

void write_cell(std::ostream& out, double v) {
  if (!std::isnan(v)) out << v;
}

}  // namespace

SpectralReport spectral_report(const AudioBuffer& rec, const VadMask& mask, double band_width) {
  const auto& x = require_mono(rec, "spectral_report");
  require(mask.source_rate == rec.sample_rate(), "mask sample rate mismatch");
  require(band_width > 0, "invalid band width");
  const auto frames = frame_samples(x.col(0), mask.frame_len, mask.hop, rec.sample_rate());
  require(static_cast<std::size_t>(frames.count()) == mask.size(),
          "mask does not cover the recording");

  const double rate = rec.sample_rate();
  const double nyquist = rate / 2.0;
  const Eigen::Index fft_len =
      next_pow2(std::max<Eigen::Index>(frames.frame_len, static_cast<Eigen::Index>(std::ceil(2.0 * rate / band_width))));

  SpectralReport report;
  const auto n_bands = static_cast<Eigen::Index>(std::floor(nyquist / band_width + 1e-9));
  require(n_bands >= 1, "band width exceeds Nyquist");
  for (Eigen::Index b = 0; b < n_bands; ++b) {
    report.band_lo.push_back(static_cast<double>(b) * band_width);
    report.band_centers.push_back((static_cast<double>(b) + 0.5) * band_width);
  }

  const Eigen::Index n_frames = frames.count();
  const Eigen::Index n_bins = fft_len / 2 + 1;
  Eigen::MatrixXd band_db(n_frames, n_bands);
  Eigen::VectorXd active_sum = Eigen::VectorXd::Zero(n_bands);
  Eigen::VectorXd inactive_sum = Eigen::VectorXd::Zero(n_bands);
  report.spectrogram_db.resize(n_frames, n_bins);

  for (Eigen::Index i = 0; i < n_frames; ++i) {
    const auto spec = power_spectrum(frames.frame(i), fft_len, rate);
    for (Eigen::Index k = 0; k < n_bins; ++k) report.spectrogram_db(i, k) = safe_db(spec.power[k]);
    const bool active = mask.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index b = 0; b < n_bands; ++b) {
      const double hi = b + 1 == n_bands ? nyquist : static_cast<double>(b + 1) * band_width;
      const double p = band_power(spec, static_cast<double>(b) * band_width, hi);
      band_db(i, b) = safe_db(p);
      (active ? active_sum : inactive_sum)[b] += p;
    }
    report.frame_times.push_back(static_cast<double>(i * frames.hop) / rate);
  }
  for (Eigen::Index k = 0; k < n_bins; ++k) report.bin_centers.push_back(static_cast<double>(k) * rate / fft_len);

  report.active_frames = mask.active_count();
  report.inactive_frames = mask.inactive_count();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.active_mean_db = Eigen::VectorXd::Constant(n_bands, nan);
  report.inactive_mean_db = Eigen::VectorXd::Constant(n_bands, nan);
  for (Eigen::Index b = 0; b < n_bands; ++b) {
    if (report.active_frames > 0)
      report.active_mean_db[b] = safe_db(active_sum[b] / static_cast<double>(report.active_frames));
    if (report.inactive_frames > 0)
      report.inactive_mean_db[b] = safe_db(inactive_sum[b] / static_cast<double>(report.inactive_frames));
  }

  const double lo = std::floor(band_db.minCoeff());
  const double hi = std::floor(band_db.maxCoeff());
  const auto rows = static_cast<Eigen::Index>(hi - lo) + 1;
  report.histogram_lo_db = lo;
  report.histograms = Eigen::MatrixXi::Zero(rows, n_bands);
  for (Eigen::Index i = 0; i < n_frames; ++i)
    for (Eigen::Index b = 0; b < n_bands; ++b)
      ++report.histograms(static_cast<Eigen::Index>(std::floor(band_db(i, b)) - lo), b);
  return report;
}

void write_spectral_csv(const SpectralReport& report, const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), "output directory missing", dir.string());
  const auto n_bands = static_cast<Eigen::Index>(report.band_centers.size());

  {
    auto out = open_csv(dir / "band_means.csv");
    out << "series";
    for (double c : report.band_centers) out << ',' << c;
    out << "\nactive_mean_db";
    for (Eigen::Index b = 0; b < n_bands; ++b) {
      out << ',';
      write_cell(out, report.active_mean_db[b]);
    }
    out << "\ninactive_mean_db";
    for (Eigen::Index b = 0; b < n_bands; ++b) {
      out << ',';
      write_cell(out, report.inactive_mean_db[b]);
    }
    out << '\n';
  }
  {
    auto out = open_csv(dir / "histograms.csv");
    out << "bin_lo_db";
    for (double c : report.band_centers) out << ',' << c;
    out << '\n';
    for (Eigen::Index r = 0; r < report.histograms.rows(); ++r) {
      out << report.histogram_lo_db + static_cast<double>(r);
      for (Eigen::Index b = 0; b < n_bands; ++b) out << ',' << report.histograms(r, b);
      out << '\n';
    }
  }
  {
    auto out = open_csv(dir / "spectrogram.csv");
    out << "time_s";
    for (double f : report.bin_centers) out << ',' << f;
    out << '\n';
    for (Eigen::Index i = 0; i < report.spectrogram_db.rows(); ++i) {
      out << report.frame_times[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < report.spectrogram_db.cols(); ++k)
        out << ',' << report.spectrogram_db(i, k);
      out << '\n';
    }
  }
}

}  // namespace jackprobe
