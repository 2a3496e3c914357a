#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>

#include "jackprobe/modem.hpp"

namespace jackprobe {
namespace {

constexpr double kRampMs = 2.0;
constexpr double kDetectThreshold = 0.6;
constexpr Eigen::Index kGridPerSymbol = 16;
constexpr double kTrackingRate = 0.125;
constexpr double kPlateauTolerance = 0.01;

Eigen::Index ramp_samples(const ModemConfig& c) { return samples_for_ms(kRampMs, c.sample_rate); }

/// Integration window: the longest whole number of 1/band_width periods that
/// fits between the ramps, so neighbouring band centers stay orthogonal.
Eigen::Index integration_samples(const ModemConfig& c) {
  const double usable_s = (c.symbol_ms - 2 * kRampMs) / 1000.0;
  const double periods = std::floor(usable_s * c.band_width + 1e-9);
  require(periods >= 1, "symbol too short for the band width",
          std::to_string(c.symbol_ms) + " ms at " + std::to_string(c.band_width) + " Hz");
  return static_cast<Eigen::Index>(std::lround(periods / c.band_width * c.sample_rate));
}

/// Phase (radians, reduced) of a tone at frequency f after n samples.
double tone_phase(double f, Eigen::Index n, int rate) {
  const double cycles = std::fmod(f * static_cast<double>(n), static_cast<double>(rate)) / rate;
  return 2.0 * std::numbers::pi * cycles;
}

void check_bands(const BandSet& bands, const ModemConfig& config) {
  require(!bands.empty(), "no bands selected");
  const int k = config.band_count();
  for (std::size_t i = 0; i < bands.size(); ++i) {
    require(bands[i] >= 0 && bands[i] < k, "band outside the modem range", std::to_string(bands[i]));
    if (i > 0) require(bands[i] > bands[i - 1], "bands must be ascending and unique");
  }
}

Eigen::ArrayXd raised_cosine_envelope(Eigen::Index n, Eigen::Index ramp) {
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(n);
  for (Eigen::Index i = 0; i < ramp; ++i) {
    const double v = 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) / ramp));
    w[i] = v;
    w[n - 1 - i] = v;
  }
  return w;
}

/// Complex band sums of x over arbitrary windows, all bands in one sweep.
class BandEnergies {
 public:
  BandEnergies(const Signal<double>& x, const std::vector<double>& freqs, int rate,
               const std::vector<Eigen::Index>& boundaries, Eigen::Index renorm)
      : boundaries_(boundaries) {
    const auto k = static_cast<Eigen::Index>(freqs.size());
    re_.resize(k, static_cast<Eigen::Index>(boundaries.size()));
    im_.resize(k, static_cast<Eigen::Index>(boundaries.size()));
    Eigen::ArrayXd wr(k), wi(k), pr(k), pi(k);
    for (Eigen::Index b = 0; b < k; ++b) {
      const double step = -tone_phase(freqs[static_cast<std::size_t>(b)], 1, rate);
      wr[b] = std::cos(step);
      wi[b] = std::sin(step);
    }
    Eigen::ArrayXd ar = Eigen::ArrayXd::Zero(k), ai = Eigen::ArrayXd::Zero(k);
    std::size_t next = 0;
    const Eigen::Index end = boundaries.empty() ? 0 : boundaries.back();
    for (Eigen::Index n = 0; n <= end; ++n) {
      if (n % renorm == 0) {
        for (Eigen::Index b = 0; b < k; ++b) {
          const double ph = -tone_phase(freqs[static_cast<std::size_t>(b)], n, rate);
          pr[b] = std::cos(ph);
          pi[b] = std::sin(ph);
        }
      }
      while (next < boundaries.size() && boundaries[next] == n) {
        re_.col(static_cast<Eigen::Index>(next)) = ar;
        im_.col(static_cast<Eigen::Index>(next)) = ai;
        ++next;
      }
      if (n == end) break;
      const double v = x[n];
      ar += v * pr;
      ai += v * pi;
      const Eigen::ArrayXd nr = pr * wr - pi * wi;
      pi = pr * wi + pi * wr;
      pr = nr;
    }
  }

  /// |sum over [a, b)|^2 per band.
  Eigen::ArrayXd energy(Eigen::Index a, Eigen::Index b) const {
    const Eigen::Index ia = index(a), ib = index(b);
    return (re_.col(ib) - re_.col(ia)).array().square() + (im_.col(ib) - im_.col(ia)).array().square();
  }

 private:
  Eigen::Index index(Eigen::Index sample) const {
    auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), sample);
    return static_cast<Eigen::Index>(it - boundaries_.begin());
  }

  std::vector<Eigen::Index> boundaries_;
  Eigen::MatrixXd re_, im_;
};

double pearson(const Eigen::ArrayXd& centered_pattern, double pattern_norm, const Eigen::ArrayXd& s) {
  const double n = static_cast<double>(s.size());
  const double mean = s.sum() / n;
  const double var = (s - mean).square().sum();
  if (!(var > 0) || !(pattern_norm > 0)) return 0.0;
  return (centered_pattern * s).sum() / (pattern_norm * std::sqrt(var));
}

}  // namespace

void ModemConfig::validate() const {
  require(sample_rate > 0, "invalid sample rate");
  require(band_width > 0, "band width must be positive");
  require(f_lo >= 0 && f_hi > f_lo, "invalid modem band", std::to_string(f_lo) + "-" + std::to_string(f_hi));
  require(f_hi <= sample_rate / 2.0 + 1e-9, "f_hi above Nyquist", std::to_string(f_hi));
  const double k = (f_hi - f_lo) / band_width;
  require(std::abs(k - std::round(k)) < 1e-6 && std::round(k) >= 1,
          "modem range is not a whole number of bands", std::to_string(k));
  require(amplitude_per_band > 0, "amplitude must be positive");
  require(symbol_ms > 2 * kRampMs, "symbol shorter than its ramps");
  require(integration_samples(*this) + 2 * ramp_samples(*this) <= symbol_samples(),
          "integration window exceeds the symbol");
  mls_sequence(preamble_len);
}

int ModemConfig::band_count() const {
  return static_cast<int>(std::lround((f_hi - f_lo) / band_width));
}

Eigen::Index ModemConfig::symbol_samples() const { return samples_for_ms(symbol_ms, sample_rate); }

BandSet all_bands(const ModemConfig& config) {
  BandSet out(static_cast<std::size_t>(config.band_count()));
  for (int i = 0; i < config.band_count(); ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

BandSet allocate_bands(const BandSnrProfile& profile, const ModemConfig& config, double min_snr_db) {
  config.validate();
  require(std::abs(profile.band_width - config.band_width) < 1e-9 * config.band_width,
          "profile band width differs from modem band width");
  BandSet selected;
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < config.band_count(); ++b) {
    const double lo = config.f_lo + b * config.band_width;
    auto it = std::find_if(profile.bands.begin(), profile.bands.end(), [&](const BandSnr& s) {
      return std::abs(s.f_lo - lo) < 1e-6 * config.band_width;
    });
    require(it != profile.bands.end(), "profile does not cover the modem range",
            "missing band at " + std::to_string(lo) + " Hz");
    best = std::max(best, it->snr_db);
    if (it->snr_db >= min_snr_db) selected.push_back(b);
  }
  require(!selected.empty(), "no band reaches the minimum SNR",
          "best available SNR " + std::to_string(best) + " dB");
  return selected;
}

AudioBuffer modulate(std::span<const std::uint8_t> payload, const ModemConfig& config,
                     const BandSet& bands) {
  config.validate();
  check_bands(bands, config);
  const Bits bits = serialize_frame(payload, config.preamble_len);
  const auto k = bands.size();
  const std::size_t preamble = static_cast<std::size_t>(config.preamble_len);
  const std::size_t body = bits.size() - preamble;
  const std::size_t n_sym = preamble + (body + k - 1) / k;
  const Eigen::Index ns = config.symbol_samples();
  const int rate = config.sample_rate;

  const Eigen::ArrayXd env = raised_cosine_envelope(ns, ramp_samples(config));
  Signal<double> out = Signal<double>::Zero(static_cast<Eigen::Index>(n_sym) * ns);
  for (std::size_t slot = 0; slot < k; ++slot) {
    const double f = config.band_center(bands[slot]);
    Eigen::ArrayXd s(ns), c(ns);
    for (Eigen::Index n = 0; n < ns; ++n) {
      const double ph = tone_phase(f, n, rate);
      s[n] = env[n] * std::sin(ph);
      c[n] = env[n] * std::cos(ph);
    }
    for (std::size_t m = 0; m < n_sym; ++m) {
      const bool on = m < preamble ? bits[m] != 0 : [&] {
        const std::size_t i = (m - preamble) * k + slot;
        return i < body && bits[preamble + i] != 0;
      }();
      if (!on) continue;
      const Eigen::Index t0 = static_cast<Eigen::Index>(m) * ns;
      const double ph0 = tone_phase(f, t0, rate);
      out.segment(t0, ns).array() +=
          config.amplitude_per_band * (std::cos(ph0) * s + std::sin(ph0) * c);
    }
  }
  return AudioBuffer::mono(std::move(out), rate);
}

DemodResult demodulate(const AudioBuffer& buffer, const ModemConfig& config, const BandSet& bands,
                       std::optional<std::size_t> body_bits) {
  config.validate();
  check_bands(bands, config);
  require(buffer.sample_rate() == config.sample_rate, "buffer rate differs from modem rate",
          std::to_string(buffer.sample_rate()));
  DemodResult result;
  const Eigen::Index ns = config.symbol_samples();
  // One symbol of silence on both sides keeps the timing plateau whole at the edges.
  const auto& raw = require_mono(buffer, "demodulate");
  Signal<double> x = Signal<double>::Zero(raw.rows() + 2 * ns);
  x.segment(ns, raw.rows()) = raw.col(0);
  const Eigen::Index len = integration_samples(config);
  const Eigen::Index off = (ns - len) / 2;
  const Eigen::Index n = x.size();
  const auto p = static_cast<Eigen::Index>(config.preamble_len);

  Eigen::Index grid = 0;
  while (grid * ns / kGridPerSymbol + off + len <= n) ++grid;
  const Eigen::Index k_span = kGridPerSymbol * (p - 1);
  if (grid <= k_span) {
    result.detail = "signal shorter than the preamble";
    return result;
  }
  auto start = [&](Eigen::Index k) { return k * ns / kGridPerSymbol + off; };

  std::vector<Eigen::Index> boundaries;
  boundaries.reserve(static_cast<std::size_t>(2 * grid));
  for (Eigen::Index k = 0; k < grid; ++k) {
    boundaries.push_back(start(k));
    boundaries.push_back(start(k) + len);
  }
  std::sort(boundaries.begin(), boundaries.end());
  boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());

  std::vector<double> freqs;
  for (int b : bands) freqs.push_back(config.band_center(b));
  const BandEnergies sums(x, freqs, config.sample_rate, boundaries, ns);
  const double scale = 4.0 / (static_cast<double>(len) * static_cast<double>(len));

  const auto kb = static_cast<Eigen::Index>(bands.size());
  Eigen::MatrixXd energy(kb, grid);  // squared amplitude estimate per band and grid point
  for (Eigen::Index k = 0; k < grid; ++k) energy.col(k) = (sums.energy(start(k), start(k) + len) * scale).matrix();
  const Eigen::VectorXd total = energy.colwise().sum().transpose();

  const Bits pattern = mls_sequence(config.preamble_len);
  Eigen::ArrayXd centered(p);
  for (Eigen::Index j = 0; j < p; ++j) centered[j] = pattern[static_cast<std::size_t>(j)];
  centered -= centered.mean();
  const double pattern_norm = std::sqrt(centered.square().sum());
  auto ncc = [&](Eigen::Index k) {
    Eigen::ArrayXd s(p);
    for (Eigen::Index j = 0; j < p; ++j) s[j] = total[k + kGridPerSymbol * j];
    return pearson(centered, pattern_norm, s);
  };

  const Eigen::Index last = grid - 1 - k_span;
  Eigen::Index found = -1;
  for (Eigen::Index k = 0; k <= last; ++k) {
    if (ncc(k) >= kDetectThreshold) {
      found = k;
      break;
    }
  }
  if (found < 0) {
    result.detail = "no grid offset reached correlation " + std::to_string(kDetectThreshold);
    return result;
  }
  const Eigen::Index stop = std::min(last, found + kGridPerSymbol);
  std::vector<double> scores;
  for (Eigen::Index k = found; k <= stop; ++k) scores.push_back(ncc(k));
  const auto peak = std::max_element(scores.begin(), scores.end()) - scores.begin();
  // The correlation is flat while the window stays inside the symbol's
  // plateau; take the middle of that run.
  auto lo = peak, hi = peak;
  const double floor = scores[static_cast<std::size_t>(peak)] - kPlateauTolerance;
  while (lo > 0 && scores[static_cast<std::size_t>(lo - 1)] >= floor) --lo;
  while (hi + 1 < static_cast<long>(scores.size()) && scores[static_cast<std::size_t>(hi + 1)] >= floor) ++hi;
  const Eigen::Index best = found + (lo + hi) / 2;
  const double best_ncc = scores[static_cast<std::size_t>((lo + hi) / 2)];
  result.offset = best * ns / kGridPerSymbol - ns;
  result.correlation = best_ncc;

  Eigen::VectorXd on = Eigen::VectorXd::Zero(kb), offv = Eigen::VectorXd::Zero(kb);
  double n_on = 0, n_off = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = energy.col(best + kGridPerSymbol * j);
    if (pattern[static_cast<std::size_t>(j)]) {
      on += col;
      n_on += 1;
    } else {
      offv += col;
      n_off += 1;
    }
  }
  on /= n_on;
  offv /= n_off;

  std::optional<std::size_t> target = body_bits;
  Bits& bits = result.body_bits;
  for (Eigen::Index s = 0;; ++s) {
    if (!target && bits.size() >= 16) {
      std::size_t declared = 0;
      for (int i = 0; i < 16; ++i) declared = (declared << 1) | bits[static_cast<std::size_t>(i)];
      target = 48 + 8 * declared;
    }
    if (target && bits.size() >= *target) break;
    const Eigen::Index k = best + kGridPerSymbol * (p + s);
    if (k >= grid) {
      result.status = FrameStatus::truncated;
      result.detail = "frame needs " + std::to_string(target.value_or(0)) + " bits, signal ends after " +
                      std::to_string(bits.size());
      return result;
    }
    for (Eigen::Index b = 0; b < kb; ++b) {
      const double e = energy(b, k);
      const bool one = e >= 0.5 * (on[b] + offv[b]);
      bits.push_back(one ? 1 : 0);
      double& track = one ? on[b] : offv[b];
      track += kTrackingRate * (e - track);
    }
  }
  bits.resize(*target);

  const FrameParse parsed = parse_frame_body(bits);
  result.status = parsed.status;
  result.payload = parsed.payload;
  if (parsed.status == FrameStatus::crc_mismatch) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "received 0x%08x, computed 0x%08x", parsed.crc_received,
                  parsed.crc_computed);
    result.detail = buf;
  }
  return result;
}

double out_of_band_ratio(const AudioBuffer& buffer, const ModemConfig& config) {
  const Signal<double> x = require_mono(buffer, "out_of_band_ratio").col(0);
  const Eigen::Index fft_len = next_pow2(std::max<Eigen::Index>(x.size(), 2));
  std::vector<double> padded(static_cast<std::size_t>(fft_len), 0.0);
  std::copy(x.data(), x.data() + x.size(), padded.begin());
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);

  const double bin = static_cast<double>(buffer.sample_rate()) / static_cast<double>(fft_len);
  double in = 0, out = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * bin;
    const double pw = std::norm(spec[k]);
    if (f >= config.f_lo && f <= config.f_hi) in += pw;
    else if (f < config.f_lo - 500.0 || f > config.f_hi + 500.0) out += pw;
  }
  require(in > 0, "no in-band power");
  return out / in;
}

}  // namespace jackprobe
