#include <algorithm>
#include <cmath>
#include <numeric>

#include "jackprobe/audio.hpp"

namespace jackprobe {
namespace {

constexpr double kKaiserBeta = 8.6;
constexpr double kZeroCrossings = 24.0;  // per side, at the filter cutoff
constexpr double kPassbandFraction = 0.95;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  require(!values.empty(), "percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (values[hi] == values[lo]) return values[lo];
  if (!std::isfinite(values[lo]) || !std::isfinite(values[hi]))
    return frac < 0.5 ? values[lo] : values[hi];
  return values[lo] + (values[hi] - values[lo]) * frac;
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  require(target_rate > 0, "invalid target rate", std::to_string(target_rate));
  const int source_rate = buffer.sample_rate();
  if (source_rate == target_rate) return buffer;

  // Output sample j sits at input position j * up / down (exact rational).
  const long g = std::gcd(source_rate, target_rate);
  const long up = source_rate / g;
  const long down = target_rate / g;

  const Eigen::Index n_in = buffer.length();
  const auto n_out = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n_in) * target_rate / source_rate));

  // Cutoff in cycles per input sample.
  const double cutoff = 0.5 * kPassbandFraction * std::min(1.0, static_cast<double>(target_rate) / source_rate);
  const double half_width = kZeroCrossings / (2.0 * cutoff);
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

  auto kernel = [&](double t) {
    const double r = t / half_width;
    if (std::abs(r) >= 1.0) return 0.0;
    const double win = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
    return 2.0 * cutoff * sinc(2.0 * cutoff * t) * win;
  };

  struct Phase {
    long first = 0;  // offset of the first tap relative to the base input index
    std::vector<double> taps;
  };
  auto make_phase = [&](long rem) {
    const double frac = static_cast<double>(rem) / static_cast<double>(down);
    Phase ph;
    ph.first = static_cast<long>(std::ceil(frac - half_width));
    const long last = static_cast<long>(std::floor(frac + half_width));
    for (long o = ph.first; o <= last; ++o) ph.taps.push_back(kernel(frac - static_cast<double>(o)));
    return ph;
  };

  // One tap set per fractional phase; very large phase counts are built per sample.
  constexpr long kMaxCachedPhases = 4096;
  std::vector<Phase> table;
  if (down <= kMaxCachedPhases) {
    table.reserve(static_cast<std::size_t>(down));
    for (long r = 0; r < down; ++r) table.push_back(make_phase(r));
  }

  AudioBuffer::Samples out(n_out, buffer.channels());
  Phase scratch;
  for (Eigen::Index j = 0; j < n_out; ++j) {
    const long num = static_cast<long>(j) * up;
    const long base = num / down;
    const long rem = num % down;
    const Phase* ph;
    if (table.empty()) {
      scratch = make_phase(rem);
      ph = &scratch;
    } else {
      ph = &table[static_cast<std::size_t>(rem)];
    }
    const long n_taps = static_cast<long>(ph->taps.size());
    const long t_lo = std::max<long>(0, -(base + ph->first));
    const long t_hi = std::min<long>(n_taps, static_cast<long>(n_in) - (base + ph->first));
    for (int c = 0; c < buffer.channels(); ++c) {
      double acc = 0.0;
      for (long t = t_lo; t < t_hi; ++t)
        acc += ph->taps[static_cast<std::size_t>(t)] * buffer.samples()(base + ph->first + t, c);
      out(j, c) = acc;
    }
  }
  return AudioBuffer(std::move(out), target_rate);
}

}  // namespace jackprobe
