#include <algorithm>
#include <cmath>

#include "jackprobe/quality.hpp"

namespace jackprobe {

Alignment align_by_cross_correlation(const AudioBuffer& ref, const AudioBuffer& rec, long max_lag) {
  const auto& r = require_mono(ref, "align_by_cross_correlation");
  const auto& y = require_mono(rec, "align_by_cross_correlation");
  require(ref.sample_rate() == rec.sample_rate(), "sample rate mismatch");
  require(max_lag >= 0 && max_lag < std::min(ref.length(), rec.length()), "max_lag out of range",
          std::to_string(max_lag));

  require(!r.isZero(0) && !y.isZero(0), "correlation undefined for an all-zero signal");

  const Signal<double> c = cross_correlation(r.col(0), y.col(0), max_lag);
  const long nr = ref.length(), ny = rec.length();
  Signal<double> er(nr + 1), ey(ny + 1);
  er[0] = ey[0] = 0.0;
  for (long i = 0; i < nr; ++i) er[i + 1] = er[i] + r(i, 0) * r(i, 0);
  for (long i = 0; i < ny; ++i) ey[i + 1] = ey[i] + y(i, 0) * y(i, 0);
  const long min_overlap = std::max(1L, std::min(nr, ny) / 2);

  auto score = [&](long lag) {
    const long lo = std::max(0L, -lag), hi = std::min(nr, ny - lag);
    const double e = (er[hi] - er[lo]) * (ey[hi + lag] - ey[lo + lag]);
    return e > 0.0 ? c[max_lag + lag] / std::sqrt(e) : 0.0;
  };

  // Visit lags by increasing |lag| so that only a strictly larger value wins.
  long best = 0;
  double best_value = score(0);
  for (long m = 1; m <= max_lag; ++m) {
    for (long lag : {m, -m}) {
      if (std::min(nr, ny - lag) - std::max(0L, -lag) < min_overlap) continue;
      const double v = score(lag);
      if (v > best_value + 1e-12) {
        best_value = v;
        best = lag;
      }
    }
  }
  return {best, best_value};
}

std::pair<AudioBuffer, AudioBuffer> trim_to_overlap(const AudioBuffer& ref, const AudioBuffer& rec,
                                                    long lag) {
  const Eigen::Index ref_start = lag < 0 ? -lag : 0;
  const Eigen::Index rec_start = lag > 0 ? lag : 0;
  const Eigen::Index n = std::min(ref.length() - ref_start, rec.length() - rec_start);
  require(n > 0, "zero-length overlap", "lag " + std::to_string(lag));
  return {AudioBuffer(ref.samples().middleRows(ref_start, n), ref.sample_rate()),
          AudioBuffer(rec.samples().middleRows(rec_start, n), rec.sample_rate())};
}

}  // namespace jackprobe
