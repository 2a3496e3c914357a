#include <algorithm>

#include "jackprobe/quality.hpp"

namespace jackprobe {

std::size_t VadMask::active_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
}

VadMask detect_voice_activity(const AudioBuffer& ref, const VadOptions& options) {
  const auto frames = frame_signal(ref, options.frame_ms, options.hop_ms);
  const Signal<double> power = frame_powers(frames);

  // Exact zeros map to -inf so silence stays below any finite threshold.
  std::vector<double> level(static_cast<std::size_t>(power.size()));
  for (Eigen::Index i = 0; i < power.size(); ++i)
    level[static_cast<std::size_t>(i)] = to_db(power[i]);

  const double floor_db = percentile(level, options.floor_percentile);
  const double threshold = floor_db + options.threshold_db;

  VadMask mask;
  mask.frame_len = frames.frame_len;
  mask.hop = frames.hop;
  mask.source_rate = frames.origin_rate;
  mask.labels.resize(level.size());

  int hang = 0;
  for (std::size_t i = 0; i < level.size(); ++i) {
    // -inf + 6 stays -inf, so an all-zero signal must not compare >= here.
    const bool raw = std::isfinite(level[i]) && level[i] >= threshold;
    if (raw) {
      mask.labels[i] = true;
      hang = options.hangover_frames;
    } else if (hang > 0) {
      mask.labels[i] = true;
      --hang;
    }
  }
  return mask;
}

}  // namespace jackprobe
