#include <algorithm>
#include <cmath>

#include "jackprobe/quality.hpp"

namespace jackprobe {

QualityReport quality_report(const AudioBuffer& ref_in, const AudioBuffer& rec_in,
                             const QualityOptions& options) {
  const int rate = std::min(ref_in.sample_rate(), rec_in.sample_rate());
  const AudioBuffer ref =
      resample(AudioBuffer::mono(ref_in.downmix(), ref_in.sample_rate()), rate);
  const AudioBuffer rec =
      resample(AudioBuffer::mono(rec_in.downmix(), rec_in.sample_rate()), rate);

  const long max_lag = std::min<long>(std::lround(options.max_lag_seconds * rate),
                                      std::min(ref.length(), rec.length()) - 1);
  const Alignment alignment = align_by_cross_correlation(ref, rec, std::max(0L, max_lag));
  const auto [ref_t, rec_t] = trim_to_overlap(ref, rec, alignment.lag);

  const VadMask mask = detect_voice_activity(ref_t, options.vad);

  QualityReport report;
  report.nist_stnr_db = nist_stnr(rec_t);
  report.wada_snr_db = wada_snr(rec_t);
  report.snr_vad_db = snr_vad(rec_t, mask);
  report.sar_db = sar(ref_t, rec_t, std::min<int>(options.sar_filter_len, static_cast<int>(ref_t.length())));
  report.alignment_lag = alignment.lag;
  return report;
}

}  // namespace jackprobe
