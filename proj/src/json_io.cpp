#include "jackprobe/json_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace jackprobe {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  require(j.is_object(), std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    require(known, std::string("unknown field in ") + what, key);
  }
}

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double read_extended(const Json& j, const char* key, double fallback, double null_value) {
  if (!j.contains(key)) return fallback;
  return j.at(key).is_null() ? null_value : j.at(key).get<double>();
}

}  // namespace

void to_json(Json& j, const ChannelModel& m) {
  j = Json{{"distance_m", m.distance_m},
           {"reference_gain_db", m.reference_gain_db},
           {"corner_hz", finite_or_null(m.corner_hz)},
           {"rolloff_db_per_octave", m.rolloff_db_per_octave},
           {"noise_floor_dbfs", finite_or_null(m.noise_floor_dbfs)},
           {"noise_seed", m.noise_seed}};
}

void from_json(const Json& j, ChannelModel& m) {
  reject_unknown(j, {"distance_m", "reference_gain_db", "corner_hz", "rolloff_db_per_octave",
                     "noise_floor_dbfs", "noise_seed"},
                 "channel model");
  read_field(j, "distance_m", m.distance_m);
  read_field(j, "reference_gain_db", m.reference_gain_db);
  m.corner_hz = read_extended(j, "corner_hz", m.corner_hz, kInf);
  read_field(j, "rolloff_db_per_octave", m.rolloff_db_per_octave);
  m.noise_floor_dbfs = read_extended(j, "noise_floor_dbfs", m.noise_floor_dbfs, -kInf);
  read_field(j, "noise_seed", m.noise_seed);
  m.validate();
}

void to_json(Json& j, const CombiningResult& r) {
  j = Json{{"snr_left_db", r.snr_left_db},
           {"snr_right_db", r.snr_right_db},
           {"snr_combined_db", r.snr_combined_db},
           {"gain_db", r.gain_db},
           {"noise_correlation", r.noise_correlation},
           {"trials", r.trials}};
}

void to_json(Json& j, const QualityReport& r) {
  j = Json{{"nist_stnr_db", r.nist_stnr_db},
           {"wada_snr_db", r.wada_snr_db},
           {"snr_vad_db", r.snr_vad_db},
           {"sar_db", r.sar_db},
           {"alignment_lag_samples", r.alignment_lag},
           {"pesq_mos", r.pesq_mos ? Json(*r.pesq_mos) : Json(nullptr)}};
}

void to_json(Json& j, const ToneSegment& s) {
  j = Json{{"band", s.band}, {"start_s", s.start_s}, {"duration_s", s.duration_s}};
}

void from_json(const Json& j, ToneSegment& s) {
  reject_unknown(j, {"band", "start_s", "duration_s"}, "tone segment");
  s.band = j.at("band").get<int>();
  s.start_s = j.at("start_s").get<double>();
  s.duration_s = j.at("duration_s").get<double>();
}

ToneSchedule parse_schedule(const Json& j) {
  const Json& segments = j.is_object() ? j.at("segments") : j;
  require(segments.is_array(), "schedule must be an array of segments");
  try {
    return segments.get<ToneSchedule>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid schedule", e.what());
  }
}

void to_json(Json& j, const BandSnrProfile& p) {
  Json bands = Json::array();
  for (const auto& b : p.bands)
    bands.push_back(Json{{"f_lo_hz", b.f_lo}, {"f_hi_hz", b.f_hi}, {"snr_db", b.snr_db}});
  j = Json{{"band_width_hz", p.band_width},
           {"max_freq_hz", p.max_freq},
           {"sample_rate", p.sample_rate},
           {"bands", std::move(bands)}};
}

void from_json(const Json& j, BandSnrProfile& p) {
  reject_unknown(j, {"band_width_hz", "max_freq_hz", "sample_rate", "bands"}, "band SNR profile");
  read_field(j, "band_width_hz", p.band_width);
  read_field(j, "max_freq_hz", p.max_freq);
  read_field(j, "sample_rate", p.sample_rate);
  p.bands.clear();
  for (const auto& b : j.at("bands"))
    p.bands.push_back({b.at("f_lo_hz").get<double>(), b.at("f_hi_hz").get<double>(), b.at("snr_db").get<double>()});
  p.validate();
}

void to_json(Json& j, const CapacityReport& r) {
  Json bands = Json::array();
  for (const auto& b : r.bands)
    bands.push_back(Json{{"f_lo_hz", b.f_lo},
                         {"f_hi_hz", b.f_hi},
                         {"snr_db", b.snr_db},
                         {"capacity_exact_bps", b.exact_bps},
                         {"capacity_approx_bps", b.approx_bps}});
  j = Json{{"hearing_cutoff_hz", r.hearing_cutoff},
           {"total", {{"exact_bps", r.total.exact_bps}, {"approx_bps", r.total.approx_bps}}},
           {"inaudible", {{"exact_bps", r.inaudible.exact_bps}, {"approx_bps", r.inaudible.approx_bps}}},
           {"bands", std::move(bands)}};
}

void to_json(Json& j, const ModemConfig& c) {
  j = Json{{"f_lo", c.f_lo},
           {"f_hi", c.f_hi},
           {"band_width", c.band_width},
           {"symbol_ms", c.symbol_ms},
           {"sample_rate", c.sample_rate},
           {"preamble_len", c.preamble_len},
           {"amplitude_per_band", c.amplitude_per_band}};
}

void from_json(const Json& j, ModemConfig& c) {
  reject_unknown(j, {"f_lo", "f_hi", "band_width", "symbol_ms", "sample_rate", "preamble_len",
                     "amplitude_per_band"},
                 "modem config");
  read_field(j, "f_lo", c.f_lo);
  read_field(j, "f_hi", c.f_hi);
  read_field(j, "band_width", c.band_width);
  read_field(j, "symbol_ms", c.symbol_ms);
  read_field(j, "sample_rate", c.sample_rate);
  read_field(j, "preamble_len", c.preamble_len);
  read_field(j, "amplitude_per_band", c.amplitude_per_band);
  c.validate();
}

void to_json(Json& j, const BerReport& r) {
  j = Json{{"bits_sent", r.bits_sent},
           {"bit_errors", r.bit_errors},
           {"ber", r.ber},
           {"frames_sent", r.frames_sent},
           {"frames_recovered", r.frames_recovered},
           {"effective_throughput", r.effective_throughput},
           {"audio_seconds", r.audio_seconds},
           {"raw_bit_rate", r.raw_bit_rate},
           {"capacity_bound_bps", finite_or_null(r.capacity_bound_bps)},
           {"below_capacity", r.below_capacity}};
}

Json demod_status_json(const DemodResult& r) {
  Json j{{"status", to_string(r.status)}, {"payload_bytes", r.payload.size()}};
  if (r.status != FrameStatus::no_preamble) {
    j["offset_samples"] = r.offset;
    j["preamble_correlation"] = r.correlation;
  }
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid JSON", path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "unwritable path", path.string());
  out << text;
  require(static_cast<bool>(out.flush()), "write failed", path.string());
}

}  // namespace jackprobe
