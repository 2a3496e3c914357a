#pragma once

// JSON mappings for configuration and report types. Non-finite values map to
// null: an absent corner frequency is +inf, an absent noise floor is -inf.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "jackprobe/capacity.hpp"
#include "jackprobe/channel.hpp"
#include "jackprobe/modem.hpp"
#include "jackprobe/quality.hpp"

namespace jackprobe {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const ChannelModel& m);
void from_json(const Json& j, ChannelModel& m);

void to_json(Json& j, const CombiningResult& r);

void to_json(Json& j, const QualityReport& r);

void to_json(Json& j, const ToneSegment& s);
void from_json(const Json& j, ToneSegment& s);

void to_json(Json& j, const BandSnrProfile& p);
void from_json(const Json& j, BandSnrProfile& p);

void to_json(Json& j, const CapacityReport& r);

void to_json(Json& j, const ModemConfig& c);
void from_json(const Json& j, ModemConfig& c);

void to_json(Json& j, const BerReport& r);

/// Status document for a demodulation attempt (payload itself omitted).
Json demod_status_json(const DemodResult& r);

/// Accepts a bare segment array or {"segments": [...]}.
ToneSchedule parse_schedule(const Json& j);

Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parses a file and converts it, reporting JSON errors as jackprobe::Error.
template <typename T>
T load_json(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid document", path.string() + ": " + e.what());
  }
}

}  // namespace jackprobe
