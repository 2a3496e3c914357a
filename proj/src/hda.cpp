#include "jackprobe/hda.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "jackprobe/error.hpp"
#include "json.hpp"

namespace jackprobe::hda {
namespace {

using nlohmann::json;

const std::map<std::uint16_t, const char*>& verb_names() {
  static const std::map<std::uint16_t, const char*> names = {
      {0x2, "set converter format"},        {0xA, "get converter format"},
      {0x3, "set amplifier gain/mute"},     {0xB, "get amplifier gain/mute"},
      {0x4, "set processing coefficient"},  {0xC, "get processing coefficient"},
      {0x5, "set coefficient index"},       {0xD, "get coefficient index"},
      {0xF00, "get parameter"},
      {0xF01, "get connection select"},     {0x701, "set connection select"},
      {0xF02, "get connection list entry"},
      {0xF03, "get processing state"},      {0x703, "set processing state"},
      {0xF05, "get power state"},           {0x705, "set power state"},
      {0xF06, "get converter stream/channel"}, {0x706, "set converter stream/channel"},
      {0xF07, "get pin widget control"},    {0x707, "set pin widget control"},
      {0xF08, "get unsolicited response"},  {0x708, "set unsolicited response"},
      {0xF09, "get pin sense"},             {0x709, "execute pin sense"},
      {0xF0C, "get EAPD/BTL enable"},       {0x70C, "set EAPD/BTL enable"},
      {0xF0D, "get digital converter"},     {0x70D, "set digital converter 1"},
      {0x70E, "set digital converter 2"},
      {0xF0F, "get volume knob"},           {0x70F, "set volume knob"},
      {0xF15, "get GPIO data"},             {0x715, "set GPIO data"},
      {0xF16, "get GPIO enable"},           {0x716, "set GPIO enable"},
      {0xF17, "get GPIO direction"},        {0x717, "set GPIO direction"},
      {0xF18, "get GPIO wake enable"},      {0x718, "set GPIO wake enable"},
      {0xF19, "get GPIO unsolicited enable"}, {0x719, "set GPIO unsolicited enable"},
      {0xF1A, "get GPIO sticky mask"},      {0x71A, "set GPIO sticky mask"},
      {0xF1C, "get configuration default"}, {0x71C, "set configuration default 0"},
      {0x71D, "set configuration default 1"}, {0x71E, "set configuration default 2"},
      {0x71F, "set configuration default 3"},
      {0xF20, "get subsystem id"},          {0x720, "set subsystem id 0"},
      {0x721, "set subsystem id 1"},        {0x722, "set subsystem id 2"},
      {0x723, "set subsystem id 3"},
      {0xF2D, "get converter channel count"}, {0x72D, "set converter channel count"},
      {0x7FF, "function reset"},
  };
  return names;
}

std::string hex(unsigned v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

unsigned parse_number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number_unsigned() || v.is_number_integer()) return v.get<unsigned>();
  const auto s = v.get<std::string>();
  std::size_t used = 0;
  const unsigned long n = std::stoul(s, &used, 0);
  require(used == s.size(), "invalid number", s);
  return static_cast<unsigned>(n);
}

json command_json(const HdaCommand& c) {
  return {{"codec_address", c.codec_address},
          {"nid", hex(c.nid)},
          {"verb", hex(c.verb_id)},
          {"payload", hex(c.payload)},
          {"word", hex(encode_verb(c))}};
}

}  // namespace

bool is_long_verb(std::uint16_t verb_id) {
  return (verb_id >= 0x2 && verb_id <= 0x5) || (verb_id >= 0xA && verb_id <= 0xD);
}

std::uint32_t encode_verb(std::uint8_t codec_address, std::uint8_t nid, std::uint16_t verb_id,
                          std::uint16_t payload) {
  require(codec_address <= 0xF, "codec address out of range", hex(codec_address));
  const std::uint32_t head = (static_cast<std::uint32_t>(codec_address) << 28) |
                             (static_cast<std::uint32_t>(nid) << 20);
  if (is_long_verb(verb_id)) return head | (static_cast<std::uint32_t>(verb_id) << 16) | payload;
  require(verb_id <= 0xFFF, "verb id out of range", hex(verb_id));
  require(!is_long_verb(static_cast<std::uint16_t>(verb_id >> 8)),
          "short verb collides with the long-form verb space", hex(verb_id));
  require(payload <= 0xFF, "payload out of range for a 12-bit verb", hex(payload));
  return head | (static_cast<std::uint32_t>(verb_id) << 8) | payload;
}

std::uint32_t encode_verb(const HdaCommand& c) {
  return encode_verb(c.codec_address, c.nid, c.verb_id, c.payload);
}

DecodedCommand decode_verb(std::uint32_t word) {
  DecodedCommand d;
  d.command.codec_address = static_cast<std::uint8_t>(word >> 28);
  d.command.nid = static_cast<std::uint8_t>((word >> 20) & 0xFF);
  const auto top = static_cast<std::uint16_t>((word >> 16) & 0xF);
  if (is_long_verb(top)) {
    d.long_form = true;
    d.command.verb_id = top;
    d.command.payload = static_cast<std::uint16_t>(word & 0xFFFF);
  } else {
    d.command.verb_id = static_cast<std::uint16_t>((word >> 8) & 0xFFF);
    d.command.payload = static_cast<std::uint16_t>(word & 0xFF);
  }
  if (auto it = verb_names().find(d.command.verb_id); it != verb_names().end()) {
    d.recognized = true;
    d.name = it->second;
  }
  return d;
}

std::string to_string(PinRole role) { return role == PinRole::in ? "in" : "out"; }

PinRole parse_role(const std::string& text) {
  if (text == "in") return PinRole::in;
  if (text == "out") return PinRole::out;
  throw Error("unknown pin role", text);
}

RetaskPlan plan_retask(const std::vector<PinDescriptor>& pins, const std::string& target, PinRole role,
                       std::uint8_t codec_address) {
  auto it = std::find_if(pins.begin(), pins.end(), [&](const PinDescriptor& p) { return p.label == target; });
  require(it != pins.end(), "unknown pin label", target);
  require(it->retaskable, "pin not retaskable", target);
  require(it->nid.has_value(), "pin has no NID binding in the codec map", target);

  RetaskPlan plan;
  plan.target = target;
  plan.nid = *it->nid;
  plan.role = role;
  if (it->current_role == role) {
    plan.note = "already configured";
    return plan;
  }

  const std::uint8_t nid = *it->nid;
  const std::string name = target + " (" + hex(nid) + ")";
  using namespace verbs;
  const std::uint16_t both = kAmpSetLeft | kAmpSetRight | kAmpMute;
  if (role == PinRole::in) {
    plan.steps.push_back({{codec_address, nid, kSetAmpGainMute, static_cast<std::uint16_t>(kAmpSetOutput | both)},
                          "mute the output amplifier of " + name});
    plan.steps.push_back({{codec_address, nid, kSetPinWidgetControl, kPinInEnable},
                          "enable the input buffer of " + name + ", output and headphone drive off"});
  } else {
    plan.steps.push_back({{codec_address, nid, kSetAmpGainMute, static_cast<std::uint16_t>(kAmpSetInput | both)},
                          "mute the input amplifier of " + name});
    plan.steps.push_back({{codec_address, nid, kSetPinWidgetControl, kPinOutEnable},
                          "enable the output driver of " + name + ", input buffer off"});
  }
  plan.steps.push_back({{codec_address, nid, kGetPinWidgetControl, 0}, "read back the pin widget control of " + name});
  return plan;
}

PlanFormat parse_format(const std::string& text) {
  if (text == "tool-lines") return PlanFormat::tool_lines;
  if (text == "json") return PlanFormat::json;
  throw Error("unknown plan format", text);
}

std::string render_plan(const RetaskPlan& plan, PlanFormat format) {
  if (format == PlanFormat::tool_lines) {
    std::string out;
    for (const auto& s : plan.steps) {
      const unsigned verb = is_long_verb(s.command.verb_id) ? s.command.verb_id << 8u : s.command.verb_id;
      out += hex(s.command.nid) + " " + hex(verb) + " " + hex(s.command.payload) + "\n";
    }
    return out;
  }
  json steps = json::array();
  for (const auto& s : plan.steps) {
    json c = command_json(s.command);
    c["narration"] = s.narration;
    steps.push_back(std::move(c));
  }
  json j = {{"target", plan.target}, {"nid", hex(plan.nid)}, {"role", to_string(plan.role)},
            {"steps", std::move(steps)}, {"note", plan.note}};
  return j.dump(2) + "\n";
}

RetaskPlan parse_plan_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RetaskPlan plan;
    plan.target = j.at("target").get<std::string>();
    plan.nid = static_cast<std::uint8_t>(parse_number(j, "nid"));
    plan.role = parse_role(j.at("role").get<std::string>());
    plan.note = j.value("note", "");
    for (const auto& s : j.at("steps")) {
      HdaCommand c{static_cast<std::uint8_t>(parse_number(s, "codec_address")),
                   static_cast<std::uint8_t>(parse_number(s, "nid")),
                   static_cast<std::uint16_t>(parse_number(s, "verb")),
                   static_cast<std::uint16_t>(parse_number(s, "payload"))};
      encode_verb(c);
      plan.steps.push_back({c, s.value("narration", "")});
    }
    return plan;
  } catch (const json::exception& e) {
    throw Error("invalid plan document", e.what());
  }
}

std::vector<PinDescriptor> parse_codec_map(const std::string& text) {
  try {
    const json j = json::parse(text);
    const json& entries = j.is_object() ? j.at("pins") : j;
    std::vector<PinDescriptor> pins;
    for (const auto& e : entries) {
      PinDescriptor p;
      p.label = e.at("label").get<std::string>();
      if (e.contains("chip_pins")) p.chip_pins = e.at("chip_pins").get<std::vector<int>>();
      if (e.contains("nid") && !e.at("nid").is_null()) {
        const unsigned nid = parse_number(e, "nid");
        require(nid <= 0xFF, "nid out of range", p.label);
        p.nid = static_cast<std::uint8_t>(nid);
      }
      p.retaskable = e.value("retaskable", false);
      p.location = e.value("location", "other");
      p.color = e.value("color", "");
      if (e.contains("role")) {
        p.current_role = parse_role(e.at("role").get<std::string>());
      } else {
        p.current_role = (p.color == "pink" || p.color == "blue") ? PinRole::in : PinRole::out;
      }
      pins.push_back(std::move(p));
    }
    return pins;
  } catch (const json::exception& e) {
    throw Error("invalid codec map", e.what());
  }
}

std::vector<PinDescriptor> load_codec_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open codec map", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_codec_map(ss.str());
}

}  // namespace jackprobe::hda
