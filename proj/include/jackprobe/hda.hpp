#pragma once

// Intel HD Audio codec command words and jack retasking plans.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace jackprobe::hda {

struct HdaCommand {
  std::uint8_t codec_address = 0;  // 4 bits
  std::uint8_t nid = 0;
  std::uint16_t verb_id = 0;       // 12 bits, or 4 bits for the long form
  std::uint16_t payload = 0;       // 8 bits, or 16 bits for the long form

  bool operator==(const HdaCommand&) const = default;
};

/// 4-bit verbs carrying a 16-bit payload: converter format, amplifier
/// gain/mute, coefficient index/data, processing coefficient.
bool is_long_verb(std::uint16_t verb_id);

std::uint32_t encode_verb(std::uint8_t codec_address, std::uint8_t nid, std::uint16_t verb_id,
                          std::uint16_t payload);
std::uint32_t encode_verb(const HdaCommand& command);

struct DecodedCommand {
  HdaCommand command;
  bool long_form = false;
  bool recognized = false;  // verb id is a documented get/set verb
  std::string name;
};

DecodedCommand decode_verb(std::uint32_t word);

namespace verbs {
constexpr std::uint16_t kGetParameter = 0xF00;
constexpr std::uint16_t kGetPinWidgetControl = 0xF07;
constexpr std::uint16_t kSetPinWidgetControl = 0x707;
constexpr std::uint16_t kSetAmpGainMute = 0x3;

constexpr std::uint8_t kPinOutEnable = 0x40;
constexpr std::uint8_t kPinInEnable = 0x20;
constexpr std::uint8_t kPinHeadphoneEnable = 0x80;

constexpr std::uint16_t kAmpSetOutput = 0x8000;
constexpr std::uint16_t kAmpSetInput = 0x4000;
constexpr std::uint16_t kAmpSetLeft = 0x2000;
constexpr std::uint16_t kAmpSetRight = 0x1000;
constexpr std::uint16_t kAmpMute = 0x0080;
}  // namespace verbs

enum class PinRole { in, out };

std::string to_string(PinRole role);
PinRole parse_role(const std::string& text);

struct PinDescriptor {
  std::string label;
  std::vector<int> chip_pins;
  std::optional<std::uint8_t> nid;
  PinRole current_role = PinRole::out;
  bool retaskable = false;  // wired to both the input and the output path
  std::string location;     // front | rear | other
  std::string color;
};

struct PlanStep {
  HdaCommand command;
  std::string narration;

  bool operator==(const PlanStep&) const = default;
};

struct RetaskPlan {
  std::string target;
  std::uint8_t nid = 0;
  PinRole role = PinRole::in;
  std::vector<PlanStep> steps;
  std::string note;  // "already configured" for an empty plan

  bool operator==(const RetaskPlan&) const = default;
};

RetaskPlan plan_retask(const std::vector<PinDescriptor>& pins, const std::string& target, PinRole role,
                       std::uint8_t codec_address = 0);

enum class PlanFormat { tool_lines, json };

PlanFormat parse_format(const std::string& text);

/// tool-lines: "0x<nid> 0x<verb> 0x<payload>" per command, lowercase hex.
/// Long-form verbs are written as verb_id << 8 so the word packs the same way.
std::string render_plan(const RetaskPlan& plan, PlanFormat format);

RetaskPlan parse_plan_json(const std::string& text);

std::vector<PinDescriptor> parse_codec_map(const std::string& text);
std::vector<PinDescriptor> load_codec_map(const std::filesystem::path& path);

}  // namespace jackprobe::hda
