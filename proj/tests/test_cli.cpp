#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "../tools/cli.hpp"
#include "jackprobe/channel.hpp"
#include "jackprobe/json_io.hpp"
#include "jackprobe/wav.hpp"
#include "signals.hpp"

using namespace jackprobe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "jackprobe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("jackprobe_cli_" + std::to_string(std::rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  const Outcome help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("hda-plan") != std::string::npos);
  CHECK(help.err.empty());

  const Outcome none = run_cli({});
  CHECK(none.code == 2);
  CHECK(none.out.empty());
  CHECK_FALSE(none.err.empty());

  const Outcome missing = run_cli({"quality", "--ref", "a.wav"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--rec") != std::string::npos);

  CHECK(run_cli({"hda-plan", "--map", "m.json", "--pin", "X", "--role", "sideways"}).code == 2);
}

TEST_CASE("quality of a recording against itself") {
  TempDir dir;
  write_wav(testsig::mono(testsig::speech_like(3.0, 16000, 1), 16000), dir / "ref.wav");
  const Outcome r = run_cli({"quality", "--ref", dir / "ref.wav", "--rec", dir / "ref.wav"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["sar_db"] == 100.0);
  CHECK(j["alignment_lag_samples"] == 0);
  CHECK(j["pesq_mos"].is_null());
  CHECK(r.err.empty());

  const Outcome to_file = run_cli({"quality", "--ref", dir / "ref.wav", "--rec", dir / "ref.wav", "--out", dir / "q.json"});
  CHECK(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(Json::parse(read_text_file(dir / "q.json")) == j);
}

TEST_CASE("domain errors exit 1 with a JSON report") {
  TempDir dir;
  const Outcome r = run_cli({"quality", "--ref", dir / "nope.wav", "--rec", dir / "nope.wav"});
  CHECK(r.code == 1);
  const Json j = Json::parse(r.out);
  CHECK(j.contains("error"));
  CHECK(j.contains("detail"));
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("modem tx and rx") {
  TempDir dir;
  write_text_file(dir / "payload.bin", "hello, covert world");
  REQUIRE(run_cli({"tx", "--payload", dir / "payload.bin", "--out", dir / "tx.wav", "--report", dir / "tx.json"}).code == 0);
  CHECK(Json::parse(read_text_file(dir / "tx.json"))["out_of_band_ratio"].get<double>() <= 0.01);
  const Outcome rx = run_cli({"rx", "--in", dir / "tx.wav", "--out", dir / "got.bin", "--report", dir / "rx.json"});
  REQUIRE(rx.code == 0);
  CHECK(read_text_file(dir / "got.bin") == "hello, covert world");
  CHECK(Json::parse(read_text_file(dir / "rx.json"))["status"] == "ok");

  write_wav(testsig::mono(testsig::white_noise(44100 * 2, 0.01, 3), 44100), dir / "noise.wav");
  const Outcome bad = run_cli({"rx", "--in", dir / "noise.wav", "--out", dir / "x.bin"});
  CHECK(bad.code == 1);
  CHECK(Json::parse(bad.out)["error"] == "no preamble found");
  CHECK_FALSE(fs::exists(dir / "x.bin"));
}

TEST_CASE("sweep then profile recovers a flat SNR") {
  TempDir dir;
  REQUIRE(run_cli({"sweep", "--bands", "100-219", "--amplitude", "0.01",
                   "--out", dir / "sweep.wav", "--schedule-out", dir / "schedule.json"})
              .code == 0);
  ChannelModel flat = ChannelModel::identity();
  flat.noise_floor_dbfs = noise_floor_for_band_snr(0.01, 1.0, 100, 44100, 40.0);
  write_text_file(dir / "model.json", Json(flat).dump());
  REQUIRE(run_cli({"simulate", "--in", dir / "sweep.wav", "--model", dir / "model.json", "--out", dir / "rec.wav",
                   "--seed", "4"})
              .code == 0);
  const Outcome p = run_cli({"profile", "--rec", dir / "rec.wav", "--schedule", dir / "schedule.json", "--csv",
                             dir / "cap.csv"});
  REQUIRE(p.code == 0);
  const Json j = Json::parse(p.out);
  const auto& bands = j["profile"]["bands"];
  for (std::size_t b = 100; b < 220; ++b) CHECK(std::abs(bands[b]["snr_db"].get<double>() - 40.0) <= 1.0);
  CHECK(j["capacity"]["inaudible"]["exact_bps"].get<double>() > 0);
  CHECK(fs::exists(dir / "cap.csv"));
}

TEST_CASE("seeded commands are deterministic") {
  TempDir dir;
  auto ber = [&] { return run_cli({"ber", "--bits", "2000", "--seed", "11", "--band-snr-db", "10", "--frame-bytes", "64"}); };
  const Outcome a = ber(), b = ber();
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(Json::parse(a.out)["report"]["bits_sent"] == 2000);

  write_wav(testsig::mono(testsig::tone(500, 0.2, 8000, 44100), 44100), dir / "in.wav");
  write_text_file(dir / "model.json", Json(ChannelModel::headphone(2.0)).dump());
  for (const char* name : {"y1.wav", "y2.wav"})
    REQUIRE(run_cli({"simulate", "--in", dir / "in.wav", "--model", dir / "model.json", "--out", dir / name, "--seed", "9"}).code == 0);
  CHECK(read_wav(dir / "y1.wav").samples() == read_wav(dir / "y2.wav").samples());

  const Outcome e1 = run_cli({"combine-exp", "--trials", "3", "--seed", "5"});
  const Outcome e2 = run_cli({"combine-exp", "--trials", "3", "--seed", "5"});
  REQUIRE(e1.code == 0);
  CHECK(e1.out == e2.out);
}

TEST_CASE("combine writes a mono file") {
  TempDir dir;
  const Signal<double> s = testsig::speech_like(1.0, 44100, 2);
  write_wav(AudioBuffer::stereo(s, s, 44100), dir / "st.wav");
  const Outcome r = run_cli({"combine", "--in", dir / "st.wav", "--out", dir / "mono.wav"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(read_wav(dir / "mono.wav").channels() == 1);
}

TEST_CASE("hda-plan") {
  TempDir dir;
  write_text_file(dir / "map.json", R"({"pins": [
    {"label": "LINE2-L", "chip_pins": [14], "nid": 25, "role": "out", "retaskable": true, "location": "front", "color": "green"}]})");
  const Outcome r = run_cli({"hda-plan", "--map", dir / "map.json", "--pin", "LINE2-L", "--role", "in"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0x19 0x707 0x20\n") != std::string::npos);

  const Outcome shipped = run_cli({"hda-plan", "--map", JACKPROBE_DATA_DIR "/alc892_codec_map.json", "--pin", "LINE2-L"});
  CHECK(shipped.code == 1);
  CHECK(shipped.err.find("LINE2-L") != std::string::npos);
}

}
