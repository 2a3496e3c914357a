// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "jackprobe/capacity.hpp"
#include "jackprobe/channel.hpp"
#include "jackprobe/hda.hpp"
#include "jackprobe/modem.hpp"
#include "jackprobe/quality.hpp"
#include "signals.hpp"

using namespace jackprobe;

namespace {

struct Verdict {
  bool pass = true;
  std::string summary;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict shannon_approximation() {
  double worst = 0;
  for (double snr : {10.0, 20.0, 30.0, 40.0, 50.0, 60.0}) {
    const double exact = shannon_capacity(100.0, from_db(snr));
    const double approx = capacity_approx(100.0, snr).bits_per_second;
    worst = std::max(worst, std::abs(approx - exact) / exact);
  }
  return {worst <= 0.05, fmt("max relative error %.2f%% (limit 5%%)", 100 * worst)};
}

Verdict combining_gain() {
  const int rate = 44100;
  const AudioBuffer probe = testsig::mono(testsig::speech_like(1.0, rate, 2024), rate);
  ChannelModel m = ChannelModel::headphone(1.0);
  m.noise_seed = 7;
  const CombiningResult r0 = combining_gain_experiment(m, 0.0, probe, 100);
  const CombiningResult r1 = combining_gain_experiment(m, 1.0, probe, 100);
  const CombiningResult r97 = combining_gain_experiment(m, 0.97, probe, 100);
  const bool pass = r0.gain_db >= 2.5 && r0.gain_db <= 3.5 && r1.gain_db == 0.0 && r97.gain_db <= 0.3;
  return {pass, fmt("gain rho=0: %.3f dB, rho=1: %.3g dB, rho=0.97: %.3f dB", r0.gain_db, r1.gain_db, r97.gain_db)};
}

Verdict capacity_claim() {
  const int rate = 44100;
  const double amplitude = 0.01, snr = 25.0;
  ChannelModel flat;
  flat.corner_hz = std::numeric_limits<double>::infinity();
  flat.noise_floor_dbfs = noise_floor_for_band_snr(amplitude, flat.broadband_gain(), 100.0, rate, snr);
  flat.noise_seed = 25;

  std::vector<int> bands;
  for (int b = 100; b < 220; ++b) bands.push_back(b);
  const ToneSweep sweep = make_tone_sweep(bands, 100.0, 0.2, 0.1, amplitude, rate);
  const BandSnrProfile profile = profile_band_snr(simulate_channel(sweep.audio, flat), sweep.schedule);
  const CapacityReport cap = capacity_report(profile, 10000.0);

  const ModemConfig config;
  const BerReport ber = ber_test(config, flat, 100000, 1);
  const bool pass = cap.inaudible.exact_bps >= 10000.0 && ber.effective_throughput >= 1000.0 && ber.ber < 1e-3 &&
                    ber.bits_sent >= 100000;
  return {pass, fmt("inaudible capacity %.0f bps; modem %.0f bps at BER %.2e over %llu bits (%llu/%llu frames)",
                    cap.inaudible.exact_bps, ber.effective_throughput, ber.ber,
                    static_cast<unsigned long long>(ber.bits_sent),
                    static_cast<unsigned long long>(ber.frames_recovered),
                    static_cast<unsigned long long>(ber.frames_sent))};
}

Verdict quality_oracles() {
  bool pass = true;
  std::string notes;

  // snr_vad on alternating 1 s blocks of a 1 kHz tone at two levels.
  double worst_vad = 0;
  for (double ratio : {0.0, 10.0, 20.0, 30.0}) {
    const int rate = 8000;
    Signal<double> x(4 * rate);
    VadMask mask;
    mask.frame_len = mask.hop = 160;
    mask.source_rate = rate;
    for (int b = 0; b < 4; ++b) {
      const bool active = b % 2 == 1;
      const double power = 1e-4 * (active ? from_db(ratio) : 1.0);
      x.segment(b * rate, rate) = testsig::tone(1000, std::sqrt(2 * power), rate, rate);
      mask.labels.insert(mask.labels.end(), rate / 160, active);
    }
    worst_vad = std::max(worst_vad, std::abs(snr_vad(testsig::mono(x, rate), mask) - ratio));
  }
  pass &= worst_vad <= 0.5;
  notes += fmt("snr_vad max err %.2g dB", worst_vad);

  const Eigen::Index n = 16000 * 5;
  const Signal<double> speech = testsig::gamma_speech(n, 31), noise = testsig::white_noise(n, 1.0, 32);
  const double wada10 = wada_snr(testsig::mono(testsig::mix_at_snr(speech, noise, 10.0), 16000));
  const double wada_noise = wada_snr(testsig::mono(noise, 16000));
  pass &= std::abs(wada10 - 10.0) <= 2.0 && wada_noise == -20.0;
  notes += fmt("; wada 10 dB mix -> %.2f, noise -> %.1f", wada10, wada_noise);

  const Signal<double> ref = testsig::white_noise(16000, 0.3, 33), artifact = testsig::white_noise(16000, 1.0, 34);
  double worst_sar = 0;
  for (double r : {0.0, 10.0, 20.0}) {
    const Signal<double> rec = testsig::mix_at_snr(ref, artifact, r);
    const double oracle = to_db(ref.squaredNorm() / (rec - ref).squaredNorm());
    worst_sar = std::max(worst_sar, std::abs(sar(testsig::mono(ref, 8000), testsig::mono(rec, 8000), 64) - oracle));
  }
  const double same = sar(testsig::mono(ref, 8000), testsig::mono(ref, 8000));
  pass &= worst_sar <= 0.5 && same == 100.0;
  notes += fmt("; sar max err %.3f dB, identical -> %.0f", worst_sar, same);
  return {pass, notes};
}

Verdict distance_ordering() {
  const AudioBuffer ref = testsig::mono(testsig::speech_like(4.0, 16000, 55), 16000);
  const AudioBuffer ref44 = resample(ref, 44100);
  bool pass = true;
  std::string notes;
  double prev_sar = INFINITY, prev_vad = INFINITY;
  for (double d : {1.0, 3.0, 5.0, 9.0}) {
    ChannelModel hp = ChannelModel::headphone(d), mic = ChannelModel::microphone(d);
    hp.noise_seed = mic.noise_seed = 500 + static_cast<std::uint64_t>(d);
    const QualityReport h = quality_report(ref, simulate_channel(ref44, hp));
    const QualityReport m = quality_report(ref, simulate_channel(ref44, mic));
    pass &= h.sar_db <= prev_sar + 0.5 && h.snr_vad_db <= prev_vad + 0.5 && m.sar_db > h.sar_db;
    prev_sar = h.sar_db;
    prev_vad = h.snr_vad_db;
    notes += fmt("%s%gm sar %.1f/%.1f vad %.1f", notes.empty() ? "" : "; ", d, h.sar_db, m.sar_db, h.snr_vad_db);
  }
  return {pass, notes + " (headphone/microphone)"};
}

Verdict hda_bijection() {
  using namespace hda;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> cad(0, 15), nid(0, 255), short_verb(0, 0xFFF), byte(0, 255), word(0, 0xFFFF);
  const std::uint16_t long_verbs[] = {0x2, 0x3, 0x4, 0x5, 0xA, 0xB, 0xC, 0xD};
  long mismatches = 0;
  for (int i = 0; i < 1000000; ++i) {
    HdaCommand c;
    c.codec_address = static_cast<std::uint8_t>(cad(rng));
    c.nid = static_cast<std::uint8_t>(nid(rng));
    if (i % 4 == 0) {
      c.verb_id = long_verbs[static_cast<std::size_t>(byte(rng)) % 8];
      c.payload = static_cast<std::uint16_t>(word(rng));
    } else {
      do c.verb_id = static_cast<std::uint16_t>(short_verb(rng));
      while (is_long_verb(static_cast<std::uint16_t>(c.verb_id >> 8)));
      c.payload = static_cast<std::uint16_t>(byte(rng));
    }
    if (!(decode_verb(encode_verb(c)).command == c)) ++mismatches;
  }
  const bool examples = decode_verb(0x01970720u).command == HdaCommand{0, 0x19, 0x707, 0x20} &&
                        decode_verb(0x018F0700u).command == HdaCommand{0, 0x18, 0xF07, 0x00} &&
                        encode_verb(0, 0x19, 0x707, 0x20) == 0x01970720u &&
                        encode_verb(0, 0x18, 0xF07, 0x00) == 0x018F0700u;

  std::vector<PinDescriptor> pins;
  for (int i = 0; i < 16; ++i)
    pins.push_back({"PIN" + std::to_string(i), {i}, static_cast<std::uint8_t>(0x14 + i), PinRole::out, true, "rear", "green"});
  int plans = 0, ordered = 0;
  for (const auto& p : pins)
    for (std::uint8_t a = 0; a < 16; ++a) {
      const RetaskPlan plan = plan_retask(pins, p.label, PinRole::in, a);
      ++plans;
      std::ptrdiff_t mute = -1, write = -1, writes = 0;
      for (std::size_t s = 0; s < plan.steps.size(); ++s) {
        const HdaCommand& c = plan.steps[s].command;
        if (c.verb_id == verbs::kSetAmpGainMute && (c.payload & verbs::kAmpMute) && (c.payload & verbs::kAmpSetOutput) && mute < 0)
          mute = static_cast<std::ptrdiff_t>(s);
        if (c.verb_id == verbs::kSetPinWidgetControl) {
          write = static_cast<std::ptrdiff_t>(s);
          ++writes;
          if (c.payload != verbs::kPinInEnable) writes = 99;
        }
      }
      if (mute >= 0 && write > mute && writes == 1) ++ordered;
    }
  return {mismatches == 0 && examples && ordered == plans,
          fmt("%ld round-trip mismatches in 1e6; worked words %s; %d/%d out->in plans mute first", mismatches,
              examples ? "ok" : "WRONG", ordered, plans)};
}

Verdict modem_round_trip() {
  const ModemConfig config;
  const BandSet bands = all_bands(config);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(0, 1024);
  std::uniform_int_distribution<int> byte(0, 255);
  int recovered = 0, crc_rejections = 0, flips = 0;
  double worst_oob = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint8_t> p(t == 0 ? 0 : t == 1 ? 1024 : len(rng));
    for (auto& b : p) b = static_cast<std::uint8_t>(byte(rng));
    const AudioBuffer tx = modulate(p, config, bands);
    worst_oob = std::max(worst_oob, out_of_band_ratio(tx, config));
    const DemodResult r = demodulate(tx, config, bands);
    if (r.ok() && r.payload == p) ++recovered;

    // Every body bit is covered by the length check or the CRC.
    Bits body = frame_body_bits(p);
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, body.size() - 1)(rng);
    body[i] ^= 1;
    ++flips;
    if (parse_frame_body(body).status != FrameStatus::ok) ++crc_rejections;
  }
  return {recovered == trials && crc_rejections == flips && worst_oob <= 0.01,
          fmt("%d/%d payloads recovered; %d/%d bit flips rejected; max out-of-band ratio %.2e", recovered, trials,
              crc_rejections, flips, worst_oob)};
}

Verdict alignment() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> seconds(0.5, 2.0);
  int exact = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const int rate = 8000;
    const Signal<double> s = t % 2 == 0 ? testsig::speech_like(seconds(rng), rate, 9000 + t, 0.1)
                                        : testsig::white_noise(static_cast<Eigen::Index>(seconds(rng) * rate), 0.2, 9000 + t);
    const Eigen::Index n = s.size();
    const long shift = std::uniform_int_distribution<long>(-n / 4, n / 4)(rng);
    Signal<double> rec = Signal<double>::Zero(n);
    if (shift >= 0) rec.tail(n - shift) = s.head(n - shift);
    else rec.head(n + shift) = s.tail(n + shift);
    rec = testsig::mix_at_snr(rec, testsig::white_noise(n, 1.0, 20000 + t), 20.0);
    const Alignment a = align_by_cross_correlation(testsig::mono(s, rate), testsig::mono(rec, rate), n / 4);
    if (a.lag == shift) ++exact;
  }
  return {exact == trials, fmt("%d/%d lags recovered exactly", exact, trials)};
}

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "shannon approximation", 1, shannon_approximation},
      {2, "channel combining gain", 30, combining_gain},
      {3, "inaudible capacity and modem throughput", 120, capacity_claim},
      {4, "quality metric oracles", 30, quality_oracles},
      {5, "quality ordering by distance", 60, distance_ordering},
      {6, "hda verb bijection and plan safety", 10, hda_bijection},
      {7, "modem round trip", 120, modem_round_trip},
      {8, "alignment", 30, alignment},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.budget_s;
    const bool pass = v.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.2f s of %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, v.summary.c_str(),
                elapsed, c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
