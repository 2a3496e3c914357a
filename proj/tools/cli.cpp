#include "cli.hpp"

#include <algorithm>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jackprobe/capacity.hpp"
#include "jackprobe/channel.hpp"
#include "jackprobe/hda.hpp"
#include "jackprobe/json_io.hpp"
#include "jackprobe/modem.hpp"
#include "jackprobe/quality.hpp"
#include "jackprobe/wav.hpp"

namespace jackprobe::cli {
namespace {

/// Where JSON reports (and error documents) go: a file, or the output stream.
struct ReportChannel {
  std::string path;
  std::ostream* out = nullptr;

  void emit(const Json& j) const {
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) *out << text;
    else write_text_file(path, text);
  }
};

WavEncoding encoding_for(bool pcm16) { return pcm16 ? WavEncoding::pcm16 : WavEncoding::float32; }

std::vector<int> parse_index_list(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int a = std::stoi(item.substr(0, dash)), b = std::stoi(item.substr(dash + 1));
        for (int i = a; i <= b; ++i) out.push_back(i);
      }
    } catch (const std::logic_error&) {
      throw Error("invalid band list", spec);
    }
  }
  require(!out.empty(), "empty band list");
  return out;
}

BandSet parse_bands(const std::string& spec, const ModemConfig& config) {
  if (spec.empty() || spec == "all") return all_bands(config);
  BandSet out = parse_index_list(spec);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct BandChoice {
  std::string bands;
  std::string profile;
  double min_snr_db = 10.0;

  void add(CLI::App* app) {
    app->add_option("--bands", bands, "Band indices, e.g. 0-69 or 0,2,4 (default: all)");
    app->add_option("--profile", profile, "Band SNR profile JSON used to allocate bands")->excludes("--bands");
    app->add_option("--min-snr", min_snr_db, "Allocation threshold in dB");
  }

  BandSet resolve(const ModemConfig& config) const {
    if (!profile.empty()) return allocate_bands(load_json<BandSnrProfile>(profile), config, min_snr_db);
    return parse_bands(bands, config);
  }
};

ModemConfig load_config(const std::string& path) {
  return path.empty() ? ModemConfig{} : load_json<ModemConfig>(path);
}

/// One second of a 200 Hz to 4 kHz linear chirp.
AudioBuffer default_probe() {
  const int rate = 44100;
  const double f0 = 200.0, f1 = 4000.0;
  Signal<double> x(rate);
  for (Eigen::Index n = 0; n < rate; ++n) {
    const double t = static_cast<double>(n) / rate;
    x[n] = 0.5 * std::sin(2 * std::numbers::pi * (f0 * t + 0.5 * (f1 - f0) * t * t));
  }
  return AudioBuffer::mono(std::move(x), rate);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covert acoustic channel analysis: speech quality, capacity, channel simulation, modem and HDA retask planning."};
  app.name("jackprobe");
  app.require_subcommand(1);

  ReportChannel report{"", &out};

  // quality
  std::string ref_path, rec_path;
  QualityOptions qopts;
  auto* quality = app.add_subcommand("quality", "Objective quality measures of a recording against its reference");
  quality->add_option("--ref", ref_path, "Reference WAV")->required();
  quality->add_option("--rec", rec_path, "Recorded WAV")->required();
  quality->add_option("--out", report.path, "Report path (default: stdout)");
  quality->add_option("--max-lag-s", qopts.max_lag_seconds, "Alignment search range in seconds");
  quality->add_option("--sar-filter-len", qopts.sar_filter_len, "SAR projection filter length");

  // spectral
  std::string out_dir;
  double band_width = 100.0;
  auto* spectral = app.add_subcommand("spectral", "Band energy, histogram and spectrogram CSVs");
  spectral->add_option("--ref", ref_path, "Reference WAV (drives the VAD)")->required();
  spectral->add_option("--rec", rec_path, "Recorded WAV")->required();
  spectral->add_option("--band-width", band_width, "Band width in Hz");
  spectral->add_option("--out-dir", out_dir, "Directory for the CSV files")->required();
  spectral->add_option("--out", report.path, "Summary report path (default: stdout)");

  // profile
  std::string schedule_path, csv_path;
  ProfileOptions popts;
  double hearing_cutoff = 10000.0;
  double guard_ms = 10.0;
  auto* profile = app.add_subcommand("profile", "Per-band SNR and Shannon capacity from a tone recording");
  profile->add_option("--rec", rec_path, "Recorded tone sweep WAV")->required();
  profile->add_option("--schedule", schedule_path, "Tone schedule JSON")->required();
  profile->add_option("--band-width", popts.band_width, "Band width in Hz");
  profile->add_option("--max-freq", popts.max_freq, "Highest band edge in Hz");
  profile->add_option("--guard-ms", guard_ms, "Guard trimmed around every tone");
  profile->add_option("--hearing-cutoff", hearing_cutoff, "Lower edge of the inaudible subtotal in Hz");
  profile->add_option("--csv", csv_path, "Capacity CSV path");
  profile->add_option("--out", report.path, "Report path (default: stdout)");

  // sweep
  std::string bands_text = "0-219", schedule_out, wav_out;
  double tone_ms = 200.0, gap_ms = 100.0, amplitude = 0.1;
  int rate = 44100;
  bool pcm16 = false;
  auto* sweep = app.add_subcommand("sweep", "Generate a sequential tone sweep and its schedule");
  sweep->add_option("--bands", bands_text, "Band indices, e.g. 100-219");
  sweep->add_option("--band-width", band_width, "Band width in Hz");
  sweep->add_option("--tone-ms", tone_ms, "Tone duration");
  sweep->add_option("--gap-ms", gap_ms, "Silence between tones");
  sweep->add_option("--amplitude", amplitude, "Tone amplitude");
  sweep->add_option("--rate", rate, "Sample rate");
  sweep->add_option("--out", wav_out, "Output WAV")->required();
  sweep->add_option("--schedule-out", schedule_out, "Schedule JSON path")->required();
  sweep->add_flag("--pcm16", pcm16, "Write 16-bit PCM instead of float32");

  // simulate
  std::string in_path, model_path;
  std::optional<std::uint64_t> seed;
  auto* simulate = app.add_subcommand("simulate", "Pass a mono WAV through the channel model");
  simulate->add_option("--in", in_path, "Input WAV")->required();
  simulate->add_option("--model", model_path, "Channel model JSON")->required();
  simulate->add_option("--out", wav_out, "Output WAV")->required();
  simulate->add_option("--seed", seed, "Noise seed (overrides the model)");
  simulate->add_option("--report", report.path, "Status report path");
  simulate->add_flag("--pcm16", pcm16, "Write 16-bit PCM instead of float32");

  // combine
  auto* combine = app.add_subcommand("combine", "Align and average the two channels of a stereo WAV");
  combine->add_option("--in", in_path, "Stereo WAV")->required();
  combine->add_option("--out", wav_out, "Mono output WAV")->required();
  combine->add_option("--report", report.path, "Status report path");
  combine->add_flag("--pcm16", pcm16, "Write 16-bit PCM instead of float32");

  // combine-exp
  double rho = 0.0;
  int trials = 100;
  std::string probe_path;
  auto* combine_exp = app.add_subcommand("combine-exp", "Monte Carlo SNR gain of channel combining");
  combine_exp->add_option("--model", model_path, "Channel model JSON (default headphone model at 1 m)");
  combine_exp->add_option("--rho", rho, "Noise correlation between channels");
  combine_exp->add_option("--trials", trials, "Number of trials");
  combine_exp->add_option("--probe", probe_path, "Probe WAV (default: 1 s chirp)");
  combine_exp->add_option("--seed", seed, "Base noise seed (overrides the model)");
  combine_exp->add_option("--out", report.path, "Report path (default: stdout)");

  // tx / rx
  std::string payload_path, config_path;
  BandChoice band_choice;
  auto* tx = app.add_subcommand("tx", "Modulate a payload file into a WAV");
  tx->add_option("--payload", payload_path, "Payload file")->required();
  tx->add_option("--config", config_path, "Modem config JSON (default config if omitted)");
  tx->add_option("--out", wav_out, "Output WAV")->required();
  tx->add_option("--report", report.path, "Status report path");
  band_choice.add(tx);

  auto* rx = app.add_subcommand("rx", "Demodulate a WAV into a payload file");
  rx->add_option("--in", in_path, "Received WAV")->required();
  rx->add_option("--config", config_path, "Modem config JSON (default config if omitted)");
  rx->add_option("--out", payload_path, "Payload output file")->required();
  rx->add_option("--report", report.path, "Status report path");
  band_choice.add(rx);

  // ber
  std::uint64_t n_bits = 100000;
  std::optional<double> band_snr;
  BerOptions bopts;
  auto* ber = app.add_subcommand("ber", "Bit error rate over the channel simulator");
  ber->add_option("--config", config_path, "Modem config JSON");
  ber->add_option("--model", model_path, "Channel model JSON (default headphone model at 1 m)");
  ber->add_option("--bits", n_bits, "Payload bits to send (>= 1000)");
  ber->add_option("--seed", seed, "Seed for payloads and noise")->required();
  ber->add_option("--frame-bytes", bopts.frame_bytes, "Payload bytes per frame");
  ber->add_option("--band-snr-db", band_snr, "Set the noise floor for this per-band SNR before filtering");
  ber->add_option("--out", report.path, "Report path (default: stdout)");
  band_choice.add(ber);

  // hda-plan
  std::string map_path, pin, role = "in", format = "tool-lines";
  int codec_address = 0;
  auto* hda_plan = app.add_subcommand("hda-plan", "HD Audio verb sequence retasking a jack");
  hda_plan->add_option("--map", map_path, "Codec map JSON")->required();
  hda_plan->add_option("--pin", pin, "Jack label, e.g. LINE2-L")->required();
  hda_plan->add_option("--role", role, "in or out")->check(CLI::IsMember({"in", "out"}));
  hda_plan->add_option("--format", format, "tool-lines or json")->check(CLI::IsMember({"tool-lines", "json"}));
  hda_plan->add_option("--codec-address", codec_address, "Codec address 0-15")->check(CLI::Range(0, 15));
  hda_plan->add_option("--out", report.path, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "jackprobe: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (quality->parsed()) {
      report.emit(Json(quality_report(read_wav(ref_path), read_wav(rec_path), qopts)));
    } else if (spectral->parsed()) {
      const AudioBuffer ref_in = read_wav(ref_path);
      const AudioBuffer ref = AudioBuffer::mono(ref_in.downmix(), ref_in.sample_rate());
      const AudioBuffer rec_in = read_wav(rec_path);
      AudioBuffer rec = AudioBuffer::mono(rec_in.downmix(), rec_in.sample_rate());
      AudioBuffer ref_r = ref;
      if (ref.sample_rate() != rec.sample_rate()) {
        const int common = std::min(ref.sample_rate(), rec.sample_rate());
        ref_r = resample(ref, common);
        rec = resample(rec, common);
      }
      const long max_lag = std::min<long>(ref_r.sample_rate(), std::min(ref_r.length(), rec.length()) - 1);
      const Alignment a = align_by_cross_correlation(ref_r, rec, std::max(0L, max_lag));
      const auto [ref_t, rec_t] = trim_to_overlap(ref_r, rec, a.lag);
      const VadMask mask = detect_voice_activity(ref_t);
      const SpectralReport sr = spectral_report(rec_t, mask, band_width);
      std::filesystem::create_directories(out_dir);
      write_spectral_csv(sr, out_dir);
      report.emit(Json{{"alignment_lag_samples", a.lag},
                       {"sample_rate", rec_t.sample_rate()},
                       {"frames", sr.frame_times.size()},
                       {"active_frames", sr.active_frames},
                       {"inactive_frames", sr.inactive_frames},
                       {"bands", sr.band_centers.size()},
                       {"files", {"band_means.csv", "histograms.csv", "spectrogram.csv"}}});
    } else if (profile->parsed()) {
      popts.guard_s = guard_ms / 1000.0;
      const AudioBuffer rec_in = read_wav(rec_path);
      const AudioBuffer rec = AudioBuffer::mono(rec_in.downmix(), rec_in.sample_rate());
      const BandSnrProfile prof = profile_band_snr(rec, parse_schedule(read_json_file(schedule_path)), popts);
      const CapacityReport cap = capacity_report(prof, hearing_cutoff);
      if (!csv_path.empty()) write_text_file(csv_path, capacity_csv(cap));
      report.emit(Json{{"profile", prof}, {"capacity", cap}});
    } else if (sweep->parsed()) {
      const std::vector<int> bands = parse_index_list(bands_text);
      const ToneSweep s = make_tone_sweep(bands, band_width, tone_ms / 1000.0, gap_ms / 1000.0, amplitude, rate);
      write_wav(s.audio, wav_out, encoding_for(pcm16));
      write_text_file(schedule_out, Json{{"segments", s.schedule}}.dump(2) + "\n");
    } else if (simulate->parsed()) {
      ChannelModel model = load_json<ChannelModel>(model_path);
      if (seed) model.noise_seed = *seed;
      const AudioBuffer y = simulate_channel(read_wav(in_path), model);
      write_wav(y, wav_out, encoding_for(pcm16));
      if (!report.path.empty())
        report.emit(Json{{"model", model}, {"samples", y.length()}, {"sample_rate", y.sample_rate()}});
    } else if (combine->parsed()) {
      const CombinedChannels c = combine_channels_detailed(read_wav(in_path));
      write_wav(c.mono, wav_out, encoding_for(pcm16));
      if (!report.path.empty())
        report.emit(Json{{"lag_samples", c.lag}, {"samples", c.mono.length()}, {"sample_rate", c.mono.sample_rate()}});
    } else if (combine_exp->parsed()) {
      ChannelModel model = model_path.empty() ? ChannelModel::headphone(1.0) : load_json<ChannelModel>(model_path);
      if (seed) model.noise_seed = *seed;
      const AudioBuffer probe = probe_path.empty() ? default_probe() : read_wav(probe_path);
      const CombiningResult r = combining_gain_experiment(model, rho, probe, trials);
      report.emit(Json{{"model", model}, {"rho", rho}, {"result", r}});
    } else if (tx->parsed()) {
      const ModemConfig config = load_config(config_path);
      const BandSet bands = band_choice.resolve(config);
      const std::string data = read_text_file(payload_path);
      const std::vector<std::uint8_t> payload(data.begin(), data.end());
      const AudioBuffer audio = modulate(payload, config, bands);
      write_wav(audio, wav_out);
      if (!report.path.empty())
        report.emit(Json{{"payload_bytes", payload.size()},
                         {"bands", bands.size()},
                         {"duration_s", audio.duration_seconds()},
                         {"out_of_band_ratio", out_of_band_ratio(audio, config)}});
    } else if (rx->parsed()) {
      const ModemConfig config = load_config(config_path);
      const BandSet bands = band_choice.resolve(config);
      const AudioBuffer in = read_wav(in_path);
      const DemodResult r = demodulate(AudioBuffer::mono(in.downmix(), in.sample_rate()), config, bands);
      if (r.status == FrameStatus::ok || r.status == FrameStatus::crc_mismatch)
        write_text_file(payload_path, std::string(r.payload.begin(), r.payload.end()));
      if (!r.ok()) throw Error(to_string(r.status), r.detail);
      if (!report.path.empty()) report.emit(demod_status_json(r));
    } else if (ber->parsed()) {
      const ModemConfig config = load_config(config_path);
      ChannelModel model = model_path.empty() ? ChannelModel::headphone(1.0) : load_json<ChannelModel>(model_path);
      if (band_snr)
        model.noise_floor_dbfs = noise_floor_for_band_snr(config.amplitude_per_band, model.broadband_gain(),
                                                          config.band_width, config.sample_rate, *band_snr);
      bopts.bands = band_choice.resolve(config);
      const BerReport r = ber_test(config, model, n_bits, *seed, bopts);
      report.emit(Json{{"config", config}, {"model", model}, {"seed", *seed}, {"report", r}});
    } else if (hda_plan->parsed()) {
      const auto pins = hda::load_codec_map(map_path);
      const auto plan = hda::plan_retask(pins, pin, hda::parse_role(role), static_cast<std::uint8_t>(codec_address));
      const std::string text = hda::render_plan(plan, hda::parse_format(format));
      if (report.path.empty()) out << text;
      else write_text_file(report.path, text);
    }
    return 0;
  } catch (const Error& e) {
    err << "jackprobe: " << e.what();
    if (!e.detail().empty()) err << ": " << e.detail();
    err << "\n";
    try {
      report.emit(Json{{"error", e.what()}, {"detail", e.detail()}});
    } catch (const std::exception&) {
      ReportChannel{"", &out}.emit(Json{{"error", e.what()}, {"detail", e.detail()}});
    }
    return 1;
  } catch (const std::exception& e) {
    err << "jackprobe: " << e.what() << "\n";
    ReportChannel{"", &out}.emit(Json{{"error", "internal failure"}, {"detail", e.what()}});
    return 1;
  }
}

}  // namespace jackprobe::cli
