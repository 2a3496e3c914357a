#include "doctest.h"

#include <filesystem>

#include "jackprobe/audio.hpp"
#include "jackprobe/wav.hpp"
#include "signals.hpp"

using namespace jackprobe;

TEST_SUITE("audio") {

TEST_CASE("frame counts") {
  const auto b8 = testsig::mono(Signal<double>::Zero(8000), 8000);
  CHECK(frame_signal(b8, 20, 10).count() == 99);
  CHECK(frame_signal(b8, 20, 10).frame_len == 160);

  const auto b16 = testsig::mono(Signal<double>::Zero(16000), 16000);
  CHECK(frame_signal(b16, 25, 10).count() == (16000 - 400) / 160 + 1);
  CHECK(frame_signal(b16, 25, 10).count() == 98);

  const auto tiled = frame_signal(b8, 10, 10);
  CHECK(tiled.count() == 100);
  CHECK(tiled.hop == tiled.frame_len);

  CHECK_THROWS_AS(frame_signal(testsig::mono(Signal<double>::Zero(100), 8000), 20, 10), Error);
  CHECK_THROWS_AS(frame_signal(b8, 10, 20), Error);
}

TEST_CASE("frames are contiguous slices at i * hop") {
  Signal<double> x = Signal<double>::LinSpaced(1000, 0, 999);
  const auto f = frame_signal(testsig::mono(x, 8000), 20, 10);
  for (Eigen::Index i = 0; i < f.count(); ++i)
    CHECK(f.frame(i) == x.segment(i * f.hop, f.frame_len));
}

TEST_CASE("float scalar instantiation") {
  using BufferF = BasicAudioBuffer<float>;
  const auto buf = BufferF::mono(Signal<float>::Ones(800), 8000);
  const auto f = frame_signal(buf, 20, 10);
  CHECK(frame_powers(f).minCoeff() == doctest::Approx(1.0f));
  const auto s = power_spectrum(f.frame(0), 256, 8000);
  CHECK(s.total() > 0.0f);
}

TEST_CASE("Parseval holds for white noise frames") {
  const Signal<double> x = testsig::white_noise(4096, 0.3, 11);
  for (Eigen::Index len : {256, 400, 1000}) {
    const Signal<double> frame = x.head(len);
    const auto s = power_spectrum(frame, next_pow2(len) * 2, 16000);
    // Independent two-sided sum computed from the windowed frame directly.
    const Signal<double> w = windowed(frame);
    const double time_power = w.squaredNorm() / static_cast<double>(len);
    CHECK(std::abs(time_power - s.total()) / s.total() < 1e-6);
  }
}

TEST_CASE("all-zero frame gives an all-zero spectrum") {
  const auto s = power_spectrum(Signal<double>::Zero(128), 256, 8000);
  CHECK(s.power.isZero(0));
  CHECK(s.bins() == 129);
}

TEST_CASE("Hann mainlobe holds an exact-bin sine") {
  const int rate = 8000;
  const Eigen::Index n = 512;
  const double bin = static_cast<double>(rate) / n;
  const auto s = power_spectrum(testsig::tone(40 * bin, 1.0, n, rate), n, rate);
  CHECK(s.power.segment(39, 3).sum() / s.total() >= 0.99);

  const auto t = power_spectrum(testsig::tone(1000, 1.0, 1024, rate), 1024, rate);
  CHECK(band_power(t, 950, 1050) / t.total() >= 0.99);
}

TEST_CASE("power spectrum preconditions") {
  CHECK_THROWS_AS(power_spectrum(Signal<double>::Ones(300), 256, 8000), Error);
  CHECK_THROWS_AS(power_spectrum(Signal<double>::Ones(100), 200, 8000), Error);
}

TEST_CASE("band power") {
  const Signal<double> x = testsig::white_noise(512, 1.0, 3);
  const auto s = power_spectrum(x, 512, 8000);
  CHECK(band_power(s, 0, 4000) == doctest::Approx(s.total()).epsilon(1e-12));
  double parts = 0;
  for (int b = 0; b < 40; ++b) parts += band_power(s, b * 100.0, (b + 1) * 100.0);
  CHECK(parts == doctest::Approx(s.total()).epsilon(1e-12));

  const auto t = power_spectrum(testsig::tone(1000, 1.0, 512, 8000), 512, 8000);
  CHECK(band_power(t, 900, 1100) / t.total() > 0.99);
  CHECK_THROWS_AS(band_power(s, 100, 50), Error);
  CHECK_THROWS_AS(band_power(s, 0, 5000), Error);
}

TEST_CASE("resampling keeps a tone's frequency") {
  const auto in = testsig::mono(testsig::tone(440, 0.5, 44100, 44100), 44100);
  const AudioBuffer out = resample(in, 8000);
  CHECK(out.sample_rate() == 8000);
  CHECK(out.length() == 8000);
  const Signal<double> seg = out.channel(0).segment(1000, 4096);
  const auto s = power_spectrum(seg, 8192, 8000);
  Eigen::Index peak;
  s.power.maxCoeff(&peak);
  CHECK(std::abs(s.bin_center(peak) - 440.0) <= 2.0);

  const Signal<double> mid = out.channel(0).segment(500, 7000);
  CHECK(std::sqrt(mid.squaredNorm() / 7000.0) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(0.01));
  CHECK(resample(in, 44100).samples() == in.samples());
}

TEST_CASE("resampling round trip keeps a band-limited signal") {
  const int rate = 44100;
  Signal<double> x = Signal<double>::Zero(rate);
  for (double f : {210.0, 770.0, 1330.0, 2020.0, 2890.0}) x += testsig::tone(f, 0.1, rate, rate, f / 1000.0);
  const AudioBuffer back = resample(resample(testsig::mono(x, rate), 8000), rate);
  REQUIRE(back.length() == x.size());
  const Signal<double> a = x.segment(2000, rate - 4000), b = back.channel(0).segment(2000, rate - 4000);
  CHECK(a.dot(b) / (a.norm() * b.norm()) >= 0.99);
}

TEST_CASE("cross correlation and convolution") {
  Signal<double> a(4), b(4);
  a << 1, 2, 3, 4;
  b << 0, 1, 2, 3;
  const Signal<double> c = cross_correlation(a, b, 2);
  // c[m] = sum a[n] b[n + m]
  CHECK(c[2] == doctest::Approx(2 + 6 + 12));
  CHECK(c[3] == doctest::Approx(1 * 1 + 2 * 2 + 3 * 3));
  CHECK(c[1] == doctest::Approx(2 * 0 + 3 * 1 + 4 * 2));
  const Signal<double> v = convolve(a, b);
  CHECK(v.size() == 7);
  CHECK(v[3] == doctest::Approx(1 * 3 + 2 * 2 + 3 * 1 + 4 * 0));
}

TEST_CASE("percentile") {
  CHECK(percentile({1, 2, 3, 4, 5}, 50) == doctest::Approx(3));
  CHECK(percentile({1, 2, 3, 4, 5}, 10) == doctest::Approx(1.4));
  CHECK(percentile({-INFINITY, -INFINITY, 1}, 10) == -INFINITY);
}

TEST_CASE("WAV round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "jackprobe_wav_test";
  std::filesystem::create_directories(dir);
  const Signal<double> l = testsig::tone(300, 0.5, 1000, 8000), r = testsig::white_noise(1000, 0.1, 5);
  const AudioBuffer st = AudioBuffer::stereo(l, r, 8000);

  write_wav(st, dir / "f.wav", WavEncoding::float32);
  const AudioBuffer f = read_wav(dir / "f.wav");
  CHECK(f.channels() == 2);
  CHECK(f.sample_rate() == 8000);
  CHECK((f.samples() - st.samples()).cwiseAbs().maxCoeff() < 1e-7);

  write_wav(st, dir / "p.wav", WavEncoding::pcm16);
  const AudioBuffer p = read_wav(dir / "p.wav");
  CHECK((p.samples() - st.samples()).cwiseAbs().maxCoeff() <= 1.0 / 32768.0);

  const auto bytes = encode_wav(testsig::mono(Signal<double>::Constant(4, 2.0), 8000), WavEncoding::pcm16);
  CHECK(bytes.size() == 44 + 8);
  CHECK(decode_wav(bytes).samples().maxCoeff() == doctest::Approx(32767.0 / 32768.0));

  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const AudioBuffer b = testsig::mono(testsig::white_noise(64 + i % 50, 0.3, 1000 + i), 8000 + i);
    REQUIRE(decode_wav(encode_wav(b, WavEncoding::float32)).samples() == b.samples().cast<float>().cast<double>());
  }
  CHECK_THROWS_AS(write_wav(st, dir / "no_such_dir" / "x.wav", WavEncoding::float32), Error);
  CHECK_FALSE(std::filesystem::exists(dir / "no_such_dir" / "x.wav"));

  std::vector<std::uint8_t> junk(bytes.begin(), bytes.begin() + 20);
  CHECK_THROWS_AS(decode_wav(junk), Error);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("buffer invariants") {
  CHECK_THROWS_AS(AudioBuffer(AudioBuffer::Samples::Zero(10, 3), 8000), Error);
  CHECK_THROWS_AS(AudioBuffer::mono(Signal<double>::Zero(10), 0), Error);
  const AudioBuffer st = AudioBuffer::stereo(Signal<double>::Ones(4), Signal<double>::Zero(4), 8000);
  CHECK(st.downmix().isApproxToConstant(0.5));
  CHECK_THROWS_AS(require_mono(st, "test"), Error);
}

}
