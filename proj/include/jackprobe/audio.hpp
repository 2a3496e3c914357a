#pragma once

// Audio buffers, framing and spectral primitives shared by every module.
//
// Dense types are templated on the sample scalar; the rest of the library
// works on the `AudioBuffer` (double) instantiation.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "jackprobe/error.hpp"

namespace jackprobe {

template <typename Scalar>
using Signal = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Sampled audio with one or two channels stored column-wise.
template <typename Scalar>
class BasicAudioBuffer {
 public:
  using Samples = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BasicAudioBuffer(Samples samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    require(sample_rate_ > 0, "invalid sample rate", std::to_string(sample_rate_));
    require(samples_.cols() == 1 || samples_.cols() == 2, "unsupported channel count",
            std::to_string(samples_.cols()));
  }

  static BasicAudioBuffer mono(Signal<Scalar> signal, int sample_rate) {
    return BasicAudioBuffer(Samples(std::move(signal)), sample_rate);
  }

  static BasicAudioBuffer stereo(const Signal<Scalar>& left, const Signal<Scalar>& right,
                                 int sample_rate) {
    require(left.size() == right.size(), "channel length mismatch");
    Samples s(left.size(), 2);
    s.col(0) = left;
    s.col(1) = right;
    return BasicAudioBuffer(std::move(s), sample_rate);
  }

  Eigen::Index length() const { return samples_.rows(); }
  int channels() const { return static_cast<int>(samples_.cols()); }
  int sample_rate() const { return sample_rate_; }
  double duration_seconds() const { return static_cast<double>(length()) / sample_rate_; }
  bool empty() const { return samples_.rows() == 0; }

  const Samples& samples() const { return samples_; }
  auto channel(int c) const { return samples_.col(c); }

  /// Channel average; the identity for mono buffers.
  Signal<Scalar> downmix() const {
    if (channels() == 1) return samples_.col(0);
    return (samples_.col(0) + samples_.col(1)) * Scalar(0.5);
  }

  template <typename Other>
  BasicAudioBuffer<Other> cast() const {
    return BasicAudioBuffer<Other>(samples_.template cast<Other>(), sample_rate_);
  }

 private:
  Samples samples_;
  int sample_rate_;
};

using AudioBuffer = BasicAudioBuffer<double>;

template <typename Scalar>
const auto& require_mono(const BasicAudioBuffer<Scalar>& buffer, const char* operation) {
  require(buffer.channels() == 1, "mono input required", operation);
  return buffer.samples();
}

inline Eigen::Index samples_for_ms(double ms, int sample_rate) {
  return static_cast<Eigen::Index>(std::lround(ms * sample_rate / 1000.0));
}

inline Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline bool is_pow2(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// ---------------------------------------------------------------------------
// Framing

/// Overlapping windows over a mono signal; column i starts at sample i * hop.
template <typename Scalar>
struct FrameSequence {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> frames;  // frame_len x count
  Eigen::Index frame_len = 0;
  Eigen::Index hop = 0;
  int origin_rate = 0;

  Eigen::Index count() const { return frames.cols(); }
  auto frame(Eigen::Index i) const { return frames.col(i); }
};

inline Eigen::Index frame_count(Eigen::Index n, Eigen::Index frame_len, Eigen::Index hop) {
  if (n < frame_len) return 0;
  return (n - frame_len) / hop + 1;
}

template <typename Derived>
FrameSequence<typename Derived::Scalar> frame_samples(const Eigen::MatrixBase<Derived>& x,
                                                      Eigen::Index frame_len, Eigen::Index hop,
                                                      int rate) {
  require(hop >= 1 && frame_len >= hop, "invalid framing",
          "frame_len=" + std::to_string(frame_len) + " hop=" + std::to_string(hop));
  const Eigen::Index n = frame_count(x.size(), frame_len, hop);
  require(n >= 1, "signal shorter than one frame");
  FrameSequence<typename Derived::Scalar> out;
  out.frames.resize(frame_len, n);
  for (Eigen::Index i = 0; i < n; ++i) out.frames.col(i) = x.segment(i * hop, frame_len);
  out.frame_len = frame_len;
  out.hop = hop;
  out.origin_rate = rate;
  return out;
}

/// Cuts a mono buffer into frames; trailing partial samples are dropped.
template <typename Scalar>
FrameSequence<Scalar> frame_signal(const BasicAudioBuffer<Scalar>& buffer, double frame_ms,
                                   double hop_ms) {
  const auto& s = require_mono(buffer, "frame_signal");
  require(hop_ms > 0 && frame_ms >= hop_ms, "invalid framing durations");
  return frame_samples(s.col(0), samples_for_ms(frame_ms, buffer.sample_rate()),
                       samples_for_ms(hop_ms, buffer.sample_rate()), buffer.sample_rate());
}

/// Mean-square power of every frame.
template <typename Scalar>
Signal<Scalar> frame_powers(const FrameSequence<Scalar>& frames) {
  return frames.frames.colwise().squaredNorm().transpose() / Scalar(frames.frame_len);
}

// ---------------------------------------------------------------------------
// Spectra

/// One-sided periodogram. power(k) is the share of the windowed frame's mean
/// power at bin k, so the bins sum to (1/L) * sum (w[n] x[n])^2.
template <typename Scalar>
struct SpectralFrame {
  Signal<Scalar> power;
  double bin_width = 0;
  Eigen::Index fft_len = 0;
  std::string window = "hann";

  Eigen::Index bins() const { return power.size(); }
  double bin_center(Eigen::Index k) const { return static_cast<double>(k) * bin_width; }
  double nyquist() const { return bin_width * static_cast<double>(fft_len) / 2.0; }
  Scalar total() const { return power.sum(); }
};

/// Periodic Hann taper of length n.
template <typename Scalar>
Signal<Scalar> hann_window(Eigen::Index n) {
  Signal<Scalar> w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w[i] = Scalar(0.5) - Scalar(0.5) * std::cos(Scalar(2) * std::numbers::pi_v<Scalar> *
                                                Scalar(i) / Scalar(n));
  return w;
}

template <typename Derived>
Signal<typename Derived::Scalar> windowed(const Eigen::MatrixBase<Derived>& frame) {
  using Scalar = typename Derived::Scalar;
  return frame.cwiseProduct(hann_window<Scalar>(frame.size()));
}

template <typename Derived>
SpectralFrame<typename Derived::Scalar> power_spectrum(const Eigen::MatrixBase<Derived>& frame,
                                                       Eigen::Index fft_len, double sample_rate) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index len = frame.size();
  require(len >= 1, "empty frame");
  require(is_pow2(fft_len) && fft_len >= len, "fft length must be a power of two >= frame length",
          std::to_string(fft_len));

  std::vector<Scalar> padded(static_cast<std::size_t>(fft_len), Scalar(0));
  const Signal<Scalar> w = windowed(frame);
  for (Eigen::Index i = 0; i < len; ++i) padded[static_cast<std::size_t>(i)] = w[i];

  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
  std::vector<std::complex<Scalar>> spec;
  fft.fwd(spec, padded);

  const Eigen::Index bins = fft_len / 2 + 1;
  SpectralFrame<Scalar> out;
  out.power.resize(bins);
  const Scalar norm = Scalar(1) / (Scalar(fft_len) * Scalar(len));
  for (Eigen::Index k = 0; k < bins; ++k) {
    const Scalar edge = (k == 0 || k == fft_len / 2) ? Scalar(1) : Scalar(2);
    out.power[k] = edge * std::norm(spec[static_cast<std::size_t>(k)]) * norm;
  }
  out.bin_width = sample_rate / static_cast<double>(fft_len);
  out.fft_len = fft_len;
  return out;
}

/// Sum of bins whose center lies in [f_lo, f_hi). The Nyquist bin belongs to
/// the band that reaches Nyquist, so a partition of [0, Nyquist] covers every bin.
template <typename Scalar>
Scalar band_power(const SpectralFrame<Scalar>& spectrum, double f_lo, double f_hi) {
  const double nyq = spectrum.nyquist();
  const double tol = 1e-9 * nyq;
  require(f_lo >= 0 && f_lo < f_hi && f_hi <= nyq + tol, "invalid band",
          std::to_string(f_lo) + ".." + std::to_string(f_hi));
  const bool to_nyquist = f_hi >= nyq - tol;
  Scalar sum(0);
  Eigen::Index used = 0;
  for (Eigen::Index k = 0; k < spectrum.bins(); ++k) {
    const double f = spectrum.bin_center(k);
    if (f >= f_lo && (f < f_hi || (to_nyquist && k == spectrum.bins() - 1))) {
      sum += spectrum.power[k];
      ++used;
    }
  }
  require(used > 0, "empty band", std::to_string(f_lo) + ".." + std::to_string(f_hi));
  return sum;
}

// ---------------------------------------------------------------------------
// Correlation

/// c[max_lag + m] = sum_n a[n] * b[n + m] for m in [-max_lag, max_lag].
template <typename DerivedA, typename DerivedB>
Signal<typename DerivedA::Scalar> cross_correlation(const Eigen::MatrixBase<DerivedA>& a,
                                                    const Eigen::MatrixBase<DerivedB>& b,
                                                    Eigen::Index max_lag) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index nfft = next_pow2(a.size() + b.size());
  std::vector<Scalar> pa(static_cast<std::size_t>(nfft), Scalar(0));
  std::vector<Scalar> pb(static_cast<std::size_t>(nfft), Scalar(0));
  for (Eigen::Index i = 0; i < a.size(); ++i) pa[static_cast<std::size_t>(i)] = a[i];
  for (Eigen::Index i = 0; i < b.size(); ++i) pb[static_cast<std::size_t>(i)] = b[i];

  Eigen::FFT<Scalar> fft;
  std::vector<std::complex<Scalar>> fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] = std::conj(fa[k]) * fb[k];
  std::vector<std::complex<Scalar>> c;
  fft.inv(c, fa);

  Signal<Scalar> out(2 * max_lag + 1);
  for (Eigen::Index m = -max_lag; m <= max_lag; ++m) {
    const Eigen::Index idx = m >= 0 ? m : nfft + m;
    out[max_lag + m] = c[static_cast<std::size_t>(idx)].real();
  }
  return out;
}

/// Linear convolution (full length a + b - 1).
template <typename DerivedA, typename DerivedB>
Signal<typename DerivedA::Scalar> convolve(const Eigen::MatrixBase<DerivedA>& a,
                                           const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index out_len = a.size() + b.size() - 1;
  const Eigen::Index nfft = next_pow2(out_len);
  std::vector<Scalar> pa(static_cast<std::size_t>(nfft), Scalar(0));
  std::vector<Scalar> pb(static_cast<std::size_t>(nfft), Scalar(0));
  for (Eigen::Index i = 0; i < a.size(); ++i) pa[static_cast<std::size_t>(i)] = a[i];
  for (Eigen::Index i = 0; i < b.size(); ++i) pb[static_cast<std::size_t>(i)] = b[i];
  Eigen::FFT<Scalar> fft;
  std::vector<std::complex<Scalar>> fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<Scalar> c;
  fft.inv(c, fa);
  Signal<Scalar> out(out_len);
  for (Eigen::Index i = 0; i < out_len; ++i) out[i] = c[static_cast<std::size_t>(i)];
  return out;
}

// ---------------------------------------------------------------------------
// Level helpers

inline double to_db(double power_ratio) { return 10.0 * std::log10(power_ratio); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// Linear-interpolated percentile (p in [0, 100]) of an unsorted sample.
double percentile(std::vector<double> values, double p);

// ---------------------------------------------------------------------------
// Resampling

/// Kaiser-windowed sinc interpolation to `target_rate`. Output length is
/// round(N * target / source); equal rates return the input unchanged.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

}  // namespace jackprobe
