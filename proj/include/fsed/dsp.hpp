// Copyright 2026 The fsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Time-frequency frontends: STFT magnitude, mel filterbank, log compression,
// per-channel energy normalization (PCEN), linear resampling. Everything is a
// deterministic pure function of its inputs; dense types are templated on the
// scalar with double-precision aliases used across the pipeline.

#ifndef FSED_DSP_HPP_
#define FSED_DSP_HPP_

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "fsed/error.hpp"

namespace fsed {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;

template <typename Scalar>
struct BasicWaveform {
  ArrayX<Scalar> samples;  // amplitudes in [-1, 1]
  int sample_rate = 0;     // Hz

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};
using Waveform = BasicWaveform<double>;

// Time-frequency magnitude matrix, one row per frame. Frame t nominally sits
// at time t0_s + t * hop_s (the centre of the first analysis window plus t
// hops); all event/frame conversions in the toolkit go through this mapping.
template <typename Scalar>
struct BasicSpectrogram {
  MatrixX<Scalar> values;   // n_frames x n_bins, all >= 0
  double hop_s = 0.0;       // seconds per frame step
  double t0_s = 0.0;        // time of the first frame centre
  VectorX<Scalar> bin_axis; // per-bin centre frequency in Hz (or mel centres)

  Index n_frames() const { return values.rows(); }
  Index n_bins() const { return values.cols(); }
  double time_of_frame(Index t) const { return t0_s + t * hop_s; }
  Index frame_of_time(double x_s) const {
    return static_cast<Index>(std::llround((x_s - t0_s) / hop_s));
  }
};
using Spectrogram = BasicSpectrogram<double>;

// Floor/ceil frame indices for an instant, guarded against the 1-ulp noise of
// reconstructing t0 + t*hop. Results may be out of range; callers clamp.
inline Index frame_floor(double x_s, double t0_s, double hop_s) {
  return static_cast<Index>(std::floor((x_s - t0_s) / hop_s + 1e-9));
}
inline Index frame_ceil(double x_s, double t0_s, double hop_s) {
  return static_cast<Index>(std::ceil((x_s - t0_s) / hop_s - 1e-9));
}

struct PcenParams {
  double smoothing = 0.025;  // IIR smoother coefficient, in (0, 1]
  double gain = 0.98;        // AGC strength, in [0, 1]
  double bias = 2.0;         // >= 0
  double exponent = 0.5;     // root compression, in (0, 1]
  double eps = 1e-6;         // smoother floor, > 0
};

inline void validate(const PcenParams& p) {
  if (!(p.smoothing > 0.0 && p.smoothing <= 1.0)) throw Error("pcen smoothing must be in (0, 1]");
  if (!(p.gain >= 0.0 && p.gain <= 1.0)) throw Error("pcen gain must be in [0, 1]");
  if (!(p.bias >= 0.0)) throw Error("pcen bias must be >= 0");
  if (!(p.exponent > 0.0 && p.exponent <= 1.0)) throw Error("pcen exponent must be in (0, 1]");
  if (!(p.eps > 0.0)) throw Error("pcen eps must be > 0");
}

// HTK-style mel scale.
inline double hz_to_mel(double f_hz) { return 2595.0 * std::log10(1.0 + f_hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Periodic Hann window.
template <typename Scalar>
ArrayX<Scalar> hann_window(Index n) {
  ArrayX<Scalar> w(n);
  for (Index i = 0; i < n; ++i) {
    w[i] = static_cast<Scalar>(0.5 - 0.5 * std::cos(2.0 * M_PI * i / n));
  }
  return w;
}

// Magnitude STFT with a periodic Hann window. Frame t covers samples
// [t*hop, t*hop + win); n_bins = win/2 + 1.
template <typename Scalar>
BasicSpectrogram<Scalar> stft_magnitude(const BasicWaveform<Scalar>& w,
                                        int win_samples, int hop_samples) {
  if (w.samples.size() == 0 || w.sample_rate <= 0) throw Error("empty waveform");
  if (win_samples <= 0 || hop_samples <= 0) throw Error("window and hop must be positive");
  if (static_cast<Index>(win_samples) > w.samples.size()) {
    throw Error("window longer than signal");
  }
  const Index n_frames = (w.samples.size() - win_samples) / hop_samples + 1;
  const Index n_bins = win_samples / 2 + 1;

  BasicSpectrogram<Scalar> out;
  out.values.resize(n_frames, n_bins);
  out.hop_s = static_cast<double>(hop_samples) / w.sample_rate;
  out.t0_s = 0.5 * win_samples / w.sample_rate;
  out.bin_axis.resize(n_bins);
  for (Index k = 0; k < n_bins; ++k) {
    out.bin_axis[k] = static_cast<Scalar>(static_cast<double>(k) * w.sample_rate / win_samples);
  }

  const ArrayX<Scalar> window = hann_window<Scalar>(win_samples);
  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
  std::vector<Scalar> frame(win_samples);
  std::vector<std::complex<Scalar>> spectrum;
  for (Index t = 0; t < n_frames; ++t) {
    const Index start = t * hop_samples;
    for (Index i = 0; i < win_samples; ++i) {
      frame[i] = w.samples[start + i] * window[i];
    }
    fft.fwd(spectrum, frame);
    for (Index k = 0; k < n_bins; ++k) {
      out.values(t, k) = std::abs(spectrum[k]);
    }
  }
  return out;
}

// Mel centre frequencies in Hz: n_mels points equally spaced on the mel scale
// strictly between f_min and f_max.
inline Eigen::VectorXd mel_center_frequencies(int n_mels, double f_min, double f_max) {
  Eigen::VectorXd centers(n_mels);
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  for (int m = 0; m < n_mels; ++m) {
    centers[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * (m + 1) / (n_mels + 1));
  }
  return centers;
}

// Triangular mel filterbank [n_mels x n_fft_bins] with area normalization
// (each triangle scaled by 2 / bandwidth). Throws on an invalid frequency
// range or when the FFT grid is too coarse to give every filter weight.
template <typename Scalar>
MatrixX<Scalar> mel_filterbank(int n_mels, double sample_rate, int n_fft_bins,
                               double f_min, double f_max) {
  if (n_mels < 1) throw Error("n_mels must be >= 1");
  if (n_fft_bins < 2) throw Error("n_fft_bins must be >= 2");
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0)) {
    throw Error("invalid frequency range");
  }
  const int win = 2 * (n_fft_bins - 1);
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edge_hz(n_mels + 2);
  for (int m = 0; m < n_mels + 2; ++m) {
    edge_hz[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1));
  }

  MatrixX<Scalar> fb = MatrixX<Scalar>::Zero(n_mels, n_fft_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double f0 = edge_hz[m], f1 = edge_hz[m + 1], f2 = edge_hz[m + 2];
    const double norm = 2.0 / (f2 - f0);
    double row_sum = 0.0;
    for (int k = 0; k < n_fft_bins; ++k) {
      const double fk = static_cast<double>(k) * sample_rate / win;
      double weight = 0.0;
      if (fk > f0 && fk < f1) {
        weight = (fk - f0) / (f1 - f0);
      } else if (fk >= f1 && fk < f2) {
        weight = (f2 - fk) / (f2 - f1);
      }
      fb(m, k) = static_cast<Scalar>(weight * norm);
      row_sum += weight * norm;
    }
    if (!(row_sum > 0.0)) {
      throw Error("mel filter " + std::to_string(m) +
                  " covers no FFT bin; widen the range or enlarge the window");
    }
  }
  return fb;
}

// Projects a linear-frequency magnitude spectrogram onto mel bands.
template <typename Scalar>
BasicSpectrogram<Scalar> mel_spectrogram(const BasicSpectrogram<Scalar>& spec,
                                         int n_mels, double sample_rate,
                                         double f_min, double f_max) {
  MatrixX<Scalar> fb = mel_filterbank<Scalar>(n_mels, sample_rate,
                                              static_cast<int>(spec.n_bins()),
                                              f_min, f_max);
  BasicSpectrogram<Scalar> out;
  out.values = spec.values * fb.transpose();
  out.hop_s = spec.hop_s;
  out.t0_s = spec.t0_s;
  out.bin_axis = mel_center_frequencies(n_mels, f_min, f_max).template cast<Scalar>();
  return out;
}

// Per-channel energy normalization. The per-bin smoother is
// M[0] = E[0], M[t] = (1-s) M[t-1] + s E[t], and the output is
// (E / (eps + M)^gain + bias)^exponent - bias^exponent. Zero in maps to zero
// out, and output is finite and >= 0 for any finite non-negative input.
template <typename Scalar>
BasicSpectrogram<Scalar> pcen(const BasicSpectrogram<Scalar>& mel_spec,
                              const PcenParams& params) {
  validate(params);
  BasicSpectrogram<Scalar> out;
  out.hop_s = mel_spec.hop_s;
  out.t0_s = mel_spec.t0_s;
  out.bin_axis = mel_spec.bin_axis;
  out.values.resize(mel_spec.values.rows(), mel_spec.values.cols());
  if (mel_spec.values.rows() == 0) return out;

  using RowArray = Eigen::Array<Scalar, 1, Eigen::Dynamic>;
  const Scalar s = static_cast<Scalar>(params.smoothing);
  const Scalar alpha = static_cast<Scalar>(params.gain);
  const Scalar delta = static_cast<Scalar>(params.bias);
  const Scalar r = static_cast<Scalar>(params.exponent);
  const Scalar eps = static_cast<Scalar>(params.eps);
  const Scalar delta_r = std::pow(delta, r);

  RowArray smoother = mel_spec.values.row(0).array();
  for (Index t = 0; t < mel_spec.values.rows(); ++t) {
    const RowArray energy = mel_spec.values.row(t).array();
    if (t > 0) smoother = (Scalar(1) - s) * smoother + s * energy;
    out.values.row(t) =
        ((energy / (smoother + eps).pow(alpha) + delta).pow(r) - delta_r).matrix();
  }
  return out;
}

// log(value + floor), shifted per call so the minimum is exactly 0.
template <typename Scalar>
BasicSpectrogram<Scalar> log_compress(const BasicSpectrogram<Scalar>& spec,
                                      Scalar floor) {
  if (!(floor > Scalar(0))) throw Error("log floor must be > 0");
  BasicSpectrogram<Scalar> out;
  out.hop_s = spec.hop_s;
  out.t0_s = spec.t0_s;
  out.bin_axis = spec.bin_axis;
  out.values = (spec.values.array() + floor).log().matrix();
  if (out.values.size() > 0) {
    out.values.array() -= out.values.minCoeff();
  }
  return out;
}

// Linear-interpolation resampler. Quality-limited by design; fine for the
// narrowband events this toolkit works with.
template <typename Scalar>
BasicWaveform<Scalar> resample_linear(const BasicWaveform<Scalar>& w, int target_rate) {
  if (target_rate <= 0) throw Error("target rate must be positive");
  if (w.samples.size() == 0) throw Error("empty waveform");
  if (target_rate == w.sample_rate) return w;

  const Index n_in = w.samples.size();
  const double ratio = static_cast<double>(w.sample_rate) / target_rate;
  const Index n_out = std::max<Index>(
      1, static_cast<Index>(std::llround(static_cast<double>(n_in) / ratio)));
  BasicWaveform<Scalar> out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (Index i = 0; i < n_out; ++i) {
    const double pos = i * ratio;
    Index i0 = static_cast<Index>(pos);
    if (i0 >= n_in - 1) {
      out.samples[i] = w.samples[n_in - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] = static_cast<Scalar>((1.0 - frac) * w.samples[i0] +
                                         frac * w.samples[i0 + 1]);
  }
  return out;
}

// Pearson correlation over all coefficients of two equally-shaped expressions.
// Returns 0 when either side has (numerically) zero variance.
template <typename DerivedA, typename DerivedB>
double pearson(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("shape mismatch");
  const double n = static_cast<double>(a.size());
  if (n == 0.0) return 0.0;
  const double mean_a = a.template cast<double>().sum() / n;
  const double mean_b = b.template cast<double>().sum() / n;
  const auto ca = a.template cast<double>().array() - mean_a;
  const auto cb = b.template cast<double>().array() - mean_b;
  const double var_a = (ca * ca).sum();
  const double var_b = (cb * cb).sum();
  if (!(var_a > 0.0) || !(var_b > 0.0)) return 0.0;
  return (ca * cb).sum() / std::sqrt(var_a * var_b);
}

}  // namespace fsed

#endif  // FSED_DSP_HPP_
