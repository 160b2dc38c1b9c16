#include "gaitpipe/dsp.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "gaitpipe/error.hpp"

namespace gaitpipe::dsp {

namespace {

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

PsdEstimate welch_psd(std::span<const double> signal, double sample_rate_hz, double window_seconds,
                      double overlap_fraction) {
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw Error(ErrorCode::InvalidOverlap, "overlap fraction must be in [0, 1)");
  if (!(sample_rate_hz > 0.0) || !(window_seconds > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sample rate and window length must be positive");
  const auto nperseg = static_cast<std::size_t>(std::llround(window_seconds * sample_rate_hz));
  if (nperseg < 2 || signal.size() < nperseg)
    throw Error(ErrorCode::SignalTooShort, "signal has " + std::to_string(signal.size()) +
                                               " samples, one window needs " + std::to_string(nperseg));

  const auto noverlap = static_cast<std::size_t>(std::floor(static_cast<double>(nperseg) * overlap_fraction));
  const std::size_t hop = nperseg - noverlap;
  const std::size_t nbins = nperseg / 2 + 1;

  const auto window = periodic_hann(nperseg);
  double window_power = 0.0;
  for (double w : window) window_power += w * w;

  // Twiddle table for a direct real DFT; segments are short (one second).
  std::vector<std::complex<double>> twiddle(nperseg);
  for (std::size_t i = 0; i < nperseg; ++i)
    twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nperseg));

  PsdEstimate est;
  est.window_seconds = window_seconds;
  est.overlap_fraction = overlap_fraction;
  est.freqs.resize(nbins);
  est.power.assign(nbins, 0.0);
  for (std::size_t k = 0; k < nbins; ++k)
    est.freqs[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(nperseg);

  std::vector<double> seg(nperseg);
  for (std::size_t start = 0; start + nperseg <= signal.size(); start += hop) {
    for (std::size_t i = 0; i < nperseg; ++i) seg[i] = signal[start + i] * window[i];
    for (std::size_t k = 0; k < nbins; ++k) {
      std::complex<double> acc = 0.0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < nperseg; ++i) {
        acc += seg[i] * twiddle[idx];
        idx += k;
        if (idx >= nperseg) idx -= nperseg;
      }
      double p = std::norm(acc) / (sample_rate_hz * window_power);
      const bool nyquist = (nperseg % 2 == 0) && k == nperseg / 2;
      if (k != 0 && !nyquist) p *= 2.0;
      est.power[k] += p;
    }
    ++est.segments;
  }
  for (double& p : est.power) p /= static_cast<double>(est.segments);
  return est;
}

FirFilter design_lowpass(double cutoff_hz, double sample_rate_hz, int num_taps) {
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0))
    throw Error(ErrorCode::InvalidCutoff, "cutoff " + std::to_string(cutoff_hz) +
                                              " Hz must lie in (0, Nyquist = " + std::to_string(sample_rate_hz / 2.0) +
                                              " Hz)");
  if (num_taps < 1 || num_taps % 2 == 0)
    throw Error(ErrorCode::EvenTapCount, "tap count must be odd and positive, got " + std::to_string(num_taps));

  const auto n = static_cast<std::size_t>(num_taps);
  const double fc = cutoff_hz / sample_rate_hz;  // cycles per sample
  const double center = static_cast<double>(n - 1) / 2.0;
  FirFilter f;
  f.cutoff_hz = cutoff_hz;
  f.sample_rate_hz = sample_rate_hz;
  f.taps.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = static_cast<double>(i) - center;
    const double hamming =
        n == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    f.taps[i] = 2.0 * fc * sinc(2.0 * fc * m) * hamming;
    sum += f.taps[i];
  }
  for (double& t : f.taps) t /= sum;
  // Exact symmetry, independent of rounding in the cosine terms.
  for (std::size_t i = 0; i < n / 2; ++i) f.taps[n - 1 - i] = f.taps[i];
  return f;
}

std::vector<double> apply_filter(const FirFilter& filter, std::span<const double> signal) {
  const std::size_t ntaps = filter.taps.size();
  if (signal.size() < ntaps)
    throw Error(ErrorCode::SignalTooShort, "signal has " + std::to_string(signal.size()) +
                                               " samples, filter needs at least " + std::to_string(ntaps));
  const std::size_t half = filter.group_delay();
  const std::size_t n = signal.size();

  std::vector<double> padded(n + 2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    padded[half - 1 - i] = signal[i];
    padded[half + n + i] = signal[n - 1 - i];
  }
  for (std::size_t i = 0; i < n; ++i) padded[half + i] = signal[i];

  // Output sample i is centered on input sample i, so the group delay is removed.
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* x = padded.data() + i;
    for (std::size_t k = 0; k < ntaps; ++k) acc += filter.taps[k] * x[ntaps - 1 - k];
    out[i] = acc;
  }
  return out;
}

Recording filter_recording(const FirFilter& filter, const Recording& rec) {
  const std::size_t n = rec.samples.size();
  std::vector<double> channel(n);
  Recording out = rec;
  double ImuSample::*fields[] = {&ImuSample::ax, &ImuSample::ay, &ImuSample::az,
                                 &ImuSample::gx, &ImuSample::gy, &ImuSample::gz};
  for (auto field : fields) {
    for (std::size_t i = 0; i < n; ++i) channel[i] = rec.samples[i].*field;
    const auto filtered = apply_filter(filter, channel);
    for (std::size_t i = 0; i < n; ++i) out.samples[i].*field = filtered[i];
  }
  return out;
}

double magnitude_response(const FirFilter& filter, double freq_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / filter.sample_rate_hz;
  std::complex<double> h = 0.0;
  for (std::size_t k = 0; k < filter.taps.size(); ++k)
    h += filter.taps[k] * std::polar(1.0, -omega * static_cast<double>(k));
  return std::abs(h);
}

}  // namespace gaitpipe::dsp
