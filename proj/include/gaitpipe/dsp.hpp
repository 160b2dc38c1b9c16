#pragma once

#include <span>
#include <vector>

#include "gaitpipe/data_model.hpp"

namespace gaitpipe::dsp {

inline constexpr double kDefaultCutoffHz = 15.0;
inline constexpr int kDefaultTaps = 65;
inline constexpr double kDefaultPsdWindowSeconds = 1.0;
inline constexpr double kDefaultPsdOverlap = 0.5;

// One-sided power spectral density, unit^2/Hz.
struct PsdEstimate {
  std::vector<double> freqs;
  std::vector<double> power;
  double window_seconds = kDefaultPsdWindowSeconds;
  double overlap_fraction = kDefaultPsdOverlap;
  std::size_t segments = 0;
};

struct FirFilter {
  std::vector<double> taps;
  double cutoff_hz = kDefaultCutoffHz;
  double sample_rate_hz = 100.0;

  std::size_t group_delay() const { return taps.size() / 2; }
};

// Welch's method: periodic Hann segments of `window_seconds`, hop set by the
// overlap, density scaling. The segment mean is not removed.
PsdEstimate welch_psd(std::span<const double> signal, double sample_rate_hz,
                      double window_seconds = kDefaultPsdWindowSeconds,
                      double overlap_fraction = kDefaultPsdOverlap);

// Hamming-windowed sinc low-pass, normalized to unit DC gain.
FirFilter design_lowpass(double cutoff_hz, double sample_rate_hz, int num_taps = kDefaultTaps);

// Zero-phase-aligned filtering: half-sample symmetric padding of group_delay()
// samples at both ends, then the centered convolution. Output has the input's length.
std::vector<double> apply_filter(const FirFilter& filter, std::span<const double> signal);

// Filters all six channels; timestamps and labels are carried over.
Recording filter_recording(const FirFilter& filter, const Recording& recording);

// |H(f)| of the tap sequence, evaluated directly from its DTFT.
double magnitude_response(const FirFilter& filter, double freq_hz);

}  // namespace gaitpipe::dsp
