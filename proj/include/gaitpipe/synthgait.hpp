#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gaitpipe/alignment.hpp"
#include "gaitpipe/data_model.hpp"

namespace gaitpipe::synth {

// Row-major 3x3 rotation taking world-frame vectors into the device frame.
using Rotation = std::array<double, 9>;

Vec3 rotate(const Rotation& r, const Vec3& v);
// Uniformly distributed rotation (normalized Gaussian quaternion).
Rotation random_rotation(std::uint64_t seed);

inline constexpr double kGravity = 9.81;

// Treadmill walking stand-in. World frame: z up, x forward, y lateral.
struct GaitParams {
  double speed = 1.0;                      // m/s
  double cadence_offset = 1.4;             // step frequency = offset + slope * speed (Hz)
  double cadence_slope = 0.6;
  double vertical_gain = 2.0;              // vertical accel amplitude per m/s of speed (m/s^2)
  double horizontal_ratio = 0.5;           // forward accel amplitude relative to vertical
  double harmonic_ratio = 0.3;             // second vertical harmonic relative to the fundamental
  double gyro_gain = 0.8;                  // gyro amplitude per Hz of step frequency (rad/s)
  double yaw_ratio = 0.3;                  // rotation about the vertical relative to the gyro amplitude
  double accel_noise = 0.1;                // m/s^2, device frame
  double gyro_noise = 0.02;                // rad/s, device frame
  std::optional<Rotation> orientation;     // drawn from the seed when absent

  double step_frequency() const { return cadence_offset + cadence_slope * speed; }
  double vertical_amplitude() const { return vertical_gain * speed; }
};

void validate(const GaitParams& params);

Recording generate_recording(const GaitParams& params, double duration_seconds,
                             double sample_rate = kNominalSampleRateHz, std::uint64_t seed = 0);

struct CohortSpec {
  std::size_t subjects = 10;
  std::vector<double> speeds;  // m/s
  double minutes_per_speed = 5.0;
  double sample_rate = kNominalSampleRateHz;
  GaitParams base;             // speed and orientation are overridden per recording
  double jitter = 0.10;        // +/- fraction on cadence offset, cadence slope, vertical gain
};

// Treadmill protocol speeds, 1 to 3 mph in 0.5 mph steps, in m/s.
std::vector<double> protocol_speeds();

// Recordings ordered by subject, then speed. Subject ids are S01, S02, ...
std::vector<Recording> generate_cohort(const CohortSpec& spec, std::uint64_t seed);

}  // namespace gaitpipe::synth
