#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaitpipe/data_model.hpp"

namespace gaitpipe {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
  bool operator==(const Vec3&) const = default;
};

double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

inline Vec3 accel_of(const ImuSample& s) { return {s.ax, s.ay, s.az}; }
inline Vec3 gyro_of(const ImuSample& s) { return {s.gx, s.gy, s.gz}; }

namespace alignment {

inline constexpr double kGravityIntervalSeconds = 2.0;
inline constexpr double kMinGravityNorm = 1e-6;

struct GravityEstimate {
  Vec3 v;
};

// Magnitudes of the projection onto gravity and of the orthogonal remainder.
struct Decomposition {
  double vertical = 0.0;
  double horizontal = 0.0;
};

struct AlignedRow {
  std::int64_t t_ns = 0;
  double va = 0.0, ha = 0.0, vg = 0.0, hg = 0.0;
};

struct AlignedSeries {
  std::vector<AlignedRow> rows;
  double window_seconds = kGravityIntervalSeconds;
  double sample_rate = kNominalSampleRateHz;
};

GravityEstimate estimate_gravity(std::span<const Vec3> accel);

// Accelerometer: gravity is subtracted first, then the dynamic part is split.
Decomposition decompose_accel(const Vec3& accel, const GravityEstimate& gravity);
// Gyroscope: the raw rate vector is split against the gravity direction.
Decomposition decompose_gyro(const Vec3& rate, const GravityEstimate& gravity);

// Consecutive non-overlapping intervals; a tail shorter than one interval is dropped.
AlignedSeries align_recording(const Recording& filtered, double interval_seconds = kGravityIntervalSeconds);

std::size_t samples_per_interval(double sample_rate, double interval_seconds);

}  // namespace alignment
}  // namespace gaitpipe
