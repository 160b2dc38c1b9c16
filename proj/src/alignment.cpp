#include "gaitpipe/alignment.hpp"

#include <cmath>
#include <string>

#include "gaitpipe/error.hpp"

namespace gaitpipe {

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

namespace alignment {

namespace {

void require_valid(const GravityEstimate& g) {
  if (!(norm(g.v) > kMinGravityNorm))
    throw Error(ErrorCode::DegenerateGravity, "gravity estimate norm below 1e-6");
}

Decomposition split(const Vec3& dynamic, const Vec3& v) {
  const Vec3 p = (dot(dynamic, v) / dot(v, v)) * v;
  const Vec3 h = dynamic - p;
  return {norm(p), norm(h)};
}

}  // namespace

std::size_t samples_per_interval(double sample_rate, double interval_seconds) {
  return static_cast<std::size_t>(std::llround(sample_rate * interval_seconds));
}

GravityEstimate estimate_gravity(std::span<const Vec3> accel) {
  if (accel.empty()) throw Error(ErrorCode::EmptyWindow, "no samples in gravity interval");
  Vec3 sum;
  for (const auto& a : accel) sum = sum + a;
  GravityEstimate g{(1.0 / static_cast<double>(accel.size())) * sum};
  require_valid(g);
  return g;
}

Decomposition decompose_accel(const Vec3& accel, const GravityEstimate& gravity) {
  require_valid(gravity);
  return split(accel - gravity.v, gravity.v);
}

Decomposition decompose_gyro(const Vec3& rate, const GravityEstimate& gravity) {
  require_valid(gravity);
  return split(rate, gravity.v);
}

AlignedSeries align_recording(const Recording& rec, double interval_seconds) {
  const std::size_t per = samples_per_interval(rec.sample_rate, interval_seconds);
  if (per == 0) throw Error(ErrorCode::InvalidArgument, "gravity interval shorter than one sample");
  const std::size_t intervals = rec.samples.size() / per;
  if (intervals == 0)
    throw Error(ErrorCode::WindowTooShort, "recording has " + std::to_string(rec.samples.size()) +
                                               " samples, one gravity interval needs " + std::to_string(per));

  AlignedSeries out;
  out.window_seconds = interval_seconds;
  out.sample_rate = rec.sample_rate;
  out.rows.reserve(intervals * per);
  std::vector<Vec3> accel(per);
  for (std::size_t w = 0; w < intervals; ++w) {
    const std::size_t begin = w * per;
    for (std::size_t i = 0; i < per; ++i) accel[i] = accel_of(rec.samples[begin + i]);
    GravityEstimate g;
    try {
      g = estimate_gravity(accel);
    } catch (const Error& e) {
      throw Error(e.code(), e.message() + " (interval " + std::to_string(w) + ")");
    }
    for (std::size_t i = 0; i < per; ++i) {
      const auto& s = rec.samples[begin + i];
      const auto a = decompose_accel(accel[i], g);
      const auto r = decompose_gyro(gyro_of(s), g);
      out.rows.push_back({s.t_ns, a.vertical, a.horizontal, r.vertical, r.horizontal});
    }
  }
  return out;
}

}  // namespace alignment
}  // namespace gaitpipe
