#include "gaitpipe/synthgait.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "gaitpipe/error.hpp"

namespace gaitpipe::synth {

namespace {

// splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Vec3 rotate(const Rotation& r, const Vec3& v) {
  return {r[0] * v.x + r[1] * v.y + r[2] * v.z, r[3] * v.x + r[4] * v.y + r[5] * v.z,
          r[6] * v.x + r[7] * v.y + r[8] * v.z};
}

Rotation random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed));
  std::normal_distribution<double> normal;
  double w, x, y, z, len;
  do {
    w = normal(rng), x = normal(rng), y = normal(rng), z = normal(rng);
    len = std::sqrt(w * w + x * x + y * y + z * z);
  } while (len < 1e-12);
  w /= len, x /= len, y /= len, z /= len;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - z * w),     2 * (x * z + y * w),
          2 * (x * y + z * w),     1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
          2 * (x * z - y * w),     2 * (y * z + x * w),     1 - 2 * (x * x + y * y)};
}

void validate(const GaitParams& p) {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidParams, what); };
  if (!(p.speed > 0.0) || !std::isfinite(p.speed)) fail("speed must be > 0");
  if (!(p.step_frequency() > 0.0)) fail("step frequency must be > 0");
  for (double a : {p.vertical_gain, p.horizontal_ratio, p.harmonic_ratio, p.gyro_gain, p.yaw_ratio})
    if (!(a >= 0.0) || !std::isfinite(a)) fail("amplitudes must be finite and >= 0");
  if (!(p.accel_noise >= 0.0) || !(p.gyro_noise >= 0.0)) fail("noise levels must be >= 0");
}

Recording generate_recording(const GaitParams& params, double duration_seconds, double sample_rate,
                             std::uint64_t seed) {
  validate(params);
  if (!(duration_seconds >= 4.0)) throw Error(ErrorCode::InvalidParams, "duration must be at least 4 s");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::InvalidParams, "sample rate must be > 0");

  std::mt19937_64 rng(mix(seed));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double ph_vertical = phase(rng), ph_harmonic = phase(rng), ph_forward = phase(rng);
  const double ph_roll = phase(rng), ph_pitch = phase(rng), ph_yaw = phase(rng);
  const Rotation rot = params.orientation ? *params.orientation : random_rotation(seed ^ 0x5DEECE66DULL);
  std::normal_distribution<double> accel_noise(0.0, 1.0), gyro_noise(0.0, 1.0);

  const double f = params.step_frequency();
  const double a_vert = params.vertical_amplitude();
  const double a_fwd = params.horizontal_ratio * a_vert;
  const double g_amp = params.gyro_gain * f;
  const double two_pi = 2.0 * std::numbers::pi;

  Recording rec;
  rec.true_speed = params.speed;
  rec.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(duration_seconds * sample_rate));
  rec.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const Vec3 accel_world{
        a_fwd * std::sin(two_pi * f * t + ph_forward), 0.0,
        kGravity + a_vert * (std::sin(two_pi * 2.0 * f * t + ph_vertical) +
                             params.harmonic_ratio * std::sin(two_pi * 4.0 * f * t + ph_harmonic))};
    const Vec3 gyro_world{g_amp * std::sin(two_pi * f * t + ph_roll),
                          0.5 * g_amp * std::sin(two_pi * 2.0 * f * t + ph_pitch),
                          params.yaw_ratio * g_amp * std::sin(two_pi * f * t + ph_yaw)};
    Vec3 a = rotate(rot, accel_world);
    Vec3 g = rotate(rot, gyro_world);
    if (params.accel_noise > 0.0)
      a = a + params.accel_noise * Vec3{accel_noise(rng), accel_noise(rng), accel_noise(rng)};
    if (params.gyro_noise > 0.0) g = g + params.gyro_noise * Vec3{gyro_noise(rng), gyro_noise(rng), gyro_noise(rng)};
    const auto t_ns = static_cast<std::int64_t>(std::llround(static_cast<double>(i) * 1e9 / sample_rate));
    rec.samples.push_back({t_ns, a.x, a.y, a.z, g.x, g.y, g.z});
  }
  return rec;
}

std::vector<double> protocol_speeds() {
  std::vector<double> out;
  for (double mph : {1.0, 1.5, 2.0, 2.5, 3.0}) out.push_back(mph_to_mps(mph));
  return out;
}

std::vector<Recording> generate_cohort(const CohortSpec& spec, std::uint64_t seed) {
  if (spec.subjects < 1) throw Error(ErrorCode::InvalidParams, "cohort needs at least one subject");
  if (spec.speeds.empty()) throw Error(ErrorCode::InvalidParams, "cohort needs at least one speed");
  if (!(spec.jitter >= 0.0 && spec.jitter < 1.0)) throw Error(ErrorCode::InvalidParams, "jitter must be in [0, 1)");
  std::vector<Recording> cohort;
  cohort.reserve(spec.subjects * spec.speeds.size());
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    const std::uint64_t subject_seed = mix(seed * 1000003ULL + s);
    std::mt19937_64 rng(subject_seed);
    std::uniform_real_distribution<double> jitter(1.0 - spec.jitter, 1.0 + spec.jitter);
    GaitParams params = spec.base;
    params.cadence_offset *= jitter(rng);
    params.cadence_slope *= jitter(rng);
    params.vertical_gain *= jitter(rng);
    params.orientation.reset();

    char id[16];
    std::snprintf(id, sizeof(id), "S%02zu", s + 1);
    for (std::size_t k = 0; k < spec.speeds.size(); ++k) {
      params.speed = spec.speeds[k];
      auto rec = generate_recording(params, spec.minutes_per_speed * 60.0, spec.sample_rate,
                                    mix(subject_seed ^ (k + 1) * 0xD1B54A32D192ED03ULL));
      rec.subject_id = id;
      cohort.push_back(std::move(rec));
    }
  }
  return cohort;
}

}  // namespace gaitpipe::synth
