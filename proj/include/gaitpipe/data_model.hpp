#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gaitpipe {

inline constexpr double kNominalSampleRateHz = 100.0;
inline constexpr double kMetersPerSecondPerMph = 0.44704;

// One 6-axis reading in the device frame. Acceleration in m/s^2, angular rate in rad/s.
struct ImuSample {
  std::int64_t t_ns = 0;
  double ax = 0.0, ay = 0.0, az = 0.0;
  double gx = 0.0, gy = 0.0, gz = 0.0;

  bool operator==(const ImuSample&) const = default;
};

struct Recording {
  std::string subject_id;
  std::optional<double> true_speed;  // m/s; absent for prediction-only input
  double sample_rate = kNominalSampleRateHz;
  std::vector<ImuSample> samples;

  double duration_seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

enum class SpeedUnit { Mph, Mps };

struct ManifestEntry {
  std::filesystem::path path;
  std::string subject_id;
  double speed = 0.0;
  SpeedUnit unit = SpeedUnit::Mps;
};

struct SessionManifest {
  std::vector<ManifestEntry> entries;
};

double mph_to_mps(double mph);

// Reads `t_ns,ax,ay,az,gx,gy,gz`. Subject and label are left empty; the
// manifest supplies them. Errors carry the 1-based data row (header excluded).
Recording parse_imu_csv(const std::filesystem::path& path, double sample_rate = kNominalSampleRateHz);
void write_imu_csv(const std::filesystem::path& path, const Recording& recording);
void write_imu_csv(std::ostream& out, const Recording& recording);

// Relative entry paths are resolved against the manifest's directory.
SessionManifest parse_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest);

std::vector<Recording> load_session(const SessionManifest& manifest,
                                    double sample_rate = kNominalSampleRateHz);

// Checks the ImuSample/Recording invariants; throws on the first violation.
void validate_recording(const Recording& recording);

}  // namespace gaitpipe
