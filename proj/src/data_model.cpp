#include "gaitpipe/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gaitpipe/error.hpp"
#include "text_util.hpp"

namespace gaitpipe {

namespace {

constexpr std::string_view kImuHeader = "t_ns,ax,ay,az,gx,gy,gz";
constexpr double kMaxGapDeviation = 0.20;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void check_sampling(const Recording& rec) {
  if (rec.samples.size() < 2) return;
  std::vector<std::int64_t> gaps;
  gaps.reserve(rec.samples.size() - 1);
  for (std::size_t i = 1; i < rec.samples.size(); ++i)
    gaps.push_back(rec.samples[i].t_ns - rec.samples[i - 1].t_ns);
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  const double median = static_cast<double>(*mid);
  const double nominal = 1e9 / rec.sample_rate;
  if (std::abs(median - nominal) > kMaxGapDeviation * nominal) {
    throw Error(ErrorCode::IrregularSampling,
                "median sample gap " + std::to_string(median * 1e-6) + " ms deviates more than 20% from " +
                    std::to_string(nominal * 1e-6) + " ms");
  }
}

}  // namespace

double mph_to_mps(double mph) {
  if (!(mph >= 0.0)) throw Error(ErrorCode::NegativeSpeed, "speed must be >= 0, got " + std::to_string(mph));
  return mph * kMetersPerSecondPerMph;
}

void validate_recording(const Recording& rec) {
  if (!(rec.sample_rate > 0.0) || !std::isfinite(rec.sample_rate))
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (rec.true_speed && !(*rec.true_speed > 0.0))
    throw Error(ErrorCode::NegativeSpeed, "labeled speed must be > 0");
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const auto& s = rec.samples[i];
    for (double v : {s.ax, s.ay, s.az, s.gx, s.gy, s.gz}) {
      if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRow, "non-finite value", i + 1);
    }
    if (i > 0 && s.t_ns <= rec.samples[i - 1].t_ns)
      throw Error(ErrorCode::NonMonotoneTimestamp, "timestamps must strictly increase", i + 1);
  }
  check_sampling(rec);
}

Recording parse_imu_csv(const std::filesystem::path& path, double sample_rate) {
  const std::string text = read_file(path);
  std::string_view rest = text;

  auto next_line = [&rest]() -> std::optional<std::string_view> {
    if (rest.empty()) return std::nullopt;
    auto pos = rest.find('\n');
    std::string_view line = rest.substr(0, pos);
    rest = pos == std::string_view::npos ? std::string_view{} : rest.substr(pos + 1);
    return detail::trim(line);
  };

  auto header = next_line();
  // Tolerate a UTF-8 byte order mark.
  if (header && header->starts_with("\xEF\xBB\xBF")) header->remove_prefix(3);
  if (!header || header->empty()) throw Error(ErrorCode::EmptyFile, path.string() + " is empty");
  if (*header != kImuHeader)
    throw Error(ErrorCode::MalformedRow, path.string() + ": header must be '" + std::string(kImuHeader) + "'", 0);

  Recording rec;
  rec.sample_rate = sample_rate;
  std::size_t row = 0;
  while (auto line = next_line()) {
    if (line->empty()) continue;
    ++row;
    auto fields = detail::split(*line, ',');
    if (fields.size() != 7)
      throw Error(ErrorCode::MalformedRow, path.string() + ": expected 7 fields", row);
    auto t = detail::parse_int64(fields[0]);
    if (!t) throw Error(ErrorCode::MalformedRow, path.string() + ": bad timestamp", row);
    double v[6];
    for (int k = 0; k < 6; ++k) {
      auto parsed = detail::parse_double(fields[static_cast<std::size_t>(k + 1)]);
      if (!parsed || !std::isfinite(*parsed))
        throw Error(ErrorCode::MalformedRow, path.string() + ": non-numeric or non-finite value", row);
      v[k] = *parsed;
    }
    if (!rec.samples.empty() && *t <= rec.samples.back().t_ns)
      throw Error(ErrorCode::NonMonotoneTimestamp, path.string() + ": timestamp does not increase", row);
    rec.samples.push_back({*t, v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  if (rec.samples.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no data rows");
  check_sampling(rec);
  return rec;
}

void write_imu_csv(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  write_imu_csv(out, rec);
}

void write_imu_csv(std::ostream& out, const Recording& rec) {
  out << kImuHeader << '\n';
  for (const auto& s : rec.samples) {
    out << s.t_ns;
    for (double v : {s.ax, s.ay, s.az, s.gx, s.gy, s.gz}) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

SessionManifest parse_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto base = path.parent_path();
  SessionManifest manifest;
  std::istringstream in(text);
  std::string raw;
  std::size_t row = 0;
  while (std::getline(in, raw)) {
    ++row;
    auto line = detail::trim(raw);
    if (line.empty() || line.starts_with('#') || line.starts_with("path,")) continue;
    auto fields = detail::split(line, ',');
    if (fields.size() != 4)
      throw Error(ErrorCode::InvalidManifest, path.string() + ": expected path,subject_id,speed,unit", row);
    ManifestEntry entry;
    entry.path = std::filesystem::path(std::string(detail::trim(fields[0])));
    if (entry.path.is_relative()) entry.path = base / entry.path;
    entry.subject_id = std::string(detail::trim(fields[1]));
    auto speed = detail::parse_double(fields[2]);
    if (!speed || !std::isfinite(*speed))
      throw Error(ErrorCode::InvalidManifest, path.string() + ": bad speed", row);
    if (*speed < 0.0) throw Error(ErrorCode::NegativeSpeed, path.string() + ": negative speed", row);
    entry.speed = *speed;
    auto unit = detail::trim(fields[3]);
    if (unit == "mph") {
      entry.unit = SpeedUnit::Mph;
    } else if (unit == "mps") {
      entry.unit = SpeedUnit::Mps;
    } else {
      throw Error(ErrorCode::InvalidManifest, path.string() + ": unit must be mph or mps", row);
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  const auto base = path.parent_path();
  for (const auto& e : manifest.entries) {
    auto p = e.path;
    if (!base.empty() && p.is_absolute()) {
      auto rel = p.lexically_relative(base);
      if (!rel.empty() && !rel.string().starts_with("..")) p = rel;
    }
    out << p.generic_string() << ',' << e.subject_id << ',' << detail::format_double(e.speed) << ','
        << (e.unit == SpeedUnit::Mph ? "mph" : "mps") << '\n';
  }
}

std::vector<Recording> load_session(const SessionManifest& manifest, double sample_rate) {
  std::vector<Recording> recordings;
  recordings.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) {
    if (!std::filesystem::exists(entry.path))
      throw Error(ErrorCode::MissingFile, "manifest references missing file " + entry.path.string());
    Recording rec;
    try {
      rec = parse_imu_csv(entry.path, sample_rate);
    } catch (const Error& e) {
      throw Error(e.code(), e.message() + " (while loading " + entry.path.string() + ")", e.line());
    }
    rec.subject_id = entry.subject_id;
    const double mps = entry.unit == SpeedUnit::Mph ? mph_to_mps(entry.speed) : entry.speed;
    if (mps > 0.0) rec.true_speed = mps;
    recordings.push_back(std::move(rec));
  }
  return recordings;
}

}  // namespace gaitpipe
