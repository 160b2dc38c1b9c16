#include "gaitpipe/nn/model_io.hpp"

#include <fstream>
#include <sstream>

#include "../text_util.hpp"
#include "gaitpipe/error.hpp"

namespace gaitpipe::nn {

namespace {

constexpr std::string_view kMagic = "gaitpipe-model v1";

// Every serialized array in file order: learnable parameters plus batch-norm running statistics.
struct Slot {
  std::string label;
  std::vector<double>* values;
};

std::vector<Slot> slots(Network& net) {
  std::vector<Slot> out;
  auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string prefix = std::to_string(i) + " ";
    if (auto* c = std::get_if<Conv2d>(&layers[i])) {
      out.push_back({prefix + "conv2d kernel", &c->kernel().value});
      out.push_back({prefix + "conv2d bias", &c->bias().value});
    } else if (auto* b = std::get_if<BatchNorm>(&layers[i])) {
      out.push_back({prefix + "batchnorm gamma", &b->gamma().value});
      out.push_back({prefix + "batchnorm beta", &b->beta().value});
      out.push_back({prefix + "batchnorm running_mean", &b->running_mean()});
      out.push_back({prefix + "batchnorm running_var", &b->running_var()});
    } else if (auto* d = std::get_if<Dense>(&layers[i])) {
      out.push_back({prefix + "dense weight", &d->weight().value});
      out.push_back({prefix + "dense bias", &d->bias().value});
    }
  }
  return out;
}

std::string csv(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += detail::format_double(values[i]);
  }
  return out;
}

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::CorruptModelFile, path.string() + ": " + why);
}

std::vector<double> parse_values(const std::filesystem::path& path, std::string_view text, std::size_t expected) {
  std::vector<double> out;
  if (expected == 0) return out;
  auto fields = detail::split(text, ',');
  if (fields.size() != expected)
    corrupt(path, "expected " + std::to_string(expected) + " values, found " + std::to_string(fields.size()));
  out.reserve(expected);
  for (auto f : fields) {
    auto v = detail::parse_double(f);
    if (!v) corrupt(path, "unparseable value '" + std::string(f) + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  Network net = model.network;
  out << kMagic << '\n';
  out << "arch " << net.fingerprint() << '\n';
  out << "channels=" << imaging::to_string(model.channels) << '\n';
  out << "normalizer_mean=" << csv(model.normalizer.mean) << '\n';
  out << "normalizer_std=" << csv(model.normalizer.stddev) << '\n';
  out << "normalizer_masked=";
  for (std::size_t c = 0; c < imaging::kImageCols; ++c) out << (c ? "," : "") << (model.normalizer.masked[c] ? 1 : 0);
  out << '\n';
  for (const auto& slot : slots(net)) {
    out << "param " << slot.label << ' ' << slot.values->size() << '\n';
    out << csv(*slot.values) << '\n';
  }
  out << "end\n";
  if (!out) throw Error(ErrorCode::MissingFile, "failed writing " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::string line;
  auto next = [&](const char* what) -> std::string {
    if (!std::getline(in, line)) corrupt(path, std::string("truncated before ") + what);
    return std::string(detail::trim(line));
  };
  auto keyed = [&](std::string_view key) -> std::string {
    auto l = next(std::string(key).c_str());
    if (!l.starts_with(key)) corrupt(path, "expected " + std::string(key));
    return l.substr(key.size());
  };

  if (next("header") != kMagic) corrupt(path, "not a gaitpipe-model v1 file");

  TrainedModel model;
  auto skeleton = make_speed_network(0);
  const std::string arch = keyed("arch ");
  if (arch != skeleton.fingerprint()) corrupt(path, "architecture fingerprint mismatch");
  model.network = std::move(skeleton);

  try {
    model.channels = imaging::parse_channel_set(keyed("channels="));
  } catch (const Error&) {
    corrupt(path, "bad channel set");
  }
  auto four = [&](std::string_view key) {
    auto v = parse_values(path, keyed(key), imaging::kImageCols);
    std::array<double, imaging::kImageCols> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
  };
  model.normalizer.mean = four("normalizer_mean=");
  model.normalizer.stddev = four("normalizer_std=");
  const auto masked = four("normalizer_masked=");
  for (std::size_t c = 0; c < imaging::kImageCols; ++c) model.normalizer.masked[c] = masked[c] != 0.0;

  for (auto& slot : slots(model.network)) {
    const std::string header = "param " + slot.label + " " + std::to_string(slot.values->size());
    if (next(header.c_str()) != header) corrupt(path, "expected '" + header + "'");
    *slot.values = parse_values(path, next("parameter values"), slot.values->size());
  }
  if (next("end marker") != "end") corrupt(path, "missing end marker");
  return model;
}

}  // namespace gaitpipe::nn
