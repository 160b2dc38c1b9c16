#include "gaitpipe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "gaitpipe/error.hpp"
#include "text_util.hpp"

namespace gaitpipe::pipeline {

namespace {

constexpr std::string_view kReportColumns = "subject_id,window_start_ns,true_mps,pred_mps";

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void require_labels(std::span<const imaging::GaitImage> images, const char* which) {
  for (const auto& img : images)
    if (!img.label)
      throw Error(ErrorCode::InvalidArgument, std::string(which) + " image from subject '" + img.subject_id +
                                                  "' has no speed label");
}

void add_config_metadata(EvaluationReport& report, const ExperimentConfig& config, std::size_t available,
                         std::size_t used) {
  auto& m = report.metadata;
  m.insert(m.begin(), {
                          {"channels", std::string(imaging::to_string(config.channels))},
                          {"image_budget", config.image_budget ? std::to_string(*config.image_budget) : "all"},
                          {"train_images_available", std::to_string(available)},
                          {"train_images_used", std::to_string(used)},
                          {"seed", std::to_string(config.train.seed)},
                          {"config_hash", config.hash()},
                          {"config", config.describe()},
                      });
}

}  // namespace

void append_summary(EvaluationReport& report) {
  report.metadata.emplace_back("eval_windows", std::to_string(report.windows.size()));
  report.metadata.emplace_back("subjects", std::to_string(report.subject_rmse.size()));
  report.metadata.emplace_back("diverged", report.diverged ? "true" : "false");
  report.metadata.emplace_back("aggregate_rmse_mps", detail::format_double(report.aggregate_rmse));
  for (const auto& [subject, rmse] : report.subject_rmse)
    report.metadata.emplace_back("subject_rmse_mps." + subject, detail::format_double(rmse));
}

namespace {

std::vector<imaging::GaitImage> normalized(const imaging::Normalizer& n, std::span<const imaging::GaitImage> images) {
  std::vector<imaging::GaitImage> out(images.begin(), images.end());
  imaging::apply_normalizer_inplace(n, out);
  return out;
}

struct FittedModel {
  nn::TrainedModel model;
  std::vector<double> loss_history;
  bool diverged = false;
};

FittedModel fit(std::span<const imaging::GaitImage> train_images, const imaging::Normalizer& normalizer,
                const ExperimentConfig& config) {
  const auto norm_train = normalized(normalizer, train_images);
  std::vector<double> targets;
  targets.reserve(norm_train.size());
  for (const auto& img : norm_train) targets.push_back(*img.label);
  auto result = nn::train(nn::make_speed_network(config.train.seed, config.dropout), to_tensor(norm_train), targets, config.train);
  return {{std::move(result.model), normalizer, config.channels}, std::move(result.loss_history), result.diverged};
}

}  // namespace

std::string ExperimentConfig::describe() const {
  std::ostringstream out;
  out << "cutoff_hz=" << detail::format_double(preprocess.cutoff_hz) << ";taps=" << preprocess.taps
      << ";window_s=" << detail::format_double(preprocess.window_seconds) << ";channels=" << imaging::to_string(channels)
      << ";split=" << detail::format_double(split_fraction) << ";overlap=" << detail::format_double(train_overlap)
      << ";M=" << (image_budget ? std::to_string(*image_budget) : "all") << ";epochs=" << train.epochs
      << ";batch=" << train.batch_size << ";lr=" << detail::format_double(train.adam.learning_rate)
      << ";beta1=" << detail::format_double(train.adam.beta1) << ";beta2=" << detail::format_double(train.adam.beta2)
      << ";adam_eps=" << detail::format_double(train.adam.epsilon) << ";dropout=" << detail::format_double(dropout) << ";seed=" << train.seed
      << ";per_subject=" << (per_subject ? 1 : 0);
  return out.str();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(describe())));
  return buf;
}

std::optional<std::string> EvaluationReport::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return std::nullopt;
}

void fill_rmse(EvaluationReport& report) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  for (const auto& w : report.windows) {
    const double e = w.pred_mps - w.true_mps;
    total += e * e;
    auto& s = acc[w.subject_id];
    s.first += e * e;
    ++s.second;
  }
  report.aggregate_rmse = report.windows.empty() ? 0.0 : std::sqrt(total / static_cast<double>(report.windows.size()));
  report.subject_rmse.clear();
  for (const auto& [subject, s] : acc) report.subject_rmse[subject] = std::sqrt(s.first / static_cast<double>(s.second));
}

std::vector<std::size_t> subsample_indices(std::size_t available, std::size_t budget, std::uint64_t seed) {
  if (budget > available)
    throw Error(ErrorCode::InsufficientImages, "requested M=" + std::to_string(budget) + " training images but only " +
                                                   std::to_string(available) + " are available");
  std::vector<std::size_t> idx(available);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed ^ 0xA0761D6478BD642FULL);
  // Partial Fisher-Yates: the first `budget` slots are a uniform sample.
  for (std::size_t i = 0; i < budget; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, available - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(budget);
  std::sort(idx.begin(), idx.end());
  return idx;
}

nn::Tensor4 to_tensor(std::span<const imaging::GaitImage> images) {
  nn::Tensor4 t({images.size(), imaging::kImageRows, imaging::kImageCols, 1});
  for (std::size_t i = 0; i < images.size(); ++i)
    std::copy(images[i].pixels.begin(), images[i].pixels.end(), t.data() + i * imaging::kImagePixels);
  return t;
}

std::vector<double> predict_images(const nn::TrainedModel& model, std::span<const imaging::GaitImage> images) {
  if (images.empty()) return {};
  return nn::predict(model.network, to_tensor(normalized(model.normalizer, images)));
}

EvaluationReport evaluate(const nn::TrainedModel& model, std::span<const imaging::GaitImage> eval_images) {
  require_labels(eval_images, "evaluation");
  EvaluationReport report;
  const auto pred = predict_images(model, eval_images);
  for (std::size_t i = 0; i < eval_images.size(); ++i)
    report.windows.push_back({eval_images[i].subject_id, eval_images[i].start_ns, *eval_images[i].label, pred[i]});
  fill_rmse(report);
  return report;
}

TrainingOutcome train_on_split(const imaging::DatasetSplit& split, const ExperimentConfig& config) {
  require_labels(split.train, "training");
  require_labels(split.eval, "evaluation");
  TrainingOutcome outcome;
  const auto normalizer = imaging::fit_normalizer(split.train);
  outcome.train_images_available = split.train.size();

  std::vector<imaging::GaitImage> train_images;
  if (config.image_budget) {
    for (auto i : subsample_indices(split.train.size(), *config.image_budget, config.train.seed))
      train_images.push_back(split.train[i]);
  } else {
    train_images = split.train;
  }
  outcome.train_images_used = train_images.size();

  if (!config.per_subject) {
    auto fitted = fit(train_images, normalizer, config);
    outcome.model = std::move(fitted.model);
    outcome.loss_history = std::move(fitted.loss_history);
    outcome.report = evaluate(outcome.model, split.eval);
    outcome.report.diverged = fitted.diverged;
  } else {
    std::map<std::string, std::vector<imaging::GaitImage>> train_by_subject, eval_by_subject;
    for (const auto& img : train_images) train_by_subject[img.subject_id].push_back(img);
    for (const auto& img : split.eval) eval_by_subject[img.subject_id].push_back(img);
    for (auto& [subject, images] : train_by_subject) {
      auto fitted = fit(images, normalizer, config);
      outcome.report.diverged = outcome.report.diverged || fitted.diverged;
      const auto& eval = eval_by_subject[subject];
      const auto part = evaluate(fitted.model, eval);
      outcome.report.windows.insert(outcome.report.windows.end(), part.windows.begin(), part.windows.end());
      outcome.subject_models.emplace_back(subject, std::move(fitted.model));
    }
    fill_rmse(outcome.report);
  }
  add_config_metadata(outcome.report, config, outcome.train_images_available, outcome.train_images_used);
  append_summary(outcome.report);
  return outcome;
}

TrainingOutcome run_training(std::span<const Recording> recordings, const ExperimentConfig& config) {
  if (recordings.empty()) throw Error(ErrorCode::EmptyDataset, "no recordings given");
  const auto split =
      imaging::build_split(recordings, config.channels, config.train_overlap, config.split_fraction, config.preprocess);
  return train_on_split(split, config);
}

std::vector<SpeedEstimate> run_prediction(const nn::TrainedModel& model, const Recording& recording,
                                          const imaging::PreprocessConfig& preprocess) {
  const std::size_t window = alignment::samples_per_interval(recording.sample_rate, preprocess.window_seconds);
  if (recording.samples.size() < window)
    throw Error(ErrorCode::WindowTooShort, "recording of " + std::to_string(recording.duration_seconds()) +
                                               " s is shorter than one " +
                                               detail::format_double(preprocess.window_seconds) + " s window");
  const auto series = imaging::preprocess(recording, preprocess);
  const auto images =
      imaging::images_from_series(series, recording, model.channels, window, window, 0, series.rows.size());
  const auto speeds = predict_images(model, images);
  std::vector<SpeedEstimate> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) out.push_back({images[i].start_ns, speeds[i]});
  return out;
}

std::vector<ArmResult> run_ablation(std::span<const Recording> recordings, const ExperimentConfig& config) {
  const auto full = imaging::build_split(recordings, imaging::ChannelSet::Both, config.train_overlap,
                                         config.split_fraction, config.preprocess);
  std::vector<ArmResult> arms;
  for (auto channels : {imaging::ChannelSet::Acc, imaging::ChannelSet::Gyro, imaging::ChannelSet::Both}) {
    imaging::DatasetSplit split = full;
    for (auto& img : split.train) imaging::mask_channels(img, channels);
    for (auto& img : split.eval) imaging::mask_channels(img, channels);
    for (const auto* set : {&split.train, &split.eval})
      for (const auto& img : *set)
        if (!imaging::mask_holds(img, channels))
          throw Error(ErrorCode::InvalidArgument, "masked columns of the " + std::string(imaging::to_string(channels)) +
                                                      " arm are not all zero");
    ExperimentConfig arm_config = config;
    arm_config.channels = channels;
    auto outcome = train_on_split(split, arm_config);
    outcome.report.metadata.insert(outcome.report.metadata.begin(), {"arm", std::string(imaging::to_string(channels))});
    arms.push_back({std::string(imaging::to_string(channels)), std::move(outcome.report)});
  }
  return arms;
}

std::vector<EvaluationReport> run_m_sweep(std::span<const Recording> recordings, std::span<const std::size_t> budgets,
                                          const ExperimentConfig& config) {
  if (budgets.empty()) throw Error(ErrorCode::InvalidArgument, "no image budgets given");
  const auto split =
      imaging::build_split(recordings, config.channels, config.train_overlap, config.split_fraction, config.preprocess);
  const std::size_t largest = *std::max_element(budgets.begin(), budgets.end());
  if (largest > split.train.size())
    throw Error(ErrorCode::InsufficientImages, "requested M=" + std::to_string(largest) + " training images but only " +
                                                   std::to_string(split.train.size()) + " are available");
  std::vector<EvaluationReport> reports;
  for (auto m : budgets) {
    ExperimentConfig point = config;
    point.image_budget = m;
    reports.push_back(train_on_split(split, point).report);
  }
  return reports;
}

void write_report(const std::filesystem::path& path, const EvaluationReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  for (const auto& [k, v] : report.metadata) out << k << '=' << v << '\n';
  out << kReportColumns << '\n';
  for (const auto& w : report.windows)
    out << w.subject_id << ',' << w.window_start_ns << ',' << detail::format_double(w.true_mps) << ','
        << detail::format_double(w.pred_mps) << '\n';
}

EvaluationReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  EvaluationReport report;
  std::string line;
  bool in_table = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    auto t = detail::trim(line);
    if (t.empty()) continue;
    if (!in_table) {
      if (t == kReportColumns) {
        in_table = true;
        continue;
      }
      auto eq = t.find('=');
      if (eq == std::string_view::npos) throw Error(ErrorCode::MalformedRow, path.string() + ": bad header line", row);
      report.metadata.emplace_back(std::string(t.substr(0, eq)), std::string(t.substr(eq + 1)));
      continue;
    }
    auto f = detail::split(t, ',');
    auto start = f.size() == 4 ? detail::parse_int64(f[1]) : std::nullopt;
    auto truth = f.size() == 4 ? detail::parse_double(f[2]) : std::nullopt;
    auto pred = f.size() == 4 ? detail::parse_double(f[3]) : std::nullopt;
    if (!start || !truth || !pred) throw Error(ErrorCode::MalformedRow, path.string() + ": bad report row", row);
    report.windows.push_back({std::string(f[0]), *start, *truth, *pred});
  }
  if (!in_table) throw Error(ErrorCode::MalformedRow, path.string() + ": missing prediction table");
  report.diverged = report.meta("diverged") == std::optional<std::string>("true");
  fill_rmse(report);
  return report;
}

void write_comparison(const std::filesystem::path& path, std::span<const std::pair<std::string, double>> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << "arm,rmse_mps\n";
  for (const auto& [arm, rmse] : rows) out << arm << ',' << detail::format_double(rmse) << '\n';
}

}  // namespace gaitpipe::pipeline
