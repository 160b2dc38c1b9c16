#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaitpipe/data_model.hpp"
#include "gaitpipe/imaging.hpp"
#include "gaitpipe/nn/model_io.hpp"
#include "gaitpipe/nn/train.hpp"

namespace gaitpipe::pipeline {

struct ExperimentConfig {
  imaging::PreprocessConfig preprocess;
  imaging::ChannelSet channels = imaging::ChannelSet::Both;
  double split_fraction = imaging::kTrainFraction;
  double train_overlap = imaging::kDefaultTrainOverlap;
  std::optional<std::size_t> image_budget;  // M; all training images when absent
  nn::TrainConfig train;                    // train.seed also seeds initialization and subsampling
  double dropout = nn::kDropoutRate;
  bool per_subject = false;                 // one model per subject instead of a pooled model

  // Canonical one-line rendering of every field; hashed into reports.
  std::string describe() const;
  std::string hash() const;
};

struct WindowPrediction {
  std::string subject_id;
  std::int64_t window_start_ns = 0;
  double true_mps = 0.0;
  double pred_mps = 0.0;
};

struct EvaluationReport {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::map<std::string, double> subject_rmse;
  double aggregate_rmse = 0.0;
  std::vector<WindowPrediction> windows;
  bool diverged = false;

  std::optional<std::string> meta(const std::string& key) const;
};

struct TrainingOutcome {
  nn::TrainedModel model;
  // Filled instead of `model` in per-subject mode.
  std::vector<std::pair<std::string, nn::TrainedModel>> subject_models;
  EvaluationReport report;
  std::vector<double> loss_history;
  std::size_t train_images_available = 0;
  std::size_t train_images_used = 0;
};

// Aggregate and per-subject RMSE straight from the stored pairs.
void fill_rmse(EvaluationReport& report);

// Appends window/subject counts, the divergence flag and the RMSE figures to the metadata.
void append_summary(EvaluationReport& report);

// Uniform without replacement; returned indices are ascending.
std::vector<std::size_t> subsample_indices(std::size_t available, std::size_t budget, std::uint64_t seed);

// Packs images into an N x 45 x 4 x 1 tensor.
nn::Tensor4 to_tensor(std::span<const imaging::GaitImage> images);

// Predictions for raw (un-normalized) images; the model's normalizer is applied here.
std::vector<double> predict_images(const nn::TrainedModel& model, std::span<const imaging::GaitImage> images);

EvaluationReport evaluate(const nn::TrainedModel& model, std::span<const imaging::GaitImage> eval_images);

// Offline path from an existing split (images un-normalized).
TrainingOutcome train_on_split(const imaging::DatasetSplit& split, const ExperimentConfig& config);

// Offline path: filter, align, window, split, normalize, subsample to M, train, evaluate.
TrainingOutcome run_training(std::span<const Recording> recordings, const ExperimentConfig& config);

struct SpeedEstimate {
  std::int64_t window_start_ns = 0;
  double speed_mps = 0.0;
};

// Online path: one estimate per consecutive non-overlapping 2 s window.
std::vector<SpeedEstimate> run_prediction(const nn::TrainedModel& model, const Recording& recording,
                                          const imaging::PreprocessConfig& preprocess = {});

struct ArmResult {
  std::string arm;
  EvaluationReport report;
};

// ACC, GYRO and BOTH arms with identical seeds; only the channel mask differs.
std::vector<ArmResult> run_ablation(std::span<const Recording> recordings, const ExperimentConfig& config);

// One run per budget on a shared split and evaluation set.
std::vector<EvaluationReport> run_m_sweep(std::span<const Recording> recordings, std::span<const std::size_t> budgets,
                                          const ExperimentConfig& config);

void write_report(const std::filesystem::path& path, const EvaluationReport& report);
EvaluationReport read_report(const std::filesystem::path& path);
void write_comparison(const std::filesystem::path& path, std::span<const std::pair<std::string, double>> rows);

}  // namespace gaitpipe::pipeline
