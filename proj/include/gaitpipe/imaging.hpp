#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitpipe/alignment.hpp"
#include "gaitpipe/data_model.hpp"
#include "gaitpipe/dsp.hpp"

namespace gaitpipe::imaging {

inline constexpr std::size_t kImageRows = 45;
inline constexpr std::size_t kImageCols = 4;  // va, ha, vg, hg
inline constexpr std::size_t kImagePixels = kImageRows * kImageCols;
inline constexpr double kWindowSeconds = 2.0;
inline constexpr double kTrainFraction = 0.7;
inline constexpr double kDefaultTrainOverlap = 0.5;

enum class ChannelSet { Acc, Gyro, Both };

std::string_view to_string(ChannelSet channels);
ChannelSet parse_channel_set(std::string_view text);

struct GaitImage {
  std::array<double, kImagePixels> pixels{};  // row-major, 45 x 4
  std::optional<double> label;                // m/s
  std::string subject_id;
  std::int64_t start_ns = 0;
  std::int64_t end_ns = 0;  // timestamp of the last row in the source window

  double& at(std::size_t row, std::size_t col) { return pixels[row * kImageCols + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels[row * kImageCols + col]; }
};

struct Normalizer {
  std::array<double, kImageCols> mean{0.0, 0.0, 0.0, 0.0};
  std::array<double, kImageCols> stddev{1.0, 1.0, 1.0, 1.0};
  std::array<bool, kImageCols> masked{false, false, false, false};
};

struct DatasetSplit {
  std::vector<GaitImage> train;
  std::vector<GaitImage> eval;
  double split_fraction = kTrainFraction;
};

struct PreprocessConfig {
  double cutoff_hz = dsp::kDefaultCutoffHz;
  int taps = dsp::kDefaultTaps;
  double window_seconds = kWindowSeconds;
};

// Filter then align: the stages shared by the offline and online paths.
alignment::AlignedSeries preprocess(const Recording& recording, const PreprocessConfig& config = {});

// Area-weighted resampling of the window's rows onto 45 equal time bins.
// Label and subject are left for the caller.
GaitImage window_to_image(std::span<const alignment::AlignedRow> rows);

void mask_channels(GaitImage& image, ChannelSet channels);
// True when every column outside `channels` is exactly zero.
bool mask_holds(const GaitImage& image, ChannelSet channels);

// Windows of `window_rows` rows at `stride_rows`, restricted to rows [begin_row, end_row).
std::vector<GaitImage> images_from_series(const alignment::AlignedSeries& series, const Recording& source,
                                          ChannelSet channels, std::size_t window_rows, std::size_t stride_rows,
                                          std::size_t begin_row, std::size_t end_row);

std::size_t stride_for_overlap(std::size_t window_rows, double overlap);

std::vector<GaitImage> build_dataset(std::span<const Recording> recordings, ChannelSet channels,
                                     double window_overlap, const PreprocessConfig& config = {});

Normalizer fit_normalizer(std::span<const GaitImage> train);
GaitImage apply_normalizer(const Normalizer& normalizer, GaitImage image);
void apply_normalizer_inplace(const Normalizer& normalizer, std::span<GaitImage> images);

// Non-overlapping images per recording, in time order: the first
// ceil(fraction * count) of each recording go to train.
DatasetSplit split_by_time(const std::vector<std::vector<GaitImage>>& per_recording,
                           double fraction = kTrainFraction);

// Train/eval construction with training-window overlap. The split point of each
// recording is fixed by the non-overlapping windows; overlapped training windows
// stay entirely before it and evaluation windows never overlap.
DatasetSplit build_split(std::span<const Recording> recordings, ChannelSet channels, double train_overlap,
                         double fraction = kTrainFraction, const PreprocessConfig& config = {});

std::size_t split_count(std::size_t count, double fraction);

struct ImageStore {
  ChannelSet channels = ChannelSet::Both;
  Normalizer normalizer;
  std::vector<GaitImage> images;
};

// Pixels are stored un-normalized; the header carries the training normalizer.
void write_image_store(const std::filesystem::path& path, const ImageStore& store);
ImageStore read_image_store(const std::filesystem::path& path);

}  // namespace gaitpipe::imaging
