#include "gaitpipe/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gaitpipe/error.hpp"
#include "text_util.hpp"

namespace gaitpipe::imaging {

std::string_view to_string(ChannelSet channels) {
  switch (channels) {
    case ChannelSet::Acc: return "ACC";
    case ChannelSet::Gyro: return "GYRO";
    case ChannelSet::Both: return "BOTH";
  }
  return "BOTH";
}

ChannelSet parse_channel_set(std::string_view text) {
  if (text == "ACC" || text == "acc") return ChannelSet::Acc;
  if (text == "GYRO" || text == "gyro") return ChannelSet::Gyro;
  if (text == "BOTH" || text == "both") return ChannelSet::Both;
  throw Error(ErrorCode::InvalidArgument, "channel set must be ACC, GYRO or BOTH, got '" + std::string(text) + "'");
}

alignment::AlignedSeries preprocess(const Recording& recording, const PreprocessConfig& config) {
  const auto filter = dsp::design_lowpass(config.cutoff_hz, recording.sample_rate, config.taps);
  return alignment::align_recording(dsp::filter_recording(filter, recording), config.window_seconds);
}

GaitImage window_to_image(std::span<const alignment::AlignedRow> rows) {
  const std::size_t n = rows.size();
  if (n < kImageRows)
    throw Error(ErrorCode::WindowTooShort,
                "window has " + std::to_string(n) + " rows, need at least " + std::to_string(kImageRows));
  GaitImage image;
  image.start_ns = rows.front().t_ns;
  image.end_ns = rows.back().t_ns;
  // Row i spans [45 i, 45 i + 45) and bin k spans [n k, n k + n) on a common
  // integer axis, so overlaps are exact.
  for (std::size_t k = 0; k < kImageRows; ++k) {
    const std::size_t bin_lo = n * k;
    const std::size_t bin_hi = n * (k + 1);
    double acc[kImageCols] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = bin_lo / kImageRows; i < n && kImageRows * i < bin_hi; ++i) {
      const std::size_t lo = std::max(bin_lo, kImageRows * i);
      const std::size_t hi = std::min(bin_hi, kImageRows * (i + 1));
      if (hi <= lo) continue;
      const double w = static_cast<double>(hi - lo) / static_cast<double>(n);
      acc[0] += w * rows[i].va;
      acc[1] += w * rows[i].ha;
      acc[2] += w * rows[i].vg;
      acc[3] += w * rows[i].hg;
    }
    for (std::size_t c = 0; c < kImageCols; ++c) image.at(k, c) = acc[c];
  }
  return image;
}

void mask_channels(GaitImage& image, ChannelSet channels) {
  if (channels == ChannelSet::Both) return;
  const std::size_t first = channels == ChannelSet::Acc ? 2 : 0;
  for (std::size_t r = 0; r < kImageRows; ++r) {
    image.at(r, first) = 0.0;
    image.at(r, first + 1) = 0.0;
  }
}

bool mask_holds(const GaitImage& image, ChannelSet channels) {
  if (channels == ChannelSet::Both) return true;
  const std::size_t first = channels == ChannelSet::Acc ? 2 : 0;
  for (std::size_t r = 0; r < kImageRows; ++r)
    if (image.at(r, first) != 0.0 || image.at(r, first + 1) != 0.0) return false;
  return true;
}

std::size_t stride_for_overlap(std::size_t window_rows, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(ErrorCode::InvalidOverlap, "window overlap must be in [0, 1)");
  const auto stride = static_cast<std::size_t>(std::llround(static_cast<double>(window_rows) * (1.0 - overlap)));
  return std::max<std::size_t>(stride, 1);
}

std::vector<GaitImage> images_from_series(const alignment::AlignedSeries& series, const Recording& source,
                                          ChannelSet channels, std::size_t window_rows, std::size_t stride_rows,
                                          std::size_t begin_row, std::size_t end_row) {
  std::vector<GaitImage> images;
  end_row = std::min(end_row, series.rows.size());
  const std::span<const alignment::AlignedRow> rows(series.rows);
  for (std::size_t start = begin_row; start + window_rows <= end_row; start += stride_rows) {
    auto image = window_to_image(rows.subspan(start, window_rows));
    image.label = source.true_speed;
    image.subject_id = source.subject_id;
    mask_channels(image, channels);
    images.push_back(std::move(image));
  }
  return images;
}

std::vector<GaitImage> build_dataset(std::span<const Recording> recordings, ChannelSet channels,
                                     double window_overlap, const PreprocessConfig& config) {
  std::vector<GaitImage> images;
  for (const auto& rec : recordings) {
    const auto series = preprocess(rec, config);
    const std::size_t window = alignment::samples_per_interval(rec.sample_rate, config.window_seconds);
    auto part = images_from_series(series, rec, channels, window, stride_for_overlap(window, window_overlap), 0,
                                   series.rows.size());
    std::move(part.begin(), part.end(), std::back_inserter(images));
  }
  if (images.empty()) throw Error(ErrorCode::EmptyDataset, "no images could be built");
  return images;
}

Normalizer fit_normalizer(std::span<const GaitImage> train) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit a normalizer on an empty set");
  Normalizer n;
  const double count = static_cast<double>(train.size() * kImageRows);
  for (std::size_t c = 0; c < kImageCols; ++c) {
    double sum = 0.0;
    bool all_zero = true;
    for (const auto& img : train)
      for (std::size_t r = 0; r < kImageRows; ++r) {
        sum += img.at(r, c);
        all_zero = all_zero && img.at(r, c) == 0.0;
      }
    if (all_zero) {
      n.masked[c] = true;
      continue;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& img : train)
      for (std::size_t r = 0; r < kImageRows; ++r) {
        const double d = img.at(r, c) - mean;
        ss += d * d;
      }
    const double sd = std::sqrt(ss / count);
    if (!(sd > 0.0)) throw Error(ErrorCode::ConstantColumn, "column " + std::to_string(c) + " is constant");
    n.mean[c] = mean;
    n.stddev[c] = sd;
  }
  return n;
}

GaitImage apply_normalizer(const Normalizer& normalizer, GaitImage image) {
  for (std::size_t c = 0; c < kImageCols; ++c) {
    if (normalizer.masked[c]) continue;
    for (std::size_t r = 0; r < kImageRows; ++r)
      image.at(r, c) = (image.at(r, c) - normalizer.mean[c]) / normalizer.stddev[c];
  }
  return image;
}

void apply_normalizer_inplace(const Normalizer& normalizer, std::span<GaitImage> images) {
  for (auto& img : images) img = apply_normalizer(normalizer, std::move(img));
}

std::size_t split_count(std::size_t count, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::InvalidArgument, "split fraction must be in (0, 1]");
  // The small slack keeps e.g. 0.7 * 10 from rounding up to 8.
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count) - 1e-9));
}

DatasetSplit split_by_time(const std::vector<std::vector<GaitImage>>& per_recording, double fraction) {
  DatasetSplit split;
  split.split_fraction = fraction;
  for (std::size_t r = 0; r < per_recording.size(); ++r) {
    const auto& images = per_recording[r];
    if (images.size() < 2)
      throw Error(ErrorCode::TooFewImages, "recording " + std::to_string(r) + " contributes " +
                                               std::to_string(images.size()) + " image(s), need at least 2");
    const std::size_t n_train = split_count(images.size(), fraction);
    split.train.insert(split.train.end(), images.begin(), images.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.eval.insert(split.eval.end(), images.begin() + static_cast<std::ptrdiff_t>(n_train), images.end());
  }
  return split;
}

DatasetSplit build_split(std::span<const Recording> recordings, ChannelSet channels, double train_overlap,
                         double fraction, const PreprocessConfig& config) {
  DatasetSplit split;
  split.split_fraction = fraction;
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    const auto& rec = recordings[r];
    const auto series = preprocess(rec, config);
    const std::size_t window = alignment::samples_per_interval(rec.sample_rate, config.window_seconds);
    const std::size_t count = series.rows.size() / window;
    if (count < 2)
      throw Error(ErrorCode::TooFewImages, "recording " + std::to_string(r) + " (" + rec.subject_id +
                                               ") yields " + std::to_string(count) + " window(s), need at least 2");
    const std::size_t boundary = split_count(count, fraction) * window;
    auto train = images_from_series(series, rec, channels, window, stride_for_overlap(window, train_overlap), 0,
                                    boundary);
    auto eval = images_from_series(series, rec, channels, window, window, boundary, series.rows.size());
    std::move(train.begin(), train.end(), std::back_inserter(split.train));
    std::move(eval.begin(), eval.end(), std::back_inserter(split.eval));
  }
  if (split.train.empty()) throw Error(ErrorCode::EmptyDataset, "no training images");
  return split;
}

namespace {

constexpr std::string_view kStoreMagic = "gaitpipe-images v1";

std::string join(const std::array<double, kImageCols>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += detail::format_double(values[i]);
  }
  return out;
}

std::array<double, kImageCols> parse_four(std::string_view text) {
  auto fields = detail::split(text, ',');
  if (fields.size() != kImageCols) throw Error(ErrorCode::CorruptImageStore, "expected 4 normalizer values");
  std::array<double, kImageCols> out{};
  for (std::size_t i = 0; i < kImageCols; ++i) {
    auto v = detail::parse_double(fields[i]);
    if (!v) throw Error(ErrorCode::CorruptImageStore, "bad normalizer value");
    out[i] = *v;
  }
  return out;
}

}  // namespace

void write_image_store(const std::filesystem::path& path, const ImageStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << kStoreMagic << '\n';
  out << "count=" << store.images.size() << '\n';
  out << "rows=" << kImageRows << '\n';
  out << "cols=" << kImageCols << '\n';
  out << "channels=" << to_string(store.channels) << '\n';
  out << "normalizer_mean=" << join(store.normalizer.mean) << '\n';
  out << "normalizer_std=" << join(store.normalizer.stddev) << '\n';
  out << "normalizer_masked=";
  for (std::size_t c = 0; c < kImageCols; ++c) out << (c ? "," : "") << (store.normalizer.masked[c] ? 1 : 0);
  out << '\n';
  for (const auto& img : store.images) {
    out << img.subject_id << ',' << (img.label ? detail::format_double(*img.label) : "none") << ',' << img.start_ns
        << ',' << img.end_ns;
    for (double v : img.pixels) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

ImageStore read_image_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kStoreMagic)
    throw Error(ErrorCode::CorruptImageStore, path.string() + ": missing header");

  ImageStore store;
  std::optional<std::size_t> count;
  auto header_value = [&](std::string_view key) -> std::string {
    if (!std::getline(in, line)) throw Error(ErrorCode::CorruptImageStore, path.string() + ": truncated header");
    auto t = detail::trim(line);
    if (!t.starts_with(key) || t.size() <= key.size() || t[key.size()] != '=')
      throw Error(ErrorCode::CorruptImageStore, path.string() + ": expected " + std::string(key));
    return std::string(t.substr(key.size() + 1));
  };
  auto parsed_count = detail::parse_int64(header_value("count"));
  if (!parsed_count || *parsed_count < 0) throw Error(ErrorCode::CorruptImageStore, "bad count");
  count = static_cast<std::size_t>(*parsed_count);
  if (header_value("rows") != std::to_string(kImageRows) || header_value("cols") != std::to_string(kImageCols))
    throw Error(ErrorCode::CorruptImageStore, path.string() + ": image shape must be 45x4");
  try {
    store.channels = parse_channel_set(header_value("channels"));
  } catch (const Error&) {
    throw Error(ErrorCode::CorruptImageStore, path.string() + ": bad channel set");
  }
  store.normalizer.mean = parse_four(header_value("normalizer_mean"));
  store.normalizer.stddev = parse_four(header_value("normalizer_std"));
  const auto masked = parse_four(header_value("normalizer_masked"));
  for (std::size_t c = 0; c < kImageCols; ++c) store.normalizer.masked[c] = masked[c] != 0.0;

  std::size_t row = 0;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (t.empty()) continue;
    ++row;
    auto fields = detail::split(t, ',');
    if (fields.size() != 4 + kImagePixels)
      throw Error(ErrorCode::CorruptImageStore, path.string() + ": wrong field count", row);
    GaitImage img;
    img.subject_id = std::string(fields[0]);
    if (fields[1] != "none") {
      auto label = detail::parse_double(fields[1]);
      if (!label) throw Error(ErrorCode::CorruptImageStore, "bad label", row);
      img.label = *label;
    }
    auto start = detail::parse_int64(fields[2]);
    auto end = detail::parse_int64(fields[3]);
    if (!start || !end) throw Error(ErrorCode::CorruptImageStore, "bad timestamp", row);
    img.start_ns = *start;
    img.end_ns = *end;
    for (std::size_t i = 0; i < kImagePixels; ++i) {
      auto v = detail::parse_double(fields[4 + i]);
      if (!v || !std::isfinite(*v)) throw Error(ErrorCode::CorruptImageStore, "bad pixel", row);
      img.pixels[i] = *v;
    }
    store.images.push_back(std::move(img));
  }
  if (store.images.size() != *count)
    throw Error(ErrorCode::CorruptImageStore, path.string() + ": header count " + std::to_string(*count) +
                                                  " but " + std::to_string(store.images.size()) + " images");
  return store;
}

}  // namespace gaitpipe::imaging
