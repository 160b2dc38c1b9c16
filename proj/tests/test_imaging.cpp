#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitpipe/error.hpp"
#include "gaitpipe/imaging.hpp"
#include "gaitpipe/synthgait.hpp"
#include "test_support.hpp"

using namespace gaitpipe;
using namespace gaitpipe::imaging;
using alignment::AlignedRow;

namespace {

std::vector<AlignedRow> rows_from(const std::vector<std::array<double, 4>>& values) {
  std::vector<AlignedRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i)
    rows.push_back({static_cast<std::int64_t>(i) * 10'000'000, values[i][0], values[i][1], values[i][2], values[i][3]});
  return rows;
}

// Bin means by direct enumeration: repeat every input row 45 times, then
// average consecutive runs of n copies.
std::vector<std::array<double, 4>> oracle_bins(const std::vector<std::array<double, 4>>& in) {
  std::vector<std::array<double, 4>> expanded;
  for (const auto& v : in)
    for (int r = 0; r < 45; ++r) expanded.push_back(v);
  std::vector<std::array<double, 4>> out(45, {0, 0, 0, 0});
  const std::size_t n = in.size();
  for (std::size_t k = 0; k < 45; ++k) {
    for (std::size_t j = k * n; j < (k + 1) * n; ++j)
      for (int c = 0; c < 4; ++c) out[k][c] += expanded[j][c];
    for (int c = 0; c < 4; ++c) out[k][c] /= static_cast<double>(n);
  }
  return out;
}

Recording labelled(double seconds, double speed, std::uint64_t seed, const std::string& subject = "S01") {
  synth::GaitParams p;
  p.speed = speed;
  auto rec = synth::generate_recording(p, seconds, 100.0, seed);
  rec.subject_id = subject;
  return rec;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a gaitpipe::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("window_to_image") {
  TEST_CASE("constant rows stay constant") {
    const auto img = window_to_image(rows_from(std::vector<std::array<double, 4>>(200, {1, 2, 3, 4})));
    for (std::size_t r = 0; r < kImageRows; ++r)
      for (std::size_t c = 0; c < kImageCols; ++c) CHECK(img.at(r, c) == doctest::Approx(c + 1.0).epsilon(1e-15));
  }

  TEST_CASE("45 rows map to themselves") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<std::array<double, 4>> v(45);
    for (auto& row : v) row = {n(rng), n(rng), n(rng), n(rng)};
    const auto img = window_to_image(rows_from(v));
    for (std::size_t r = 0; r < 45; ++r)
      for (std::size_t c = 0; c < 4; ++c) CHECK(img.at(r, c) == v[r][c]);
  }

  TEST_CASE("ramp bins match direct enumeration") {
    std::vector<std::array<double, 4>> v(200);
    for (std::size_t i = 0; i < 200; ++i) v[i] = {static_cast<double>(i), 0, 0, 0};
    const auto img = window_to_image(rows_from(v));
    const auto ref = oracle_bins(v);
    for (std::size_t k = 0; k < 45; ++k) CHECK(img.at(k, 0) == doctest::Approx(ref[k][0]).epsilon(1e-12));
    CHECK(img.at(0, 0) == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(img.at(44, 0) == doctest::Approx(197.25).epsilon(1e-12));
    // Equal-area bins preserve the window mean.
    double mean = 0;
    for (std::size_t k = 0; k < 45; ++k) mean += img.at(k, 0) / 45.0;
    CHECK(mean == doctest::Approx(99.5).epsilon(1e-12));
  }

  TEST_CASE("odd window lengths against the oracle") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (std::size_t len : {46u, 97u, 199u, 201u, 333u}) {
      std::vector<std::array<double, 4>> v(len);
      for (auto& row : v) row = {n(rng), n(rng), n(rng), n(rng)};
      const auto img = window_to_image(rows_from(v));
      const auto ref = oracle_bins(v);
      for (std::size_t k = 0; k < 45; ++k)
        for (std::size_t c = 0; c < 4; ++c) REQUIRE(img.at(k, c) == doctest::Approx(ref[k][c]).epsilon(1e-12).scale(1e-12));
    }
  }

  TEST_CASE("commutes with per-column affine maps") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<std::array<double, 4>> v(200), w(200);
    const std::array<double, 4> alpha{2.5, -0.3, 7.0, 1e-3}, beta{-4.0, 11.0, 0.25, 3.0};
    for (std::size_t i = 0; i < 200; ++i)
      for (int c = 0; c < 4; ++c) v[i][c] = n(rng), w[i][c] = alpha[c] * v[i][c] + beta[c];
    const auto a = window_to_image(rows_from(v)), b = window_to_image(rows_from(w));
    for (std::size_t r = 0; r < 45; ++r)
      for (std::size_t c = 0; c < 4; ++c) REQUIRE(std::abs(b.at(r, c) - (alpha[c] * a.at(r, c) + beta[c])) <= 1e-9);
  }

  TEST_CASE("too few rows") {
    CHECK(code_of([] { window_to_image(rows_from(std::vector<std::array<double, 4>>(44, {1, 1, 1, 1}))); }) ==
          ErrorCode::WindowTooShort);
  }

  TEST_CASE("timestamps of the source window are kept") {
    const auto img = window_to_image(rows_from(std::vector<std::array<double, 4>>(200, {1, 1, 1, 1})));
    CHECK(img.start_ns == 0);
    CHECK(img.end_ns == 1'990'000'000);
  }
}

TEST_SUITE("datasets") {
  TEST_CASE("image counts for a 10 s recording") {
    const std::vector<Recording> recs{labelled(10.0, 1.2, 5)};
    CHECK(build_dataset(recs, ChannelSet::Both, 0.0).size() == 5);
    CHECK(build_dataset(recs, ChannelSet::Both, 0.5).size() == 9);
    for (const auto& img : build_dataset(recs, ChannelSet::Both, 0.5)) {
      CHECK(*img.label == 1.2);
      CHECK(img.subject_id == "S01");
    }
  }

  TEST_CASE("non-overlapping count is floor(usable seconds / 2) per recording") {
    const std::vector<Recording> recs{labelled(9.5, 1.0, 1), labelled(13.0, 0.8, 2), labelled(4.0, 1.1, 3)};
    CHECK(build_dataset(recs, ChannelSet::Both, 0.0).size() == 4 + 6 + 2);
  }

  TEST_CASE("ACC and GYRO masks zero the other sensor") {
    const std::vector<Recording> recs{labelled(12.0, 1.0, 7)};
    for (const auto& img : build_dataset(recs, ChannelSet::Acc, 0.5))
      for (std::size_t r = 0; r < 45; ++r) {
        CHECK(img.at(r, 2) == 0.0);
        CHECK(img.at(r, 3) == 0.0);
        CHECK(img.at(r, 0) != 0.0);
      }
    for (const auto& img : build_dataset(recs, ChannelSet::Gyro, 0.5))
      for (std::size_t r = 0; r < 45; ++r) {
        CHECK(img.at(r, 0) == 0.0);
        CHECK(img.at(r, 1) == 0.0);
        CHECK(img.at(r, 2) != 0.0);
      }
  }

  TEST_CASE("BOTH with gyro zeroed equals ACC image for image") {
    const std::vector<Recording> recs{labelled(12.0, 1.0, 7), labelled(8.0, 0.5, 8, "S02")};
    auto both = build_dataset(recs, ChannelSet::Both, 0.5);
    const auto acc = build_dataset(recs, ChannelSet::Acc, 0.5);
    REQUIRE(both.size() == acc.size());
    for (std::size_t i = 0; i < both.size(); ++i) {
      mask_channels(both[i], ChannelSet::Acc);
      CHECK(both[i].pixels == acc[i].pixels);
      CHECK(both[i].start_ns == acc[i].start_ns);
    }
  }

  TEST_CASE("empty dataset") {
    CHECK(code_of([] { build_dataset(std::vector<Recording>{}, ChannelSet::Both, 0.0); }) == ErrorCode::EmptyDataset);
  }

  TEST_CASE("stride for overlap") {
    CHECK(stride_for_overlap(200, 0.0) == 200);
    CHECK(stride_for_overlap(200, 0.5) == 100);
    CHECK(stride_for_overlap(200, 0.75) == 50);
    CHECK(code_of([] { stride_for_overlap(200, 1.0); }) == ErrorCode::InvalidOverlap);
  }
}

TEST_SUITE("normalizer") {
  TEST_CASE("constant column is rejected") {
    GaitImage img;
    for (std::size_t r = 0; r < 45; ++r) img.at(r, 0) = 5.0, img.at(r, 1) = static_cast<double>(r);
    CHECK(code_of([&] { fit_normalizer(std::vector<GaitImage>{img}); }) == ErrorCode::ConstantColumn);
  }

  TEST_CASE("all-zero columns are masked and untouched") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(3.0, 2.0);
    std::vector<GaitImage> imgs(10);
    for (auto& img : imgs)
      for (std::size_t r = 0; r < 45; ++r) img.at(r, 0) = n(rng), img.at(r, 1) = n(rng);
    const auto norm = fit_normalizer(imgs);
    CHECK_FALSE(norm.masked[0]);
    CHECK(norm.masked[2]);
    CHECK(norm.masked[3]);
    const auto out = apply_normalizer(norm, imgs[0]);
    for (std::size_t r = 0; r < 45; ++r) CHECK(out.at(r, 2) == 0.0);
  }

  TEST_CASE("z-score of the training set") {
    const std::vector<Recording> recs{labelled(30.0, 1.0, 1), labelled(30.0, 1.3, 2)};
    auto imgs = build_dataset(recs, ChannelSet::Both, 0.5);
    const auto norm = fit_normalizer(imgs);
    apply_normalizer_inplace(norm, imgs);
    for (std::size_t c = 0; c < 4; ++c) {
      double sum = 0, sq = 0, count = 0;
      for (const auto& img : imgs)
        for (std::size_t r = 0; r < 45; ++r) sum += img.at(r, c), sq += img.at(r, c) * img.at(r, c), ++count;
      const double mean = sum / count;
      CHECK(std::abs(mean) <= 1e-9);
      CHECK(std::abs(std::sqrt(sq / count - mean * mean) - 1.0) <= 1e-9);
    }
  }

  TEST_CASE("eval values stay in a sane range") {
    const std::vector<Recording> recs{labelled(60.0, 0.7, 1), labelled(60.0, 1.3, 2, "S02")};
    auto split = build_split(recs, ChannelSet::Both, 0.5);
    const auto norm = fit_normalizer(split.train);
    apply_normalizer_inplace(norm, split.eval);
    for (const auto& img : split.eval)
      for (double v : img.pixels) {
        CHECK(std::isfinite(v));
        CHECK(std::abs(v) <= 6.0);
      }
  }
}

TEST_SUITE("splits") {
  std::vector<GaitImage> numbered(std::size_t n, const std::string& subject) {
    std::vector<GaitImage> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i].start_ns = static_cast<std::int64_t>(i), v[i].subject_id = subject;
    return v;
  }

  TEST_CASE("one recording of ten") {
    const auto s = split_by_time({numbered(10, "A")});
    REQUIRE(s.train.size() == 7);
    REQUIRE(s.eval.size() == 3);
    for (const auto& t : s.train)
      for (const auto& e : s.eval) CHECK(t.start_ns < e.start_ns);
  }

  TEST_CASE("two recordings of ten") {
    const auto s = split_by_time({numbered(10, "A"), numbered(10, "B")});
    CHECK(s.train.size() == 14);
    CHECK(s.eval.size() == 6);
    for (const auto& e : s.eval)
      for (const auto& t : s.train)
        if (t.subject_id == e.subject_id) CHECK(t.start_ns < e.start_ns);
  }

  TEST_CASE("ceil rule") {
    CHECK(split_count(10, 0.7) == 7);
    CHECK(split_count(11, 0.7) == 8);
    CHECK(split_count(3, 0.7) == 3);
    CHECK(split_count(2, 0.7) == 2);
    CHECK(split_count(150, 0.7) == 105);
  }

  TEST_CASE("single image") {
    CHECK(code_of([&] { split_by_time({numbered(1, "A")}); }) == ErrorCode::TooFewImages);
  }

  TEST_CASE("overlapped training windows never reach the evaluation span") {
    const std::vector<Recording> recs{labelled(41.0, 1.0, 1), labelled(30.0, 0.6, 2, "S02")};
    for (double overlap : {0.0, 0.5, 0.75}) {
      const auto s = build_split(recs, ChannelSet::Both, overlap);
      for (const auto& e : s.eval)
        for (const auto& t : s.train)
          if (t.subject_id == e.subject_id) REQUIRE(t.end_ns < e.start_ns);
      // Evaluation windows do not overlap each other.
      for (std::size_t i = 1; i < s.eval.size(); ++i)
        if (s.eval[i].subject_id == s.eval[i - 1].subject_id) REQUIRE(s.eval[i - 1].end_ns < s.eval[i].start_ns);
    }
    const auto s = build_split(recs, ChannelSet::Both, 0.0);
    // 20 and 15 windows: ceil(14) + ceil(10.5) train.
    CHECK(s.train.size() == 14 + 11);
    CHECK(s.eval.size() == 6 + 4);
    CHECK(build_split(recs, ChannelSet::Both, 0.5).train.size() == 27 + 21);
  }

  TEST_CASE("a recording with one window") {
    std::vector<Recording> recs{labelled(4.0, 1.0, 1), labelled(4.0, 1.0, 2)};
    recs[1].samples.resize(390);
    CHECK(code_of([&] { build_split(recs, ChannelSet::Both, 0.5); }) == ErrorCode::TooFewImages);
  }
}

TEST_CASE("image store round trip") {
  testing::TempDir dir("img");
  const std::vector<Recording> recs{labelled(12.0, 1.0, 1), labelled(12.0, 0.4, 2, "S02")};
  ImageStore store;
  store.channels = ChannelSet::Gyro;
  store.images = build_dataset(recs, ChannelSet::Gyro, 0.5);
  store.normalizer = fit_normalizer(store.images);
  store.images[3].label.reset();
  write_image_store(dir / "s.images", store);
  const auto back = read_image_store(dir / "s.images");
  CHECK(back.channels == ChannelSet::Gyro);
  CHECK(back.normalizer.mean == store.normalizer.mean);
  CHECK(back.normalizer.stddev == store.normalizer.stddev);
  CHECK(back.normalizer.masked == store.normalizer.masked);
  REQUIRE(back.images.size() == store.images.size());
  for (std::size_t i = 0; i < store.images.size(); ++i) {
    CHECK(back.images[i].pixels == store.images[i].pixels);
    CHECK(back.images[i].label == store.images[i].label);
    CHECK(back.images[i].subject_id == store.images[i].subject_id);
    CHECK(back.images[i].start_ns == store.images[i].start_ns);
    CHECK(back.images[i].end_ns == store.images[i].end_ns);
  }

  auto text = testing::read_text(dir / "s.images");
  testing::write_text(dir / "cut.images", text.substr(0, text.size() / 2));
  CHECK(code_of([&] { read_image_store(dir / "cut.images"); }) == ErrorCode::CorruptImageStore);
}

TEST_CASE("channel set names") {
  CHECK(parse_channel_set("ACC") == ChannelSet::Acc);
  CHECK(parse_channel_set("GYRO") == ChannelSet::Gyro);
  CHECK(parse_channel_set("BOTH") == ChannelSet::Both);
  CHECK(to_string(ChannelSet::Gyro) == "GYRO");
  CHECK_THROWS_AS(parse_channel_set("acc+gyro"), Error);
}
