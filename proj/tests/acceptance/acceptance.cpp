// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaitpipe/alignment.hpp"
#include "gaitpipe/dsp.hpp"
#include "gaitpipe/imaging.hpp"
#include "gaitpipe/nn/model_io.hpp"
#include "gaitpipe/nn/network.hpp"
#include "gaitpipe/pipeline.hpp"
#include "gaitpipe/synthgait.hpp"
#include "gradcheck.hpp"

using namespace gaitpipe;
using Clock = std::chrono::steady_clock;

namespace {

// Full-cohort experiments use this many epochs to stay within the runtime
// budget on a single core; the reduced preset uses the library default.
constexpr int kCohortEpochs = 10;

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << what << "  [" << detail << "]"
            << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("gaitpipe_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---- 1: gradients ------------------------------------------------------------

void criterion_gradients() {
  using namespace gaitpipe::nn;
  using testing::random_tensor;
  const auto t0 = Clock::now();
  std::map<std::string, double> worst;

  {
    Conv2d conv(3, 4);
    for (auto* p : {&conv.kernel(), &conv.bias()}) {
      std::mt19937_64 rng(1);
      std::normal_distribution<double> n(0.0, 0.5);
      for (double& v : p->value) v = n(rng);
    }
    worst["conv"] = testing::check_layer(conv, random_tensor({2, 5, 4, 3}, 2), Mode::Train,
                                         {&conv.kernel(), &conv.bias()}, 3)
                        .worst();
  }
  {
    BatchNorm bn(3);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(1.0, 0.3);
    for (double& g : bn.gamma().value) g = n(rng);
    for (double& b : bn.beta().value) b = n(rng) - 1.0;
    worst["batchnorm"] =
        testing::check_layer(bn, random_tensor({4, 3, 2, 3}, 5, 2.0), Mode::Train, {&bn.gamma(), &bn.beta()}, 6)
            .worst();
  }
  {
    // Inputs kept at least 0.05 from the kink.
    Relu relu;
    auto x = random_tensor({2, 4, 3, 2}, 7);
    for (double& v : x.values()) v = v >= 0 ? v + 0.05 : v - 0.05;
    worst["relu"] = testing::check_layer(relu, x, Mode::Train, {}, 8).worst();
  }
  {
    // Distinct values 0.01 apart so no window changes its winner under the step.
    MaxPool pool;
    Tensor4 x({2, 5, 4, 3});
    std::vector<double> levels(x.size());
    std::iota(levels.begin(), levels.end(), 0.0);
    std::shuffle(levels.begin(), levels.end(), std::mt19937_64(9));
    for (std::size_t i = 0; i < x.size(); ++i) x.values()[i] = 0.01 * levels[i];
    worst["maxpool"] = testing::check_layer(pool, x, Mode::Train, {}, 10).worst();
  }
  {
    Dropout off(kDropoutRate, 11);
    worst["dropout-off"] = testing::check_layer(off, random_tensor({2, 3, 2, 4}, 12), Mode::Infer, {}, 13).worst();
  }
  {
    Dense fc(12, 1);
    std::mt19937_64 rng(14);
    std::normal_distribution<double> n(0.0, 0.5);
    for (double& v : fc.weight().value) v = n(rng);
    fc.bias().value[0] = 0.3;
    worst["fc"] = testing::check_layer(fc, random_tensor({3, 2, 2, 3}, 15), Mode::Train, {&fc.weight(), &fc.bias()}, 16)
                      .worst();
  }

  bool pass = true;
  std::string detail;
  for (const auto& [name, w] : worst) {
    pass = pass && w <= 1e-3;
    detail += name + "=" + fmt(w, 2) + " ";
  }
  auto net = make_speed_network(5);
  const auto rep = testing::check_network(net, random_tensor({3, 45, 4, 1}, 6), {0.5, 1.0, 1.5}, 400, 7);
  pass = pass && rep.worst() <= 1e-2;
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 60.0;
  detail += "network=" + fmt(rep.worst(), 2) + " over " + std::to_string(rep.checked) + " elements (" +
            std::to_string(rep.kinks) + " kink-straddling skipped), " + fmt(elapsed, 3) + " s";
  report(1, pass, "layer gradients within 1e-3, whole network within 1e-2, eps 1e-4, < 1 min", detail);
}

// ---- 2: rotation invariance ----------------------------------------------------

void criterion_rotation() {
  const auto t0 = Clock::now();
  synth::GaitParams p;
  p.speed = 1.2;
  p.accel_noise = 0.0;
  p.gyro_noise = 0.0;
  p.orientation = synth::Rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  const auto base_rec = synth::generate_recording(p, 10.0, 100.0, 3);
  const auto base = imaging::preprocess(base_rec);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto r = synth::random_rotation(1000 + k);
    auto rec = base_rec;
    for (auto& s : rec.samples) {
      const auto a = synth::rotate(r, {s.ax, s.ay, s.az});
      const auto g = synth::rotate(r, {s.gx, s.gy, s.gz});
      s.ax = a.x, s.ay = a.y, s.az = a.z;
      s.gx = g.x, s.gy = g.y, s.gz = g.z;
    }
    const auto out = imaging::preprocess(rec);
    if (out.rows.size() != base.rows.size()) {
      worst = INFINITY;
      break;
    }
    for (std::size_t i = 0; i < out.rows.size(); ++i)
      worst = std::max({worst, std::abs(out.rows[i].va - base.rows[i].va), std::abs(out.rows[i].ha - base.rows[i].ha),
                        std::abs(out.rows[i].vg - base.rows[i].vg), std::abs(out.rows[i].hg - base.rows[i].hg)});
  }
  const double elapsed = seconds_since(t0);
  report(2, worst < 1e-9 && elapsed < 60.0, "100 rotations leave the aligned series unchanged within 1e-9, < 1 min",
         "max deviation " + fmt(worst, 3) + ", " + fmt(elapsed, 3) + " s");
}

// ---- 3: filter and PSD ---------------------------------------------------------

void criterion_filter() {
  const auto t0 = Clock::now();
  const auto f = dsp::design_lowpass(15.0, 100.0, 65);
  const double g0 = dsp::magnitude_response(f, 0.0), g5 = dsp::magnitude_response(f, 5.0),
               g30 = dsp::magnitude_response(f, 30.0);
  std::vector<double> sine(2000);
  for (std::size_t i = 0; i < sine.size(); ++i) sine[i] = std::sin(2.0 * std::numbers::pi * 10.0 * i / 100.0);
  const auto psd = dsp::welch_psd(sine, 100.0);
  const auto peak = static_cast<std::size_t>(std::max_element(psd.power.begin(), psd.power.end()) - psd.power.begin());
  const double elapsed = seconds_since(t0);
  const bool pass =
      g5 >= 0.99 && g30 <= 0.05 && std::abs(g0 - 1.0) <= 1e-6 && std::abs(psd.freqs[peak] - 10.0) < 1e-9 && elapsed < 10.0;
  report(3, pass, "gain >= 0.99 at 5 Hz, <= 0.05 at 30 Hz, DC 1 +- 1e-6, 10 Hz sine peaks at 10 Hz, < 10 s",
         "DC " + fmt(g0, 12) + ", 5 Hz " + fmt(g5, 6) + ", 30 Hz " + fmt(g30, 4) + ", peak " + fmt(psd.freqs[peak]) +
             " Hz, " + fmt(elapsed, 3) + " s");
}

// ---- 4: architecture -----------------------------------------------------------

void criterion_shapes() {
  using nn::Shape;
  bool pass = true;
  std::string detail;
  try {
    const auto net = nn::make_speed_network(1);
    const auto chain = net.shape_chain();
    const std::pair<std::size_t, Shape> expected[] = {
        {3, {1, 44, 3, 16}}, {7, {1, 43, 2, 32}}, {11, {1, 42, 1, 48}}, {14, {1, 42, 1, 64}}, {16, {1, 1, 1, 1}}};
    pass = chain.size() == 17;
    for (const auto& [at, shape] : expected) pass = pass && chain.size() > at && chain[at] == shape;
    const auto& fc = std::get<nn::Dense>(net.layers().back());
    pass = pass && fc.in_features() == 2688 && fc.out_features() == 1 && net.input_shape() == Shape{1, 45, 4, 1};
    std::size_t convs = 0, pools = 0, norms = 0;
    for (const auto& l : net.layers()) {
      convs += std::holds_alternative<nn::Conv2d>(l);
      pools += std::holds_alternative<nn::MaxPool>(l);
      norms += std::holds_alternative<nn::BatchNorm>(l);
    }
    pass = pass && convs == 4 && pools == 3 && norms == 4;
    detail = "45x4x1";
    for (std::size_t at : {3, 7, 11, 14}) detail += " -> " + std::to_string(chain[at].h) + "x" + std::to_string(chain[at].w) + "x" + std::to_string(chain[at].c);
    detail += " -> FC(" + std::to_string(fc.in_features()) + "->1), " + std::to_string(net.parameter_count()) + " parameters";
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  report(4, pass, "shape chain 45x4x1 -> 44x3x16 -> 43x2x32 -> 42x1x48 -> 42x1x64 -> FC(2688->1)", detail);
}

// ---- shared cohorts ------------------------------------------------------------

std::vector<Recording> protocol_cohort() {
  synth::CohortSpec spec;
  spec.subjects = 10;
  spec.speeds = synth::protocol_speeds();
  spec.minutes_per_speed = 5.0;
  return synth::generate_cohort(spec, 1);
}

std::vector<Recording> reduced_cohort() {
  synth::CohortSpec spec;
  spec.subjects = 3;
  spec.speeds = {mph_to_mps(1.0), mph_to_mps(2.0), mph_to_mps(3.0)};
  spec.minutes_per_speed = 2.0;
  return synth::generate_cohort(spec, 1);
}

pipeline::ExperimentConfig cohort_config(std::uint64_t seed) {
  pipeline::ExperimentConfig c;
  c.train.epochs = kCohortEpochs;
  c.train.seed = seed;
  return c;
}

// ---- 5: end-to-end -------------------------------------------------------------

pipeline::TrainingOutcome criterion_end_to_end(const std::vector<Recording>& cohort) {
  auto t0 = Clock::now();
  auto full = pipeline::run_training(cohort, cohort_config(1));
  const double full_s = seconds_since(t0);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [s, r] : full.report.subject_rmse) lo = std::min(lo, r), hi = std::max(hi, r);

  t0 = Clock::now();
  const auto reduced_recs = reduced_cohort();
  const auto reduced = pipeline::run_training(reduced_recs, pipeline::ExperimentConfig{});
  const double reduced_s = seconds_since(t0);

  const bool pass = full.report.aggregate_rmse <= 0.20 && hi - lo <= 0.10 && full_s < 1800.0 &&
                    reduced.report.aggregate_rmse <= 0.25 && reduced_s < 300.0 && !full.report.diverged &&
                    !reduced.report.diverged;
  report(5, pass,
         "10x5x5 min cohort RMSE <= 0.20 m/s, subject spread <= 0.10, < 30 min; 3x3x2 min preset RMSE <= 0.25, < 5 min",
         "cohort RMSE " + fmt(full.report.aggregate_rmse) + " over " + std::to_string(full.report.windows.size()) +
             " windows, spread " + fmt(hi - lo) + " (" + fmt(lo) + ".." + fmt(hi) + "), " +
             std::to_string(kCohortEpochs) + " epochs, " + fmt(full_s, 4) + " s; preset RMSE " +
             fmt(reduced.report.aggregate_rmse) + ", " + std::to_string(pipeline::ExperimentConfig{}.train.epochs) +
             " epochs, " + fmt(reduced_s, 4) + " s");
  return full;
}

// ---- 6: ablation ---------------------------------------------------------------

void criterion_ablation(const std::vector<Recording>& cohort) {
  int held = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto arms = pipeline::run_ablation(cohort, cohort_config(seed));
    std::map<std::string, double> rmse;
    for (const auto& a : arms) rmse[a.arm] = a.report.aggregate_rmse;
    const bool ok = rmse["BOTH"] <= rmse["ACC"] && rmse["BOTH"] <= rmse["GYRO"];
    held += ok;
    detail += "seed " + std::to_string(seed) + ": ACC " + fmt(rmse["ACC"]) + " GYRO " + fmt(rmse["GYRO"]) + " BOTH " +
              fmt(rmse["BOTH"]) + (ok ? "" : " (reversed)") + "; ";
    std::cout << "  ablation " << detail.substr(detail.rfind("seed")) << std::endl;
  }
  report(6, held >= 4, "RMSE(BOTH) <= RMSE(ACC) and <= RMSE(GYRO) on >= 4 of 5 seeds",
         std::to_string(held) + "/5 seeds; " + detail);
}

// ---- 7: M-sweep ----------------------------------------------------------------

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = static_cast<double>(k);
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

void criterion_sweep(const std::vector<Recording>& cohort) {
  const std::vector<std::size_t> budgets{1000, 2000, 4000, 8000};
  const auto reports = pipeline::run_m_sweep(cohort, budgets, cohort_config(1));
  std::vector<double> m, rmse;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    m.push_back(static_cast<double>(budgets[i]));
    rmse.push_back(reports[i].aggregate_rmse);
  }
  const double rho = spearman(m, rmse);
  // Improvement per doubling; the first step has no predecessor and counts as
  // non-increasing, each later step must not exceed the one before it.
  std::vector<double> gain;
  for (std::size_t i = 1; i < rmse.size(); ++i) gain.push_back(rmse[i - 1] - rmse[i]);
  int non_increasing = 1;
  for (std::size_t i = 1; i < gain.size(); ++i) non_increasing += gain[i] <= gain[i - 1];
  const bool pass = rho <= -0.8 && rmse.back() < rmse.front() && non_increasing >= 2;
  std::string detail = "RMSE";
  for (std::size_t i = 0; i < rmse.size(); ++i) detail += " M=" + std::to_string(budgets[i]) + ":" + fmt(rmse[i]);
  detail += "; Spearman " + fmt(rho) + "; gains";
  for (double g : gain) detail += " " + fmt(g, 3);
  detail += "; non-increasing steps " + std::to_string(non_increasing) + "/3 (" + std::to_string(non_increasing - 1) +
            "/2 strict comparisons)";
  report(7, pass, "Spearman(M, RMSE) <= -0.8, RMSE(8000) < RMSE(1000), diminishing gains in >= 2 of 3 steps", detail);
}

// ---- 8: determinism ------------------------------------------------------------

void criterion_determinism(const std::vector<Recording>& reduced) {
  const auto dir = scratch_dir();
  pipeline::ExperimentConfig c;
  c.train.epochs = 5;
  c.train.seed = 7;
  std::vector<std::string> models, reports;
  nn::TrainedModel last;
  for (int run = 0; run < 2; ++run) {
    const auto out = pipeline::run_training(reduced, c);
    const auto mp = dir / ("model" + std::to_string(run) + ".txt");
    const auto rp = dir / ("report" + std::to_string(run) + ".txt");
    nn::save_model(mp, out.model);
    pipeline::write_report(rp, out.report);
    models.push_back(slurp(mp));
    reports.push_back(slurp(rp));
    last = out.model;
  }
  const auto loaded = nn::load_model(dir / "model1.txt");
  const auto split = imaging::build_split(reduced, imaging::ChannelSet::Both, 0.5);
  const auto a = pipeline::predict_images(last, split.eval), b = pipeline::predict_images(loaded, split.eval);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  std::filesystem::remove_all(dir);
  const bool pass = models[0] == models[1] && reports[0] == reports[1] && worst <= 1e-9 && !a.empty();
  report(8, pass, "same seed gives byte-identical model and report; save/load predictions within 1e-9",
         std::string("models ") + (models[0] == models[1] ? "identical" : "differ") + ", reports " +
             (reports[0] == reports[1] ? "identical" : "differ") + ", round-trip max deviation " + fmt(worst, 3) +
             " over " + std::to_string(a.size()) + " images");
}

// ---- 9: leakage ----------------------------------------------------------------

void criterion_leakage(const std::vector<Recording>& cohort, const pipeline::TrainingOutcome& trained) {
  const auto config = cohort_config(1);
  const auto split = imaging::build_split(cohort, config.channels, config.train_overlap, config.split_fraction);
  // Subject and speed identify a recording in the protocol cohort.
  std::map<std::pair<std::string, double>, std::vector<std::pair<std::int64_t, std::int64_t>>> spans;
  for (const auto& img : split.train) spans[{img.subject_id, *img.label}].emplace_back(img.start_ns, img.end_ns);
  std::size_t overlaps = 0;
  for (const auto& img : split.eval)
    for (const auto& [s, e] : spans[{img.subject_id, *img.label}])
      if (img.start_ns <= e && s <= img.end_ns) ++overlaps;

  const auto refit = imaging::fit_normalizer(split.train);
  const auto& used = trained.model.normalizer;
  bool same = true;
  for (std::size_t c = 0; c < imaging::kImageCols; ++c)
    same = same && used.mean[c] == refit.mean[c] && used.stddev[c] == refit.stddev[c] && used.masked[c] == refit.masked[c];
  const bool eval_matches = trained.report.windows.size() == split.eval.size();
  report(9, overlaps == 0 && same && eval_matches,
         "no evaluation window overlaps a training window; normalizer equals a refit on training images",
         std::to_string(overlaps) + " overlaps among " + std::to_string(split.eval.size()) + " eval x " +
             std::to_string(split.train.size()) + " train windows; normalizer " + (same ? "matches" : "differs"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion_gradients();
  criterion_rotation();
  criterion_filter();
  criterion_shapes();

  const auto cohort = protocol_cohort();
  const auto trained = criterion_end_to_end(cohort);
  criterion_ablation(cohort);
  criterion_sweep(cohort);
  criterion_determinism(reduced_cohort());
  criterion_leakage(cohort, trained);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
            << fmt(seconds_since(t0), 4) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
