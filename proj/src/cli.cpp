#include "gaitpipe/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "gaitpipe/alignment.hpp"
#include "gaitpipe/data_model.hpp"
#include "gaitpipe/dsp.hpp"
#include "gaitpipe/imaging.hpp"
#include "gaitpipe/nn/model_io.hpp"
#include "gaitpipe/pipeline.hpp"
#include "gaitpipe/synthgait.hpp"
#include "text_util.hpp"

namespace gaitpipe::cli {

namespace fs = std::filesystem;

namespace {

using detail::format_double;

std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? env : ".";
}

struct PreprocessOpts {
  double rate = kNominalSampleRateHz;
  double cutoff = dsp::kDefaultCutoffHz;
  int taps = dsp::kDefaultTaps;
  double window = imaging::kWindowSeconds;

  void add(CLI::App* app) {
    app->add_option("--rate", rate, "Sampling rate (Hz)")->check(CLI::PositiveNumber);
    app->add_option("--cutoff", cutoff, "Low-pass cutoff (Hz)");
    app->add_option("--taps", taps, "FIR tap count (odd)");
    app->add_option("--window", window, "Window and gravity interval (s)")->check(CLI::PositiveNumber);
  }
  imaging::PreprocessConfig config() const { return {cutoff, taps, window}; }
};

struct ExperimentOpts {
  PreprocessOpts pre;
  std::string channels = "BOTH";
  std::size_t rows = imaging::kImageRows;
  double split = imaging::kTrainFraction;
  double overlap = imaging::kDefaultTrainOverlap;
  int epochs = nn::TrainConfig{}.epochs;
  std::size_t batch = nn::TrainConfig{}.batch_size;
  double lr = nn::AdamConfig{}.learning_rate;
  double dropout = nn::kDropoutRate;
  std::uint64_t seed = nn::TrainConfig{}.seed;
  std::size_t budget = 0;
  bool per_subject = false;

  void add(CLI::App* app, bool with_budget = true) {
    pre.add(app);
    app->add_option("--channels", channels, "Channel set")->check(CLI::IsMember({"ACC", "GYRO", "BOTH"}));
    app->add_option("--rows", rows, "Image rows")->check(CLI::IsMember({imaging::kImageRows}));
    app->add_option("--split", split, "Training fraction of each recording")->check(CLI::Range(0.0, 1.0));
    app->add_option("--overlap", overlap, "Training window overlap")->check(CLI::Range(0.0, 0.99));
    app->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
    app->add_option("--batch", batch, "Mini-batch size")->check(CLI::Range(2, 1 << 20));
    app->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber);
    app->add_option("--dropout", dropout, "Dropout rate")->check(CLI::Range(0.0, 0.95));
    app->add_option("--seed", seed, "Initialization, shuffling and subsampling seed");
    if (with_budget) app->add_option("--M", budget, "Training image budget, 0 for all");
    app->add_flag("--per-subject", per_subject, "Train one model per subject");
  }

  pipeline::ExperimentConfig config() const {
    pipeline::ExperimentConfig c;
    c.preprocess = pre.config();
    c.channels = imaging::parse_channel_set(channels);
    c.split_fraction = split;
    c.train_overlap = overlap;
    if (budget > 0) c.image_budget = budget;
    c.train.epochs = epochs;
    c.train.batch_size = batch;
    c.train.adam.learning_rate = lr;
    c.train.seed = seed;
    c.dropout = dropout;
    c.per_subject = per_subject;
    return c;
  }
};

std::vector<Recording> load_manifest(const std::string& path, double rate) {
  return load_session(parse_manifest(path), rate);
}

Recording load_recording(const std::string& path, double rate) { return parse_imu_csv(path, rate); }

// Writes through `fn` to `path`, or to `fallback` when no path is given.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::MissingFile, "cannot write " + path);
  fn(file);
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::MissingFile, "cannot create directory " + dir + ": " + ec.message());
  return p;
}

fs::path sibling_path(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + "_" + suffix + path.extension().string());
}

int report_divergence(bool diverged, std::ostream& err) {
  if (!diverged) return kExitOk;
  err << "error: training diverged; the last finite checkpoint was written and flagged\n";
  return kExitDiverged;
}

struct Command {
  CLI::App* app;
  std::function<int()> run;
};

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidCutoff:
    case ErrorCode::EvenTapCount:
    case ErrorCode::InvalidOverlap:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    case ErrorCode::Divergence:
      return kExitDiverged;
    default:
      return kExitData;
  }
}

namespace {

std::optional<std::string> first_unknown_flag(CLI::App& app, int argc, const char* const* argv) {
  CLI::App* sub = nullptr;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (!sub) {
      if (!arg.starts_with("-")) sub = app.get_subcommand_no_throw(arg);
      if (!sub && !arg.starts_with("-")) return std::nullopt;  // CLI11 reports unknown subcommands
      continue;
    }
    if (!arg.starts_with("--")) continue;
    const std::string name = arg.substr(0, arg.find('='));
    if (name == "--help" || sub->get_option_no_throw(name) != nullptr) continue;
    return name;
  }
  return std::nullopt;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Walking speed estimation from a single body-worn IMU", "gaitpipe"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  std::vector<Command> commands;

  // synth
  struct {
    std::size_t subjects = 10;
    std::vector<double> speeds_mph{1.0, 1.5, 2.0, 2.5, 3.0};
    double minutes = 5.0;
    double rate = kNominalSampleRateHz;
    double jitter = 0.10;
    double accel_noise = synth::GaitParams{}.accel_noise;
    double gyro_noise = synth::GaitParams{}.gyro_noise;
    std::uint64_t seed = 1;
    std::string out_dir = default_out_dir();
  } synth_opts;
  {
    auto* sub = app.add_subcommand("synth", "Generate a synthetic treadmill cohort and its manifest");
    auto& o = synth_opts;
    sub->add_option("--subjects", o.subjects, "Number of subjects")->check(CLI::Range(1, 99));
    sub->add_option("--speeds", o.speeds_mph, "Treadmill speeds (mph)")->check(CLI::PositiveNumber);
    sub->add_option("--minutes", o.minutes, "Minutes per speed")->check(CLI::PositiveNumber);
    sub->add_option("--rate", o.rate, "Sampling rate (Hz)")->check(CLI::PositiveNumber);
    sub->add_option("--jitter", o.jitter, "Per-subject gait parameter jitter")->check(CLI::Range(0.0, 0.99));
    sub->add_option("--accel-noise", o.accel_noise, "Accelerometer noise sd (m/s^2)")->check(CLI::NonNegativeNumber);
    sub->add_option("--gyro-noise", o.gyro_noise, "Gyroscope noise sd (rad/s)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", o.seed, "Cohort seed");
    sub->add_option("--out-dir", o.out_dir, "Output directory (default from " + std::string(kOutDirEnv) + ")");
    commands.push_back({sub, [&o, &out] {
                          synth::CohortSpec spec;
                          spec.subjects = o.subjects;
                          for (double mph : o.speeds_mph) spec.speeds.push_back(mph_to_mps(mph));
                          spec.minutes_per_speed = o.minutes;
                          spec.sample_rate = o.rate;
                          spec.jitter = o.jitter;
                          spec.base.accel_noise = o.accel_noise;
                          spec.base.gyro_noise = o.gyro_noise;
                          const auto cohort = synth::generate_cohort(spec, o.seed);
                          const auto dir = ensure_dir(o.out_dir);
                          SessionManifest manifest;
                          for (std::size_t i = 0; i < cohort.size(); ++i) {
                            const double mph = o.speeds_mph[i % o.speeds_mph.size()];
                            const std::string name = cohort[i].subject_id + "_" + format_double(mph) + "mph.csv";
                            write_imu_csv(dir / name, cohort[i]);
                            manifest.entries.push_back({name, cohort[i].subject_id, mph, SpeedUnit::Mph});
                          }
                          write_manifest(dir / "manifest.csv", manifest);
                          out << (dir / "manifest.csv").string() << '\n';
                          return kExitOk;
                        }});
  }

  // psd
  struct {
    std::string input, output, channel = "az";
    double rate = kNominalSampleRateHz;
    double segment = dsp::kDefaultPsdWindowSeconds;
    double overlap = dsp::kDefaultPsdOverlap;
  } psd_opts;
  {
    auto* sub = app.add_subcommand("psd", "Welch power spectral density of one IMU channel");
    auto& o = psd_opts;
    sub->add_option("--input", o.input, "IMU CSV")->required();
    sub->add_option("--channel", o.channel, "Channel")->check(CLI::IsMember({"ax", "ay", "az", "gx", "gy", "gz"}));
    sub->add_option("--rate", o.rate, "Sampling rate (Hz)")->check(CLI::PositiveNumber);
    sub->add_option("--segment", o.segment, "Segment length (s)")->check(CLI::PositiveNumber);
    sub->add_option("--overlap", o.overlap, "Segment overlap fraction");
    sub->add_option("--out", o.output, "Output CSV (stdout when empty)");
    commands.push_back({sub, [&o, &out] {
                          const auto rec = load_recording(o.input, o.rate);
                          std::vector<double> x;
                          x.reserve(rec.samples.size());
                          for (const auto& s : rec.samples) {
                            const std::map<std::string, double> ch{{"ax", s.ax}, {"ay", s.ay}, {"az", s.az},
                                                                   {"gx", s.gx}, {"gy", s.gy}, {"gz", s.gz}};
                            x.push_back(ch.at(o.channel));
                          }
                          const auto psd = dsp::welch_psd(x, o.rate, o.segment, o.overlap);
                          emit(o.output, out, [&](std::ostream& os) {
                            os << "freq_hz,power\n";
                            for (std::size_t k = 0; k < psd.freqs.size(); ++k)
                              os << format_double(psd.freqs[k]) << ',' << format_double(psd.power[k]) << '\n';
                          });
                          return kExitOk;
                        }});
  }

  // filter
  struct {
    std::string input, output;
    PreprocessOpts pre;
  } filter_opts;
  {
    auto* sub = app.add_subcommand("filter", "Low-pass filter an IMU CSV, or print the taps without --input");
    auto& o = filter_opts;
    sub->add_option("--input", o.input, "IMU CSV");
    sub->add_option("--rate", o.pre.rate, "Sampling rate (Hz)")->check(CLI::PositiveNumber);
    sub->add_option("--cutoff", o.pre.cutoff, "Cutoff (Hz)");
    sub->add_option("--taps", o.pre.taps, "Tap count (odd)");
    sub->add_option("--out", o.output, "Output CSV (stdout when empty)");
    commands.push_back({sub, [&o, &out] {
                          const auto filter = dsp::design_lowpass(o.pre.cutoff, o.pre.rate, o.pre.taps);
                          if (o.input.empty()) {
                            emit(o.output, out, [&](std::ostream& os) {
                              os << "tap,coefficient\n";
                              for (std::size_t k = 0; k < filter.taps.size(); ++k)
                                os << k << ',' << format_double(filter.taps[k]) << '\n';
                            });
                            return kExitOk;
                          }
                          const auto filtered = dsp::filter_recording(filter, load_recording(o.input, o.pre.rate));
                          emit(o.output, out, [&](std::ostream& os) { write_imu_csv(os, filtered); });
                          return kExitOk;
                        }});
  }

  // align
  struct {
    std::string input, output;
    PreprocessOpts pre;
  } align_opts;
  {
    auto* sub = app.add_subcommand("align", "Filter, then split into vertical and horizontal components");
    auto& o = align_opts;
    sub->add_option("--input", o.input, "IMU CSV")->required();
    o.pre.add(sub);
    sub->add_option("--out", o.output, "Output CSV (stdout when empty)");
    commands.push_back({sub, [&o, &out] {
                          const auto series = imaging::preprocess(load_recording(o.input, o.pre.rate), o.pre.config());
                          emit(o.output, out, [&](std::ostream& os) {
                            os << "t_ns,va,ha,vg,hg\n";
                            for (const auto& r : series.rows)
                              os << r.t_ns << ',' << format_double(r.va) << ',' << format_double(r.ha) << ','
                                 << format_double(r.vg) << ',' << format_double(r.hg) << '\n';
                          });
                          return kExitOk;
                        }});
  }

  // make-images
  struct {
    std::string manifest, out_dir = default_out_dir();
    ExperimentOpts exp;
  } images_opts;
  {
    auto* sub = app.add_subcommand("make-images", "Build the time-split training and evaluation image stores");
    auto& o = images_opts;
    sub->add_option("--manifest", o.manifest, "Session manifest")->required();
    o.exp.pre.add(sub);
    sub->add_option("--channels", o.exp.channels, "Channel set")->check(CLI::IsMember({"ACC", "GYRO", "BOTH"}));
    sub->add_option("--rows", o.exp.rows, "Image rows")->check(CLI::IsMember({imaging::kImageRows}));
    sub->add_option("--split", o.exp.split, "Training fraction of each recording")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--overlap", o.exp.overlap, "Training window overlap")->check(CLI::Range(0.0, 0.99));
    sub->add_option("--out-dir", o.out_dir, "Output directory (default from " + std::string(kOutDirEnv) + ")");
    commands.push_back({sub, [&o, &out] {
                          const auto cfg = o.exp.config();
                          const auto recordings = load_manifest(o.manifest, o.exp.pre.rate);
                          const auto split = imaging::build_split(recordings, cfg.channels, cfg.train_overlap,
                                                                  cfg.split_fraction, cfg.preprocess);
                          const auto normalizer = imaging::fit_normalizer(split.train);
                          const auto dir = ensure_dir(o.out_dir);
                          imaging::write_image_store(dir / "train.images", {cfg.channels, normalizer, split.train});
                          imaging::write_image_store(dir / "eval.images", {cfg.channels, normalizer, split.eval});
                          out << "train_images=" << split.train.size() << "\neval_images=" << split.eval.size()
                              << '\n';
                          return kExitOk;
                        }});
  }

  // train
  struct {
    std::string manifest, train_images, eval_images, model, report, out_dir = default_out_dir();
    ExperimentOpts exp;
  } train_opts;
  {
    auto* sub = app.add_subcommand("train", "Train the speed regressor and evaluate it on the held-out split");
    auto& o = train_opts;
    auto* group = sub->add_option_group("input");
    group->add_option("--manifest", o.manifest, "Session manifest");
    group->add_option("--train-images", o.train_images, "Training image store from make-images");
    group->require_option(1);
    sub->add_option("--eval-images", o.eval_images, "Evaluation image store")->needs("--train-images");
    o.exp.add(sub);
    sub->add_option("--out", o.model, "Model file (default <out-dir>/model.txt)");
    sub->add_option("--report", o.report, "Report file (default <out-dir>/report.txt)");
    sub->add_option("--out-dir", o.out_dir, "Output directory (default from " + std::string(kOutDirEnv) + ")");
    commands.push_back({sub, [&o, &out, &err] {
                          auto cfg = o.exp.config();
                          pipeline::TrainingOutcome outcome;
                          if (!o.manifest.empty()) {
                            outcome = pipeline::run_training(load_manifest(o.manifest, o.exp.pre.rate), cfg);
                          } else {
                            auto train_store = imaging::read_image_store(o.train_images);
                            imaging::DatasetSplit split;
                            split.split_fraction = cfg.split_fraction;
                            split.train = std::move(train_store.images);
                            if (!o.eval_images.empty()) {
                              auto eval_store = imaging::read_image_store(o.eval_images);
                              if (eval_store.channels != train_store.channels)
                                throw Error(ErrorCode::InvalidArgument, "train and eval stores use different channel sets");
                              split.eval = std::move(eval_store.images);
                            }
                            cfg.channels = train_store.channels;
                            outcome = pipeline::train_on_split(split, cfg);
                          }
                          const auto dir = ensure_dir(o.out_dir);
                          const fs::path model_path = o.model.empty() ? dir / "model.txt" : fs::path(o.model);
                          if (cfg.per_subject) {
                            for (const auto& [subject, model] : outcome.subject_models)
                              nn::save_model(sibling_path(model_path, subject), model);
                          } else {
                            nn::save_model(model_path, outcome.model);
                          }
                          const fs::path report_path = o.report.empty() ? dir / "report.txt" : fs::path(o.report);
                          pipeline::write_report(report_path, outcome.report);
                          out << "train_images_used=" << outcome.train_images_used
                              << "\naggregate_rmse_mps=" << format_double(outcome.report.aggregate_rmse) << '\n';
                          return report_divergence(outcome.report.diverged, err);
                        }});
  }

  // predict
  struct {
    std::string model, input, output;
    PreprocessOpts pre;
  } predict_opts;
  {
    auto* sub = app.add_subcommand("predict", "Estimate walking speed every window of a recording");
    auto& o = predict_opts;
    sub->add_option("--model", o.model, "Model file")->required();
    sub->add_option("--input", o.input, "IMU CSV")->required();
    o.pre.add(sub);
    sub->add_option("--out", o.output, "Output CSV (stdout when empty)");
    commands.push_back({sub, [&o, &out] {
                          const auto model = nn::load_model(o.model);
                          const auto est =
                              pipeline::run_prediction(model, load_recording(o.input, o.pre.rate), o.pre.config());
                          emit(o.output, out, [&](std::ostream& os) {
                            os << "window_start_ns,speed_mps\n";
                            for (const auto& e : est) os << e.window_start_ns << ',' << format_double(e.speed_mps) << '\n';
                          });
                          return kExitOk;
                        }});
  }

  // evaluate
  struct {
    std::string model, images, manifest, report, out_dir = default_out_dir();
    PreprocessOpts pre;
    double split = imaging::kTrainFraction;
    double overlap = imaging::kDefaultTrainOverlap;
  } eval_opts;
  {
    auto* sub = app.add_subcommand("evaluate", "Score a saved model on labelled evaluation windows");
    auto& o = eval_opts;
    sub->add_option("--model", o.model, "Model file")->required();
    auto* group = sub->add_option_group("input");
    group->add_option("--images", o.images, "Evaluation image store");
    group->add_option("--manifest", o.manifest, "Session manifest; its held-out split is scored");
    group->require_option(1);
    o.pre.add(sub);
    sub->add_option("--split", o.split, "Training fraction of each recording")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--report", o.report, "Report file (default <out-dir>/evaluation.txt)");
    sub->add_option("--out-dir", o.out_dir, "Output directory (default from " + std::string(kOutDirEnv) + ")");
    commands.push_back({sub, [&o, &out] {
                          const auto model = nn::load_model(o.model);
                          std::vector<imaging::GaitImage> images;
                          if (!o.images.empty()) {
                            auto store = imaging::read_image_store(o.images);
                            if (store.channels != model.channels)
                              throw Error(ErrorCode::InvalidArgument, "image store channels differ from the model's");
                            images = std::move(store.images);
                          } else {
                            images = imaging::build_split(load_manifest(o.manifest, o.pre.rate), model.channels,
                                                          o.overlap, o.split, o.pre.config())
                                         .eval;
                          }
                          auto report = pipeline::evaluate(model, images);
                          report.metadata.emplace_back("channels", std::string(imaging::to_string(model.channels)));
                          report.metadata.emplace_back("model", o.model);
                          pipeline::append_summary(report);
                          const auto dir = ensure_dir(o.out_dir);
                          pipeline::write_report(o.report.empty() ? dir / "evaluation.txt" : fs::path(o.report),
                                                 report);
                          out << "aggregate_rmse_mps=" << format_double(report.aggregate_rmse) << '\n';
                          for (const auto& [subject, rmse] : report.subject_rmse)
                            out << "subject_rmse_mps." << subject << '=' << format_double(rmse) << '\n';
                          return kExitOk;
                        }});
  }

  // ablate
  struct {
    std::string manifest, out_dir = default_out_dir();
    ExperimentOpts exp;
  } ablate_opts;
  {
    auto* sub = app.add_subcommand("ablate", "Compare ACC, GYRO and BOTH channel sets under shared seeds");
    auto& o = ablate_opts;
    sub->add_option("--manifest", o.manifest, "Session manifest")->required();
    o.exp.add(sub);
    sub->add_option("--out-dir", o.out_dir, "Output directory (default from " + std::string(kOutDirEnv) + ")");
    commands.push_back({sub, [&o, &out, &err] {
                          const auto arms =
                              pipeline::run_ablation(load_manifest(o.manifest, o.exp.pre.rate), o.exp.config());
                          const auto dir = ensure_dir(o.out_dir);
                          std::vector<std::pair<std::string, double>> rows;
                          bool diverged = false;
                          for (const auto& arm : arms) {
                            pipeline::write_report(dir / ("report_" + arm.arm + ".txt"), arm.report);
                            rows.emplace_back(arm.arm, arm.report.aggregate_rmse);
                            diverged = diverged || arm.report.diverged;
                          }
                          pipeline::write_comparison(dir / "comparison.csv", rows);
                          out << "arm,rmse_mps\n";
                          for (const auto& [arm, rmse] : rows) out << arm << ',' << format_double(rmse) << '\n';
                          return report_divergence(diverged, err);
                        }});
  }

  // sweep-m
  struct {
    std::string manifest, out_dir = default_out_dir();
    std::vector<std::size_t> budgets{1000, 2000, 4000, 8000};
    ExperimentOpts exp;
  } sweep_opts;
  {
    auto* sub = app.add_subcommand("sweep-m", "Train once per training-image budget on a shared split");
    auto& o = sweep_opts;
    sub->add_option("--manifest", o.manifest, "Session manifest")->required();
    sub->add_option("--budgets", o.budgets, "Training image budgets M")->check(CLI::PositiveNumber);
    o.exp.add(sub, false);
    sub->add_option("--out-dir", o.out_dir, "Output directory (default from " + std::string(kOutDirEnv) + ")");
    commands.push_back({sub, [&o, &out, &err] {
                          const auto reports = pipeline::run_m_sweep(load_manifest(o.manifest, o.exp.pre.rate),
                                                                     o.budgets, o.exp.config());
                          const auto dir = ensure_dir(o.out_dir);
                          bool diverged = false;
                          std::ostringstream table;
                          table << "M,rmse_mps\n";
                          for (std::size_t i = 0; i < reports.size(); ++i) {
                            pipeline::write_report(dir / ("report_M" + std::to_string(o.budgets[i]) + ".txt"),
                                                   reports[i]);
                            table << o.budgets[i] << ',' << format_double(reports[i].aggregate_rmse) << '\n';
                            diverged = diverged || reports[i].diverged;
                          }
                          emit((dir / "sweep_m.csv").string(), out, [&](std::ostream& os) { os << table.str(); });
                          out << table.str();
                          return report_divergence(diverged, err);
                        }});
  }

  // Reported ahead of missing-option errors so the offending flag is named.
  if (const auto unknown = first_unknown_flag(app, argc, argv)) {
    err << "The following argument was not expected: " << *unknown << "\nRun with --help for more information.\n";
    return kExitUsage;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    err << "# gaitpipe " << cmd.app->get_name() << " resolved config\n" << cmd.app->config_to_str(true, false);
    try {
      return cmd.run();
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return exit_code_for(e.code());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitUsage;
}

int dispatch(int argc, char** argv) { return dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace gaitpipe::cli
