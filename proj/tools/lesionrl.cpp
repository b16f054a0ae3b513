// lesionrl: data generation, DQN and keypoint-baseline training, evaluation
// and comparison from the command line.
//
// Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "lesionrl/data/dataset.hpp"
#include "lesionrl/data/synth.hpp"
#include "lesionrl/error.hpp"
#include "lesionrl/nn/checkpoint.hpp"
#include "lesionrl/report/csv.hpp"
#include "lesionrl/report/svg.hpp"
#include "lesionrl/rl/dqn.hpp"
#include "lesionrl/rl/eval.hpp"
#include "lesionrl/sdl/keypoint.hpp"

namespace fs = std::filesystem;
using namespace lesionrl;

namespace {

struct RunConfig {
  std::optional<std::uint64_t> seed;
  fs::path data_dir = "data";
  fs::path out_dir = "out";
  bool lenient = false;

  int n_cases = 100;
  data::SynthConfig synth;

  rl::Hyperparameters hyper;
  int train_n = 70;
  int test_n = 30;
  int eval_every = 10;
  int checkpoint_every = 0;
  int epochs = 300;

  int conv_layers = 4;
  int filters = 32;
  int hidden_units = 512;

  fs::path checkpoint;
  fs::path rl_checkpoint;
  fs::path sdl_checkpoint;
  std::string split = "test";
};

std::uint64_t require_seed(const RunConfig& rc, const std::string& command) {
  if (!rc.seed) throw UsageError(command + " requires --seed");
  return *rc.seed;
}

nn::NetworkConfig topology(const RunConfig& rc, nn::NetworkConfig cfg) {
  cfg.conv_layers = rc.conv_layers;
  cfg.filters = rc.filters;
  cfg.hidden_units = rc.hidden_units;
  cfg.validate();
  return cfg;
}

data::DatasetSplit load_split(const RunConfig& rc, std::uint64_t seed) {
  auto cases = data::load_dataset(rc.data_dir, {.strict = !rc.lenient});
  std::cout << "loaded " << cases.size() << " cases from " << rc.data_dir.string() << '\n';
  return data::split_dataset(std::move(cases), rc.train_n, rc.test_n, seed);
}

void write_split(const fs::path& path, const data::DatasetSplit& split) {
  report::write_file(path, [&](std::ostream& out) {
    out << "case_id,subset\n";
    for (const auto& c : split.train) out << c.case_id << ",train\n";
    for (const auto& c : split.test) out << c.case_id << ",test\n";
  });
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_gen_data(const RunConfig& rc) {
  auto cfg = rc.synth;
  cfg.seed = require_seed(rc, "gen-data");
  cfg.validate();
  const auto cases = data::generate_dataset(cfg, rc.n_cases);
  std::vector<data::CaseFiles> files;
  int visits = 0;
  for (const auto& c : cases) {
    files.push_back(data::save_case(c, rc.data_dir));
    for (int i = 0; i < c.gaze_count(); ++i) visits += env::in_lesion(c, i) ? 1 : 0;
  }
  data::write_manifest(rc.data_dir, files, cfg);
  std::cout << "wrote " << cases.size() << " cases (" << cfg.height << "x" << cfg.width << ", "
            << cfg.gaze_length << " gaze points each) to " << rc.data_dir.string() << '\n'
            << "mean in-lesion fixations per case: " << std::fixed << std::setprecision(2)
            << static_cast<double>(visits) / static_cast<double>(cases.size()) << '\n';
  return 0;
}

void plot_training_log(const fs::path& csv, const fs::path& svg) {
  const auto t = report::read_csv(csv);
  report::Axes score{"Episode score", "episode", "score"};
  report::Axes acc{"Localization accuracy", "episode", "accuracy", 0.0, 1.0};
  report::Axes loss{"Mean batch loss", "episode", "L1 loss"};
  report::write_file(svg, [&](std::ostream& out) {
    report::stacked_line_charts(
        out, {{score, {{"score", t.pairs("episode", "score")}}},
              {acc,
               {{"train", t.pairs("episode", "train_acc"), true},
                {"test", t.pairs("episode", "test_acc"), true}}},
              {loss, {{"loss", t.pairs("episode", "mean_batch_loss")}}}});
  });
}

int cmd_train_rl(const RunConfig& rc) {
  auto h = rc.hyper;
  h.seed = require_seed(rc, "train-rl");
  h.validate();
  const auto split = load_split(rc, h.seed);
  fs::create_directories(rc.out_dir);
  write_split(rc.out_dir / "split.csv", split);

  rl::TrainOptions options;
  options.eval_every = rc.eval_every;
  options.network = topology(rc, nn::NetworkConfig::q_network(split.train.front().image.height,
                                                             split.train.front().image.width));
  const auto start = std::chrono::steady_clock::now();
  options.on_episode = [&](const rl::EpisodeRecord& r) {
    if (!r.test_accuracy && !r.train_accuracy) return;
    std::cout << "episode " << std::setw(4) << r.episode << "  eps " << std::fixed
              << std::setprecision(4) << r.epsilon << "  score " << std::setprecision(3) << r.score
              << "  loss " << r.mean_batch_loss << "  train_acc "
              << std::setprecision(2) << r.train_accuracy.value_or(NAN) << "  test_acc "
              << r.test_accuracy.value_or(NAN) << "  (" << std::setprecision(0)
              << elapsed_seconds(start) << " s)" << std::endl;
  };
  options.checkpoint_every = rc.checkpoint_every;
  options.on_checkpoint = [&](int episode, const nn::ParameterStore& params) {
    char name[64];
    std::snprintf(name, sizeof name, "rl_checkpoint_ep%04d.bin", episode);
    nn::save_checkpoint(rc.out_dir / name, {*options.network, h.seed, params});
  };

  const auto result = rl::train(split.train, h, split.test, options);
  nn::save_checkpoint(rc.out_dir / "rl_checkpoint.bin", {result.config, h.seed, result.params});
  const auto log_path = rc.out_dir / "training_log.csv";
  report::write_file(log_path, [&](std::ostream& out) { result.log.write_csv(out); });
  plot_training_log(log_path, rc.out_dir / "learning_curves.svg");

  const auto samples = result.log.test_accuracy_samples();
  std::cout << "trained " << h.episodes << " episodes, " << result.gradient_steps
            << " gradient steps (" << result.skipped_steps << " skipped) in " << std::fixed
            << std::setprecision(1) << elapsed_seconds(start) << " s\n";
  if (!samples.empty()) {
    const std::size_t k = std::min<std::size_t>(10, samples.size());
    double mean = 0.0;
    for (std::size_t i = samples.size() - k; i < samples.size(); ++i) mean += samples[i];
    std::cout << "mean of last " << k << " test accuracy samples: " << std::setprecision(4)
              << mean / static_cast<double>(k) << '\n';
  }
  return 0;
}

int cmd_train_sdl(const RunConfig& rc) {
  sdl::SdlOptions options;
  options.seed = require_seed(rc, "train-sdl");
  options.epochs = rc.epochs;
  options.learning_rate = rc.hyper.learning_rate;
  options.batch = rc.hyper.batch;
  options.eval_every = rc.eval_every;
  const auto split = load_split(rc, options.seed);
  options.network = topology(rc, nn::NetworkConfig::keypoint_network(
                                     split.train.front().image.height,
                                     split.train.front().image.width));
  fs::create_directories(rc.out_dir);
  write_split(rc.out_dir / "split.csv", split);

  const auto start = std::chrono::steady_clock::now();
  const auto result = sdl::train_supervised(split.train, split.test, options);
  nn::save_checkpoint(rc.out_dir / "sdl_checkpoint.bin",
                      {result.config, options.seed, result.params});
  const auto loss_path = rc.out_dir / "sdl_loss.csv";
  const auto acc_path = rc.out_dir / "sdl_accuracy.csv";
  report::write_file(loss_path, [&](std::ostream& out) { result.log.write_loss_csv(out); });
  report::write_file(acc_path, [&](std::ostream& out) { result.log.write_accuracy_csv(out); });

  const auto losses = report::read_csv(loss_path);
  const auto accs = report::read_csv(acc_path);
  report::write_file(rc.out_dir / "sdl_curves.svg", [&](std::ostream& out) {
    report::stacked_line_charts(
        out, {{{"Keypoint regression loss", "epoch", "MAE (normalized)"},
               {{"train", losses.pairs("epoch", "train_loss")},
                {"test", losses.pairs("epoch", "test_loss")}}},
              {{"Keypoint test accuracy", "epoch", "accuracy", 0.0, 1.0},
               {{"test", accs.pairs("epoch", "test_acc"), true}}}});
  });

  report::write_file(rc.out_dir / "sdl_summary.txt", [&](std::ostream& out) {
    out << "epochs: " << options.epochs << '\n';
    out << "divergence_epoch: "
        << (result.divergence_epoch ? std::to_string(*result.divergence_epoch) : "none") << '\n';
    const auto samples = result.log.test_accuracy_samples();
    if (!samples.empty()) {
      out << "final_test_accuracy: " << std::fixed << std::setprecision(4) << samples.back() << '\n';
    }
  });
  std::cout << "trained " << options.epochs << " epochs in " << std::fixed << std::setprecision(1)
            << elapsed_seconds(start) << " s\n"
            << "divergence epoch: "
            << (result.divergence_epoch ? std::to_string(*result.divergence_epoch) : "none")
            << '\n';
  if (const auto s = result.log.test_accuracy_samples(); !s.empty()) {
    std::cout << "final test accuracy: " << std::setprecision(4) << s.back() << '\n';
  }
  return 0;
}

// Evaluates a checkpoint of either head type on `cases`.
rl::EvaluationReport evaluate(const nn::Checkpoint& ckpt, std::span<const env::GazeCase> cases) {
  if (cases.empty()) throw InputError("no cases to evaluate");
  const auto& img = cases.front().image;
  if (ckpt.config.input_height != img.height || ckpt.config.input_width != img.width) {
    throw ValidationError("checkpoint expects " + std::to_string(ckpt.config.input_height) + "x" +
                          std::to_string(ckpt.config.input_width) + " images, dataset has " +
                          std::to_string(img.height) + "x" + std::to_string(img.width));
  }
  if (ckpt.config.head == nn::Head::kQValues) {
    return rl::test_accuracy(ckpt.params, ckpt.config, cases);
  }
  const auto preds = sdl::predict_keypoints(ckpt.params, ckpt.config, cases);
  std::vector<rl::CaseOutcome> outcomes;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    // The keypoint network has no episode; its score column stays at 0.
    outcomes.push_back({cases[i].case_id, -1, preds[i].in_lesion, 0.0});
  }
  return rl::summarize(std::move(outcomes));
}

std::vector<env::GazeCase> select_cases(const RunConfig& rc, std::uint64_t seed) {
  auto split = load_split(rc, seed);
  if (rc.split == "train") return std::move(split.train);
  if (rc.split == "test") return std::move(split.test);
  auto all = std::move(split.train);
  for (auto& c : split.test) all.push_back(std::move(c));
  return all;
}

int cmd_eval(const RunConfig& rc) {
  const auto ckpt = nn::load_checkpoint(rc.checkpoint);
  const auto cases = select_cases(rc, rc.seed.value_or(ckpt.seed));
  const auto report = evaluate(ckpt, cases);
  fs::create_directories(rc.out_dir);
  report::write_file(rc.out_dir / "eval_report.csv", [&](std::ostream& out) { report.write_csv(out); });
  report::write_file(rc.out_dir / "eval_report.txt", [&](std::ostream& out) {
    out << "checkpoint:     " << rc.checkpoint.string() << '\n'
        << "head:           " << nn::to_string(ckpt.config.head) << '\n'
        << "split:          " << rc.split << '\n';
    report.write_text(out);
  });
  std::cout << "head " << nn::to_string(ckpt.config.head) << ", " << rc.split << " split\n";
  report.write_text(std::cout);
  return 0;
}

int cmd_compare(const RunConfig& rc) {
  const auto rl_ckpt = nn::load_checkpoint(rc.rl_checkpoint);
  const auto sdl_ckpt = nn::load_checkpoint(rc.sdl_checkpoint);
  if (rl_ckpt.config.input_height != sdl_ckpt.config.input_height ||
      rl_ckpt.config.input_width != sdl_ckpt.config.input_width) {
    throw ValidationError("checkpoints were trained on different image sizes");
  }
  if (!rc.seed && rl_ckpt.seed != sdl_ckpt.seed) {
    throw ValidationError("checkpoints were trained with different seeds (" +
                          std::to_string(rl_ckpt.seed) + " vs " + std::to_string(sdl_ckpt.seed) +
                          "), so their test splits differ; pass --seed to choose one");
  }
  const auto cases = select_cases(rc, rc.seed.value_or(rl_ckpt.seed));
  const auto rl_report = evaluate(rl_ckpt, cases);
  const auto sdl_report = evaluate(sdl_ckpt, cases);
  const int n = static_cast<int>(cases.size());
  const auto cmp = rl::compare_methods(rl_report.true_positives, sdl_report.true_positives, n);
  auto stderr_of = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };

  fs::create_directories(rc.out_dir);
  report::write_file(rc.out_dir / "comparison.csv", [&](std::ostream& out) {
    out << "method,true_positives,n,accuracy,std_error\n" << std::fixed << std::setprecision(6);
    out << "dqn," << rl_report.true_positives << ',' << n << ',' << rl_report.accuracy << ','
        << stderr_of(rl_report.accuracy) << '\n';
    out << "sdl," << sdl_report.true_positives << ',' << n << ',' << sdl_report.accuracy << ','
        << stderr_of(sdl_report.accuracy) << '\n';
  });
  report::write_file(rc.out_dir / "significance.txt", [&](std::ostream& out) {
    out << "test: " << cmp.test_name << '\n'
        << "rl_accuracy: " << std::fixed << std::setprecision(4) << cmp.rl_accuracy << '\n'
        << "sdl_accuracy: " << cmp.sdl_accuracy << '\n'
        << "z: " << cmp.z << '\n'
        << "p_value: " << std::scientific << std::setprecision(3) << cmp.p_value << '\n';
  });
  report::write_file(rc.out_dir / "comparison.svg", [&](std::ostream& out) {
    report::bar_chart(out, {"Test accuracy (error bars: 1 s.e.)", "method", "accuracy", 0.0, 1.0},
                      {{"DQN", rl_report.accuracy, stderr_of(rl_report.accuracy)},
                       {"SDL", sdl_report.accuracy, stderr_of(sdl_report.accuracy)}});
  });
  std::cout << "dqn accuracy " << std::fixed << std::setprecision(4) << cmp.rl_accuracy
            << " (" << rl_report.true_positives << "/" << n << ")\n"
            << "sdl accuracy " << cmp.sdl_accuracy << " (" << sdl_report.true_positives << "/" << n
            << ")\n"
            << cmp.test_name << ": z = " << cmp.z << ", p = " << std::scientific
            << std::setprecision(3) << cmp.p_value << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lesion localization with a deep Q network walking radiologist gaze plots"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value (TOML) file; command-line flags win");

  RunConfig rc;
  auto& h = rc.hyper;
  auto& s = rc.synth;

  app.add_option("--seed", rc.seed, "Seed for data generation, splitting and training");
  app.add_option("--data-dir", rc.data_dir, "Dataset directory")->capture_default_str();
  app.add_option("--out-dir", rc.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--lenient", rc.lenient, "Keep cases whose gaze never enters the lesion (warn only)");

  app.add_option("--n", rc.n_cases, "Number of synthetic cases")->check(CLI::Range(1, 1000000))->capture_default_str();
  app.add_option("--height", s.height, "Synthetic image height")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--width", s.width, "Synthetic image width")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--gaze-length", s.gaze_length, "Gaze points per case")->check(CLI::Range(2, 100000))->capture_default_str();
  app.add_option("--axis-min", s.axis_min, "Smallest lesion semi-axis (px)")->capture_default_str();
  app.add_option("--axis-max", s.axis_max, "Largest lesion semi-axis (px)")->capture_default_str();
  app.add_option("--lesion-offset", s.lesion_offset, "Lesion brightness offset")->capture_default_str();
  app.add_option("--texture-amplitude", s.texture_amplitude, "Peak-to-peak background texture span")->capture_default_str();
  app.add_option("--noise-sigma", s.noise_sigma, "Background noise standard deviation")->capture_default_str();
  app.add_option("--step-min", s.step_min, "Shortest gaze step (px)")->capture_default_str();
  app.add_option("--step-max", s.step_max, "Longest gaze step (px)")->capture_default_str();
  app.add_option("--dwell-min", s.dwell_min, "Fewest fixations inside the lesion")->capture_default_str();
  app.add_option("--dwell-max", s.dwell_max, "Most fixations inside the lesion")->capture_default_str();

  app.add_option("--gamma", h.gamma, "Discount factor")->capture_default_str();
  app.add_option("--epsilon", h.epsilon_start, "Initial exploration rate")->capture_default_str();
  app.add_option("--epsilon-decay", h.epsilon_decay, "Exploration decay per episode")->capture_default_str();
  app.add_option("--epsilon-min", h.epsilon_min, "Exploration floor")->capture_default_str();
  app.add_option("--lr", h.learning_rate, "Adam learning rate")->capture_default_str();
  app.add_option("--memory", h.memory, "Replay memory capacity")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--batch", h.batch, "Mini-batch size")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--episodes", h.episodes, "DQN training episodes")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--epochs", rc.epochs, "Keypoint baseline epochs")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--eval-every", rc.eval_every, "Accuracy sampling interval")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--checkpoint-every", rc.checkpoint_every, "Intermediate DQN checkpoint interval (0: off)")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--train-n", rc.train_n, "Training cases")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--test-n", rc.test_n, "Test cases")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--conv-layers", rc.conv_layers, "Convolution layers")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--filters", rc.filters, "Filters per convolution")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--hidden-units", rc.hidden_units, "Hidden dense units")->check(CLI::PositiveNumber)->capture_default_str();

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset")->fallthrough();
  auto* train_rl = app.add_subcommand("train-rl", "Train the deep Q network")->fallthrough();
  auto* train_sdl = app.add_subcommand("train-sdl", "Train the supervised keypoint baseline")->fallthrough();
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a split")->fallthrough();
  eval->add_option("--checkpoint", rc.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", rc.split, "Which cases to evaluate")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  auto* compare = app.add_subcommand("compare", "Compare DQN and keypoint checkpoints")->fallthrough();
  compare->add_option("--rl-checkpoint", rc.rl_checkpoint, "DQN checkpoint")->required()->check(CLI::ExistingFile);
  compare->add_option("--sdl-checkpoint", rc.sdl_checkpoint, "Keypoint checkpoint")->required()->check(CLI::ExistingFile);
  compare->add_option("--split", rc.split, "Which cases to evaluate")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(rc);
    if (train_rl->parsed()) return cmd_train_rl(rc);
    if (train_sdl->parsed()) return cmd_train_sdl(rc);
    if (eval->parsed()) return cmd_eval(rc);
    if (compare->parsed()) return cmd_compare(rc);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
