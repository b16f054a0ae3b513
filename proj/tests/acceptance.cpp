// Acceptance suite: one PASS/FAIL line per criterion. Criteria 7 and 8 run
// the command-line tool end to end and take most of the time.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lesionrl/env/environment.hpp"
#include "lesionrl/nn/kernels_reference.hpp"
#include "lesionrl/nn/network.hpp"
#include "lesionrl/nn/params.hpp"
#include "lesionrl/oracle/tabular.hpp"
#include "lesionrl/report/csv.hpp"
#include "lesionrl/rl/dqn.hpp"
#include "lesionrl/rl/eval.hpp"
#include "lesionrl/rl/replay.hpp"

namespace fs = std::filesystem;
using namespace lesionrl;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// ---------------------------------------------------------------- 1

Outcome reward_table() {
  using env::Action;
  struct Row {
    bool inside;
    Action a;
    double r;
  };
  const Row expected[] = {{true, Action::kStill, 2.0},        {false, Action::kStill, -4.0},
                          {true, Action::kAnterograde, 0.5},  {true, Action::kRetrograde, 0.5},
                          {false, Action::kAnterograde, -0.5}, {false, Action::kRetrograde, -1.5}};
  std::ostringstream got;
  bool ok = true;
  for (const auto& e : expected) {
    const double r = env::reward_for(e.inside, e.a);
    got << (e.inside ? "in/" : "out/") << env::to_string(e.a) << "=" << r << " ";
    ok = ok && r == e.r;
  }
  return {ok, got.str()};
}

// ---------------------------------------------------------------- 2

struct GradResult {
  double max_rel = 0.0;
  std::size_t params = 0;
};

GradResult finite_difference_check(const nn::NetworkConfig& cfg, std::uint64_t seed) {
  auto params = nn::glorot_init(cfg, seed).cast<double>();
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (auto& l : params.layers) {
    for (auto& b : l.bias) b = u(rng);
  }
  std::uniform_real_distribution<double> pixel(0.0, 1.0), weight(-1.0, 1.0);
  std::vector<double> input(static_cast<std::size_t>(cfg.input_size()));
  for (auto& x : input) x = pixel(rng);
  std::vector<double> w(static_cast<std::size_t>(cfg.output_units()));
  for (auto& x : w) x = weight(rng);

  auto loss = [&](const nn::BasicParameterStore<double>& p) {
    const auto acts = nn::reference::forward<double>(p, cfg, input);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * acts.output[k];
    return s;
  };
  const auto acts = nn::reference::forward<double>(params, cfg, input);
  const auto analytic = nn::reference::backward<double>(params, cfg, acts, w);

  GradResult r;
  r.params = params.parameter_count();
  const double h = 1e-5;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (int which = 0; which < 2; ++which) {
      auto& vec = which == 0 ? params.layers[l].weight : params.layers[l].bias;
      const auto& grad = which == 0 ? analytic.layers[l].weight : analytic.layers[l].bias;
      for (std::size_t i = 0; i < vec.size(); ++i) {
        const double saved = vec[i];
        vec[i] = saved + h;
        const double up = loss(params);
        vec[i] = saved - h;
        const double down = loss(params);
        vec[i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::abs(numeric) + std::abs(grad[i]);
        if (scale < 1e-10) continue;
        r.max_rel = std::max(r.max_rel, std::abs(numeric - grad[i]) / scale);
      }
    }
  }
  return r;
}

Outcome gradient_check() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  std::size_t largest = 0;
  int done = 0;
  while (done < 20) {
    nn::NetworkConfig cfg;
    cfg.input_height = 5 + static_cast<int>(rng() % 12);
    cfg.input_width = 5 + static_cast<int>(rng() % 12);
    cfg.conv_layers = 1 + static_cast<int>(rng() % 3);
    cfg.filters = 1 + static_cast<int>(rng() % 6);
    cfg.hidden_units = 2 + static_cast<int>(rng() % 40);
    cfg.head = rng() % 2 ? nn::Head::kQValues : nn::Head::kKeypoint;
    if (nn::glorot_init(cfg, 1).parameter_count() > 2000) continue;
    const auto g = finite_difference_check(cfg, 1000 + done);
    worst = std::max(worst, g.max_rel);
    largest = std::max(largest, g.params);
    ++done;
  }
  const double t = seconds_since(start);
  return {worst < 1e-4 && t < 60.0,
          "20 networks up to " + std::to_string(largest) + " params, max rel error " +
              fmt("%.2e", worst) + ", " + fmt("%.1f", t) + " s"};
}

// ---------------------------------------------------------------- 3

Outcome chain_agreement() {
  const auto start = Clock::now();
  const auto mdp = oracle::ChainMdp::chain(5, {3}, 0.9);
  const auto vi = oracle::value_iteration(mdp, 1e-12);
  oracle::QLearningOptions ql;
  ql.alpha = 0.5;
  ql.episodes = 20000;
  ql.seed = 3;
  const auto tab = oracle::q_learning_tabular(mdp, ql);
  const double gap = oracle::sup_norm_distance(tab, vi);
  const auto policy = oracle::greedy_policy(vi);

  // The same chain as a rendered 32x32 case: five well separated gaze
  // points, a small bright lesion around the fourth.
  env::GazeCase c;
  c.case_id = "chain";
  c.image = Image(32, 32, 1, 0.3f);
  c.lesion_mask = Mask(32, 32);
  c.gaze = {{5, 5}, {26, 5}, {5, 26}, {16, 16}, {26, 26}};
  for (int y = 14; y <= 18; ++y) {
    for (int x = 14; x <= 18; ++x) {
      c.lesion_mask.set(y, x);
      c.image.at(y, x) = 0.7f;
    }
  }
  rl::Hyperparameters h;
  h.gamma = 0.9;
  h.episodes = 600;
  h.seed = 11;
  const std::vector<env::GazeCase> cases = {c};
  const auto result = rl::train(cases, h, cases);
  std::string dqn_actions, vi_actions;
  bool same = true;
  for (int s = 0; s < 5; ++s) {
    const auto q = nn::forward(result.params, result.config, env::render_state(c, s));
    const auto a = static_cast<env::Action>(rl::argmax(std::span<const float>(q)));
    dqn_actions += env::to_string(a) + " ";
    vi_actions += env::to_string(policy[s]) + " ";
    same = same && a == policy[s];
  }
  const double t = seconds_since(start);
  return {gap < 1e-6 && same && t < 300.0,
          "tabular sup-norm gap " + fmt("%.2e", gap) + "; value iteration [" + vi_actions +
              "] dqn [" + dqn_actions + "]; " + fmt("%.1f", t) + " s"};
}

// ---------------------------------------------------------------- 4

Outcome softmax_properties() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> scale_exp(-3.0, 3.0), u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(1, 8);
  double worst = 0.0;
  int argmax_mismatch = 0;
  for (int i = 0; i < 10000; ++i) {
    const double scale = std::pow(10.0, scale_exp(rng));
    std::vector<double> q(len(rng));
    for (auto& v : q) v = scale * u(rng);
    const auto p = rl::softmax(q);
    double sum = 0.0;
    for (double v : p) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
    if (rl::argmax(std::span<const double>(p)) != rl::argmax(std::span<const double>(q))) {
      ++argmax_mismatch;
    }
  }
  return {worst <= 1e-12 && argmax_mismatch == 0,
          "max |sum - 1| " + fmt("%.2e", worst) + ", argmax changes " +
              std::to_string(argmax_mismatch)};
}

// ---------------------------------------------------------------- 5

Outcome replay_eviction() {
  rl::ReplayMemory memory(12000);
  auto transition = [](int k) {
    rl::Transition t;
    t.state = {k, 0};
    t.next_state = {k, 1};
    t.reward = k;
    return t;
  };
  for (int k = 1; k <= 12001; ++k) memory.push(transition(k));
  bool order = memory.size() == 12000;
  for (std::size_t i = 0; order && i < memory.size(); ++i) {
    order = memory[i] == transition(static_cast<int>(i) + 2);
  }
  bool first_gone = true;
  for (std::size_t i = 0; i < memory.size(); ++i) first_gone = first_gone && memory[i].state.case_index != 1;
  return {order && first_gone, "size " + std::to_string(memory.size()) + ", T1 evicted: " +
                                   (first_gone ? "yes" : "no") + ", order kept: " +
                                   (order ? "yes" : "no")};
}

// ---------------------------------------------------------------- 6

Outcome epsilon_schedule() {
  rl::Hyperparameters h;
  const double e0 = rl::epsilon_at(0, h), e1 = rl::epsilon_at(1, h);
  double worst_floor = 0.0;
  for (int k = 4999; k <= 20000; ++k) worst_floor = std::max(worst_floor, std::abs(rl::epsilon_at(k, h) - 1e-4));
  const bool ok = e0 == 0.5 && std::abs(e1 - 0.4999) < 1e-15 && worst_floor < 1e-15;
  return {ok, "eps(0)=" + fmt("%.6g", e0) + " eps(1)=" + fmt("%.6g", e1) +
                  " eps(4999)=" + fmt("%.6g", rl::epsilon_at(4999, h)) +
                  " max floor deviation " + fmt("%.1e", worst_floor)};
}

// ---------------------------------------------------------------- 9

Outcome formula_fixtures() {
  bool ok = true;
  std::ostringstream d;
  // score: mean reward over the gaze length
  const std::vector<double> rewards = {2.0, -4.0, 0.5, -1.5};
  const double s = rl::episode_score(rewards, 4);
  ok = ok && s == -0.75;
  d << "score " << s;

  // walk a fixture case with a fixed action sequence
  env::GazeCase c;
  c.case_id = "fixture";
  c.image = Image(16, 16, 1, 0.4f);
  c.lesion_mask = Mask(16, 16);
  for (int y = 6; y <= 9; ++y) {
    for (int x = 6; x <= 9; ++x) c.lesion_mask.set(y, x);
  }
  c.gaze = {{1, 1}, {4, 4}, {7, 7}, {8, 8}, {12, 12}};
  const env::Action plan[] = {env::Action::kAnterograde, env::Action::kAnterograde,
                              env::Action::kStill, env::Action::kAnterograde,
                              env::Action::kRetrograde};
  // rewards: out/Ant -0.5, out/Ant -0.5, in/Still 2, in/Ant 0.5, in/Ret 0.5 => 2.0 / 5
  std::vector<double> r;
  int idx = 0;
  for (auto a : plan) {
    const auto st = env::step(c, idx, a);
    r.push_back(st.reward);
    idx = st.next_index;
  }
  const double walk = rl::episode_score(r, 5);
  ok = ok && walk == 0.4 && idx == 2 && env::in_lesion(c, idx);
  d << ", walk score " << walk << " ending at " << idx;

  // accuracy: fraction of cases ending inside the lesion
  std::vector<rl::CaseOutcome> outcomes;
  for (int i = 0; i < 10; ++i) outcomes.push_back({"c" + std::to_string(i), 0, i < 7, 0.0});
  const auto rep = rl::summarize(outcomes);
  ok = ok && rep.true_positives == 7 && rep.accuracy == 0.7;
  d << ", accuracy " << rep.accuracy << " (7 of 10)";

  const auto z = rl::compare_methods(26, 2, 30);
  const bool z_ok = std::abs(z.z - 6.210590034081188) < 1e-9 &&
                    std::abs(z.p_value - 5.27860221353874e-10) < 1e-15;
  ok = ok && z_ok;
  d << ", z " << fmt("%.6f", z.z);
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 7, 8

struct Cli {
  fs::path exe;
  fs::path work;

  int run(const std::string& args, const std::string& log) const {
    const std::string cmd = "cd '" + work.string() + "' && '" + exe.string() + "' " + args +
                            " >'" + log + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double mean_last(const std::vector<double>& v, std::size_t k) {
  if (v.empty()) return NAN;
  k = std::min(k, v.size());
  double s = 0.0;
  for (std::size_t i = v.size() - k; i < v.size(); ++i) s += v[i];
  return s / static_cast<double>(k);
}

Outcome end_to_end(const Cli& cli, double runtime_limit) {
  const auto start = Clock::now();
  if (cli.run("gen-data --seed 7", "gen.log") != 0) return {false, "gen-data failed"};
  if (cli.run("train-rl --seed 7", "train_rl.log") != 0) return {false, "train-rl failed"};
  if (cli.run("train-sdl --seed 7", "train_sdl.log") != 0) return {false, "train-sdl failed"};
  if (cli.run("compare --rl-checkpoint out/rl_checkpoint.bin --sdl-checkpoint "
              "out/sdl_checkpoint.bin --split test",
              "compare.log") != 0) {
    return {false, "compare failed"};
  }
  const double t = seconds_since(start);

  const auto log = report::read_csv(cli.work / "out" / "training_log.csv");
  std::vector<double> acc;
  for (const auto& [e, a] : log.pairs("episode", "test_acc")) acc.push_back(a);
  const double dqn = mean_last(acc, 10);

  double sdl = NAN;
  std::string line;
  // comparison.csv: method,true_positives,n,accuracy,std_error
  std::istringstream cmp(slurp(cli.work / "out" / "comparison.csv"));
  std::getline(cmp, line);
  while (std::getline(cmp, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() == 5 && cells[0] == "sdl") sdl = std::stod(cells[3]);
  }

  int divergence = -1;
  std::istringstream summary(slurp(cli.work / "out" / "sdl_summary.txt"));
  while (std::getline(summary, line)) {
    if (line.rfind("divergence_epoch:", 0) == 0) {
      const auto v = line.substr(line.find(':') + 1);
      if (v.find("none") == std::string::npos) divergence = std::stoi(v);
    }
  }

  const bool dqn_ok = dqn >= 0.75;
  const bool gap_ok = dqn - sdl >= 0.30;
  const bool div_ok = divergence > 0 && divergence < 30;
  const bool time_ok = t < runtime_limit;
  std::ostringstream d;
  d << "dqn mean of last 10 test accuracies " << fmt("%.3f", dqn) << (dqn_ok ? " (ok)" : " (< 0.75)")
    << "; sdl test accuracy " << fmt("%.3f", sdl) << (gap_ok ? " (gap ok)" : " (gap < 0.30)")
    << "; sdl divergence epoch " << (divergence > 0 ? std::to_string(divergence) : "none")
    << (div_ok ? " (ok)" : " (not before 30)") << "; pipeline " << fmt("%.0f", t) << " s"
    << (time_ok ? " (ok)" : " (over " + fmt("%.0f", runtime_limit) + " s)");
  return {dqn_ok && gap_ok && div_ok && time_ok, d.str()};
}

Outcome determinism(const Cli& cli, int episodes) {
  if (!fs::exists(cli.work / "data" / "manifest.json") &&
      cli.run("gen-data --seed 7", "gen.log") != 0) {
    return {false, "gen-data failed"};
  }
  const std::string args = "train-rl --seed 7 --episodes " + std::to_string(episodes);
  if (cli.run(args + " --out-dir det_a", "det_a.log") != 0) return {false, "first run failed"};
  if (cli.run(args + " --out-dir det_b", "det_b.log") != 0) return {false, "second run failed"};
  const auto a = slurp(cli.work / "det_a" / "training_log.csv");
  const auto b = slurp(cli.work / "det_b" / "training_log.csv");
  const bool same_log = !a.empty() && a == b;
  const bool same_ckpt = slurp(cli.work / "det_a" / "rl_checkpoint.bin") ==
                         slurp(cli.work / "det_b" / "rl_checkpoint.bin");
  return {same_log && same_ckpt,
          std::to_string(episodes) + " episodes, training_log.csv " +
              (same_log ? "identical" : "differs") + " (" + std::to_string(a.size()) +
              " bytes), checkpoint " + (same_ckpt ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string cli_path = LESIONRL_CLI_PATH;
  std::string work = "acceptance_run";
  int det_episodes = 30;
  double runtime_limit = 1200.0;
  std::vector<int> only;
  app.add_option("--cli", cli_path, "Path to the lesionrl executable")->capture_default_str();
  app.add_option("--work-dir", work, "Scratch directory for end-to-end runs")->capture_default_str();
  app.add_option("--determinism-episodes", det_episodes, "Episodes per determinism run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--runtime-limit", runtime_limit, "Seconds allowed for the end-to-end pipeline")
      ->capture_default_str();
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);
  const Cli cli{fs::absolute(cli_path), fs::absolute(work)};

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"reward table", reward_table},
      {"gradient check", gradient_check},
      {"5-point chain", chain_agreement},
      {"softmax", softmax_properties},
      {"replay eviction", replay_eviction},
      {"epsilon schedule", epsilon_schedule},
      {"end-to-end defaults", [&] { return end_to_end(cli, runtime_limit); }},
      {"bitwise reproducibility", [&] { return determinism(cli, det_episodes); }},
      {"score and accuracy formulas", formula_fixtures},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  "
              << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
