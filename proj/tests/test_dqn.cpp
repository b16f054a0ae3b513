#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "lesionrl/error.hpp"
#include "lesionrl/nn/network.hpp"
#include "lesionrl/rl/dqn.hpp"

using namespace lesionrl;
using namespace lesionrl::rl;

TEST_CASE("epsilon schedule") {
  const Hyperparameters h;
  CHECK(epsilon_at(0, h) == 0.5);
  CHECK(epsilon_at(1, h) == doctest::Approx(0.4999).epsilon(1e-15));
  CHECK(epsilon_at(4999, h) == 1e-4);
  CHECK(epsilon_at(5000, h) == 1e-4);
  CHECK(epsilon_at(100000, h) == 1e-4);
  CHECK(epsilon_at(299, h) == doctest::Approx(0.4701));
  double prev = 1.0;
  for (int e = 0; e < 6000; ++e) {
    const double eps = epsilon_at(e, h);
    CHECK(eps <= prev);
    CHECK(eps >= h.epsilon_min);
    prev = eps;
  }
}

TEST_CASE("select_action: greedy, ties, exploration and bad input") {
  Rng rng(1);
  const std::vector<float> q{1.0f, 5.0f, 2.0f};
  CHECK(select_action(q, 0.0, rng) == env::Action::kStill);
  const std::vector<float> tie{0.5f, 0.5f, 0.1f};
  CHECK(select_action(tie, 0.0, rng) == env::Action::kAnterograde);

  std::array<int, 3> counts{};
  for (int i = 0; i < 30000; ++i) counts[env::index_of(select_action(q, 1.0, rng))]++;
  // Binomial(30000, 1/3): sigma ~ 82.
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);

  const std::vector<float> bad{1.0f, NAN, 0.0f};
  CHECK_THROWS_AS(select_action(bad, 0.0, rng), NumericError);
  CHECK_THROWS_AS(select_action(std::vector<float>{1.0f, 2.0f}, 0.0, rng), DimensionError);
}

TEST_CASE("bellman target") {
  CHECK(bellman_target(2.0, 0.99, std::vector<float>{10.0f, 3.0f, -1.0f}) == doctest::Approx(11.9));
  CHECK(bellman_target(-4.0, 0.99, std::vector<float>{0.0f, 0.0f, 0.0f}) == -4.0);
  CHECK(bellman_target(0.5, 0.0, std::vector<float>{7.0f, 3.0f, 1.0f}) == 0.5);
  // Monotone in reward and in max(next_q).
  const std::vector<float> lo{1.0f, 2.0f, 0.0f}, hi{1.0f, 3.0f, 0.0f};
  CHECK(bellman_target(1.0, 0.9, hi) > bellman_target(1.0, 0.9, lo));
  CHECK(bellman_target(1.5, 0.9, lo) > bellman_target(1.0, 0.9, lo));
}

TEST_CASE("batch loss and its gradient") {
  CHECK(batch_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(batch_loss(std::vector<double>{2}, std::vector<double>{0}) == 2.0);
  CHECK(batch_loss(std::vector<double>{1, -1}, std::vector<double>{0, 0}) == 1.0);
  CHECK_THROWS_AS(batch_loss(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionError);
  CHECK_THROWS_AS(batch_loss(std::vector<double>{}, std::vector<double>{}), DimensionError);

  const std::vector<double> t{1.0, -1.0}, p{0.0, 0.5};
  const std::vector<env::Action> a{env::Action::kRetrograde, env::Action::kAnterograde};
  const auto g = loss_output_gradient(t, p, a);
  CHECK(g == std::vector<float>{0.0f, 0.0f, -0.5f, 0.5f, 0.0f, 0.0f});
}

TEST_CASE("hyperparameter validation") {
  Hyperparameters h;
  CHECK_NOTHROW(h.validate());
  h.gamma = 1.5;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = {};
  h.epsilon_min = 0.6;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = {};
  h.batch = 0;
  CHECK_THROWS_AS(h.validate(), ConfigError);
}

TEST_CASE("a gradient step on a fixed batch lowers its loss") {
  const auto c = testing::make_case(16, 6, 9, 6, 10, {{2, 8}, {4, 8}, {6, 8}, {8, 8}, {12, 8}});
  std::vector<env::GazeCase> cases{c};
  const env::StateRenderer renderer(cases, {});
  const auto cfg = testing::tiny_config(16, 2, 4, 16, nn::Head::kQValues);
  auto params = nn::glorot_init(cfg, 3);
  nn::Adam adam({.learning_rate = 1e-3});
  std::vector<Transition> batch;
  for (int i = 0; i < 5; ++i) {
    for (auto a : env::kAllActions) {
      const auto r = env::step(c, i, a);
      batch.push_back({{0, i}, a, r.reward, {0, r.next_index}});
    }
  }
  // With gamma = 0 the targets are fixed, so the loss must fall steadily.
  const double first = learn_from_batch(params, cfg, adam, renderer, batch, 0.0).loss;
  double last = first;
  for (int k = 0; k < 200; ++k) last = learn_from_batch(params, cfg, adam, renderer, batch, 0.0).loss;
  CHECK(last < 0.5 * first);
}

TEST_CASE("training loop bookkeeping and determinism") {
  std::vector<env::GazeCase> cases{
      testing::make_case(16, 6, 9, 6, 10, {{2, 8}, {4, 8}, {6, 8}, {8, 8}, {12, 8}}),
      testing::make_case(16, 1, 4, 1, 4, {{12, 12}, {9, 9}, {6, 6}, {3, 3}, {2, 2}, {9, 2}, {13, 2}})};
  Hyperparameters h;
  h.episodes = 23;
  h.batch = 8;
  h.seed = 5;
  TrainOptions opt;
  opt.network = testing::tiny_config(16, 2, 4, 16, nn::Head::kQValues);
  int callbacks = 0, checkpoints = 0;
  opt.on_episode = [&](const EpisodeRecord&) { ++callbacks; };
  opt.checkpoint_every = 10;
  opt.on_checkpoint = [&](int, const nn::ParameterStore&) { ++checkpoints; };
  const auto a = train(cases, h, cases, opt);
  CHECK(a.log.records.size() == 23);
  CHECK(callbacks == 23);
  CHECK(checkpoints == 2);
  CHECK(a.log.test_accuracy_samples().size() == 2);
  CHECK(a.log.train_accuracy_samples().size() == 2);
  long long steps = 0;
  for (const auto& r : a.log.records) {
    steps += episode_length(cases[r.case_index]);
    CHECK(r.score >= -4.0);
    CHECK(r.score <= 2.0);
    CHECK(r.epsilon == epsilon_at(r.episode - 1, h));
    CHECK(r.test_accuracy.has_value() == (r.episode % 10 == 0));
  }
  CHECK(a.gradient_steps == steps);

  const auto b = train(cases, h, cases, opt);
  std::ostringstream sa, sb;
  a.log.write_csv(sa);
  b.log.write_csv(sb);
  CHECK(sa.str() == sb.str());
  CHECK(a.params == b.params);

  const auto header = sa.str().substr(0, sa.str().find('\n'));
  CHECK(header == "episode,score,epsilon,mean_batch_loss,train_acc,test_acc");
}

TEST_CASE("training rejects invalid input") {
  Hyperparameters h;
  std::vector<env::GazeCase> none;
  CHECK_THROWS_AS(train(none, h, none), ValidationError);
  auto bad = testing::make_case(16, 6, 9, 6, 10, {{0, 0}, {1, 1}});  // never visits the lesion
  std::vector<env::GazeCase> cases{bad};
  CHECK_THROWS_AS(train(cases, h, none), ValidationError);
}

TEST_CASE("with epsilon 0 and a constant-Still network the agent never moves") {
  const auto c = testing::make_case(16, 6, 9, 6, 10, {{2, 8}, {4, 8}, {6, 8}, {8, 8}, {12, 8}});
  const auto cfg = testing::tiny_config(16, 2, 4, 8, nn::Head::kQValues);
  auto params = nn::zero_parameters<float>(cfg);
  params.layers.back().bias = {0.0f, 1.0f, 0.0f};
  Rng rng(1);
  int index = 0;
  for (int t = 0; t < env::episode_length(c); ++t) {
    const auto q = nn::forward(params, cfg, env::render_state(c, index));
    index = env::step(c, index, select_action(q, 0.0, rng)).next_index;
  }
  CHECK(index == 0);
}
