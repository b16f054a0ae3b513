#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "lesionrl/error.hpp"
#include "lesionrl/rl/eval.hpp"

using namespace lesionrl;
using namespace lesionrl::rl;

TEST_CASE("softmax sums to one, keeps the argmax and ignores shifts") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> q{u(rng), u(rng), u(rng)};
    const auto p = softmax(q);
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) <= 1e-12);
    CHECK(argmax(p) == argmax(q));
    const double c = u(rng);
    const auto shifted = softmax(std::vector<double>{q[0] + c, q[1] + c, q[2] + c});
    for (int k = 0; k < 3; ++k) CHECK(shifted[k] == doctest::Approx(p[k]).epsilon(1e-9));
  }
  const auto big = softmax(std::vector<double>{1000.0, 999.0, -1000.0});
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] > big[1]);
  CHECK(softmax(std::vector<double>{0.0, 0.0, 0.0})[1] == doctest::Approx(1.0 / 3));
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax(std::vector<double>{1.0, 1.0, 0.0}) == 0);
  CHECK(argmax(std::vector<double>{0.0, 2.0, 2.0}) == 1);
  CHECK(argmax(std::vector<float>{-1.0f, -1.0f, -0.5f}) == 2);
}

TEST_CASE("episode score is the mean reward") {
  CHECK(episode_score(std::vector<double>(7, 2.0), 7) == 2.0);
  CHECK(episode_score(std::vector<double>{-0.5, -0.5, 0.5, 2.0, 2.0}, 5) == 0.7);
  CHECK(episode_score(std::vector<double>{-4.0, -1.5, 0.5, 2.0}, 4) == -0.75);
  CHECK_THROWS_AS(episode_score(std::vector<double>{1.0}, 2), DimensionError);
}

TEST_CASE("accuracy is true positives over cases") {
  std::vector<CaseOutcome> o;
  for (int i = 0; i < 30; ++i) o.push_back({"c" + std::to_string(i), 0, i < 26, 1.0});
  const auto r = summarize(o);
  CHECK(r.true_positives == 26);
  CHECK(r.accuracy == 26.0 / 30.0);
  CHECK(r.mean_score == 1.0);
  o.resize(10);
  for (int i = 0; i < 10; ++i) o[i].in_lesion = i < 7;
  CHECK(summarize(o).accuracy == 0.7);
  CHECK_THROWS_AS(summarize({}), InputError);

  std::ostringstream csv, text;
  r.write_csv(csv);
  r.write_text(text);
  const auto rows = csv.str();
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 31);
  CHECK(text.str().find("0.8667") != std::string::npos);
}

TEST_CASE("two-proportion z-test against statsmodels") {
  // statsmodels proportions_ztest (pooled, two-sided); see tests/oracles.
  auto r = compare_methods(26, 2, 30);
  CHECK(r.z == doctest::Approx(6.210590034081188).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(5.27860221353874e-10).epsilon(1e-9));
  CHECK(r.p_value < 1e-6);
  r = compare_methods(30, 0, 30);
  CHECK(r.z == doctest::Approx(7.745966692414835).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(9.485737571073745e-15).epsilon(1e-9));
  CHECK(r.p_value < 1e-10);
  r = compare_methods(20, 10, 30);
  CHECK(r.p_value == doctest::Approx(0.009823274507519249).epsilon(1e-9));
  r = compare_methods(15, 14, 30);
  CHECK(r.z == doctest::Approx(0.25834245322211113).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.7961426250112136).epsilon(1e-9));
  CHECK(compare_methods(12, 12, 30).p_value == 1.0);
  CHECK(compare_methods(30, 30, 30).p_value == 1.0);
  CHECK_THROWS_AS(compare_methods(31, 0, 30), InputError);
  CHECK_THROWS_AS(compare_methods(1, 0, 0), InputError);
}

TEST_CASE("greedy rollout follows the network's argmax") {
  const auto c = testing::make_case(16, 6, 9, 6, 10, {{2, 8}, {4, 8}, {6, 8}, {8, 8}, {12, 8}});
  const auto cfg = testing::tiny_config(16, 2, 4, 8, nn::Head::kQValues);
  auto params = nn::zero_parameters<float>(cfg);
  params.layers.back().bias = {1.0f, 0.0f, 0.0f};  // always anterograde
  const auto r = greedy_rollout(params, cfg, c);
  CHECK(r.final_index == 4);
  CHECK_FALSE(r.in_lesion);
  CHECK(r.actions.size() == 5);
  // -0.5, -0.5, +0.5, +0.5, then clamped Still outside: -4.
  CHECK(r.score == doctest::Approx((-0.5 - 0.5 + 0.5 + 0.5 - 4.0) / 5));

  std::vector<env::GazeCase> cases{c, c};
  cases[1].gaze = {{2, 8}, {6, 8}};
  const auto report = test_accuracy(params, cfg, cases);
  CHECK(report.true_positives == 1);
  CHECK(report.accuracy == 0.5);
}
