#include <sstream>

#include "doctest.h"
#include "lesionrl/error.hpp"
#include "lesionrl/report/csv.hpp"
#include "lesionrl/report/svg.hpp"

using namespace lesionrl;

TEST_CASE("csv parsing keeps empty cells as missing") {
  const auto t = report::parse_csv("episode,loss,test_acc\n1,0.5,\n2,0.25,0.8\n");
  REQUIRE(t.header.size() == 3);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.column("loss") == 1);
  CHECK_FALSE(t.rows[0][2].has_value());
  CHECK(*t.rows[1][2] == 0.8);
  const auto acc = t.pairs("episode", "test_acc");
  REQUIRE(acc.size() == 1);
  CHECK(acc[0] == std::pair<double, double>{2.0, 0.8});
  CHECK(t.pairs("episode", "loss").size() == 2);
  CHECK_THROWS_AS(t.column("nope"), InputError);

  // CRLF and a missing final newline are tolerated
  const auto crlf = report::parse_csv("a,b\r\n1,2\r\n3,4");
  CHECK(crlf.rows.size() == 2);
  CHECK(*crlf.rows[1][1] == 4.0);
}

TEST_CASE("malformed csv is rejected") {
  CHECK_THROWS_AS(report::parse_csv(""), IngestionError);
  CHECK_THROWS_AS(report::parse_csv("a,b\n1,2,3\n"), IngestionError);
  CHECK_THROWS_AS(report::parse_csv("a,b\n1,x\n"), IngestionError);
  CHECK_THROWS_AS(report::read_csv("/nonexistent/file.csv"), IngestionError);
}

TEST_CASE("svg output is well formed and deterministic") {
  report::Axes axes{"Loss", "episode", "loss", 0.0, 0.0};
  const std::vector<report::Series> series = {
      {"train", {{1, 0.5}, {2, 0.3}, {3, 0.2}}, false},
      {"test", {{1, 0.6}, {3, 0.4}}, true},
  };
  std::ostringstream a, b;
  report::line_chart(a, axes, series);
  report::line_chart(b, axes, series);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("<svg") != std::string::npos);
  CHECK(a.str().find("</svg>") != std::string::npos);
  CHECK(a.str().find("Loss") != std::string::npos);
  CHECK(a.str().find("<circle") != std::string::npos);

  std::ostringstream bars;
  report::bar_chart(bars, {"Accuracy", "", "accuracy", 0.0, 1.0},
                    {{"DQN <gaze>", 0.8, 0.07}, {"SDL", 0.1, 0.05}});
  CHECK(bars.str().find("DQN &lt;gaze&gt;") != std::string::npos);

  std::ostringstream empty;
  report::line_chart(empty, axes, {});
  CHECK(empty.str().find("</svg>") != std::string::npos);

  std::ostringstream stacked;
  report::stacked_line_charts(stacked, {{axes, series}, {axes, series}});
  CHECK(stacked.str().find("<svg") != std::string::npos);
}
