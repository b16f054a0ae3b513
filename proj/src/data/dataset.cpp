#include "lesionrl/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>
#include <random>

#include "lesionrl/data/image_io.hpp"
#include "lesionrl/error.hpp"

namespace lesionrl::data {

namespace fs = std::filesystem;

env::GazeCase load_case(const fs::path& image_path, const fs::path& mask_path,
                        const fs::path& gaze_path, std::string case_id,
                        const LoadOptions& options) {
  env::GazeCase c;
  c.case_id = case_id.empty() ? image_path.stem().string() : std::move(case_id);
  c.image = read_gray_image(image_path);
  c.lesion_mask = read_mask(mask_path);
  if (c.lesion_mask.height != c.image.height || c.lesion_mask.width != c.image.width) {
    throw IngestionError("case '" + c.case_id + "': mask is " +
                         std::to_string(c.lesion_mask.height) + "x" +
                         std::to_string(c.lesion_mask.width) + " but image is " +
                         std::to_string(c.image.height) + "x" + std::to_string(c.image.width));
  }
  c.gaze = read_gaze_csv(gaze_path);
  env::validate_case(c, false);
  bool visited = false;
  for (int i = 0; i < c.gaze_count(); ++i) visited = visited || env::in_lesion(c, i);
  if (!visited) {
    if (options.strict) {
      throw ValidationError("case '" + c.case_id + "': no gaze point falls inside the lesion");
    }
    std::cerr << "warning: case '" << c.case_id << "': no gaze point falls inside the lesion\n";
  }
  return c;
}

CaseFiles save_case(const env::GazeCase& c, const fs::path& dir) {
  fs::create_directories(dir);
  CaseFiles f{c.case_id, c.case_id + "_image.pgm", c.case_id + "_mask.pgm",
              c.case_id + "_gaze.csv"};
  write_gray_image(dir / f.image, c.image);
  write_mask(dir / f.mask, c.lesion_mask);
  write_gaze_csv(dir / f.gaze, c.gaze);
  return f;
}

void write_manifest(const fs::path& dir, const std::vector<CaseFiles>& cases,
                    const std::optional<SynthConfig>& generator) {
  nlohmann::ordered_json j;
  j["format"] = "lesionrl-dataset";
  j["version"] = 1;
  if (generator) {
    const auto& g = *generator;
    j["generator"] = {{"height", g.height},
                      {"width", g.width},
                      {"axis_min", g.axis_min},
                      {"axis_max", g.axis_max},
                      {"lesion_offset", g.lesion_offset},
                      {"background_min", g.background_min},
                      {"background_max", g.background_max},
                      {"texture_amplitude", g.texture_amplitude},
                      {"noise_sigma", g.noise_sigma},
                      {"gaze_length", g.gaze_length},
                      {"step_min", g.step_min},
                      {"step_max", g.step_max},
                      {"min_lesion_visits", g.min_lesion_visits},
                      {"dwell_min", g.dwell_min},
                      {"dwell_max", g.dwell_max},
                      {"seed", g.seed}};
  }
  auto list = nlohmann::ordered_json::array();
  for (const auto& c : cases) {
    list.push_back({{"case_id", c.case_id}, {"image", c.image}, {"mask", c.mask}, {"gaze", c.gaze}});
  }
  j["cases"] = std::move(list);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

std::vector<CaseFiles> read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IngestionError("no dataset manifest at " + path.string());
  std::vector<CaseFiles> cases;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != "lesionrl-dataset") {
      throw IngestionError(path.string() + " is not a lesionrl dataset manifest");
    }
    for (const auto& c : j.at("cases")) {
      cases.push_back({c.at("case_id").get<std::string>(), c.at("image").get<std::string>(),
                       c.at("mask").get<std::string>(), c.at("gaze").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("malformed manifest " + path.string() + ": " + e.what());
  }
  return cases;
}

std::vector<env::GazeCase> load_dataset(const fs::path& dir, const LoadOptions& options) {
  const auto files = read_manifest(dir);
  std::vector<env::GazeCase> cases;
  std::string report;
  int failures = 0;
  for (const auto& f : files) {
    try {
      cases.push_back(load_case(dir / f.image, dir / f.mask, dir / f.gaze, f.case_id, options));
    } catch (const Error& e) {
      ++failures;
      report += "  " + f.case_id + ": " + e.what() + "\n";
    }
  }
  if (failures > 0) {
    throw ValidationError(std::to_string(failures) + " of " + std::to_string(files.size()) +
                          " cases failed validation:\n" + report);
  }
  return cases;
}

DatasetSplit split_dataset(std::vector<env::GazeCase> cases, int train_n, int test_n,
                           std::uint64_t seed) {
  if (train_n <= 0 || test_n < 0) throw InputError("split sizes must be positive");
  if (static_cast<long long>(cases.size()) < static_cast<long long>(train_n) + test_n) {
    throw InputError("split needs " + std::to_string(train_n + test_n) + " cases, have " +
                     std::to_string(cases.size()));
  }
  std::vector<std::size_t> order(cases.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  DatasetSplit split;
  split.seed = seed;
  for (int i = 0; i < train_n; ++i) split.train.push_back(std::move(cases[order[i]]));
  for (int i = 0; i < test_n; ++i) split.test.push_back(std::move(cases[order[train_n + i]]));
  return split;
}

}  // namespace lesionrl::data
