#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lesionrl/data/synth.hpp"
#include "lesionrl/env/environment.hpp"

namespace lesionrl::data {

struct LoadOptions {
  // Reject cases whose gaze plot never enters the lesion; otherwise warn on
  // stderr and keep them.
  bool strict = true;
};

// Reads the three files of one case and validates it.
env::GazeCase load_case(const std::filesystem::path& image_path,
                        const std::filesystem::path& mask_path,
                        const std::filesystem::path& gaze_path, std::string case_id = "",
                        const LoadOptions& options = {});

struct CaseFiles {
  std::string case_id;
  std::string image;  // paths relative to the dataset directory
  std::string mask;
  std::string gaze;
};

// Writes <id>_image.pgm, <id>_mask.pgm and <id>_gaze.csv into `dir`.
CaseFiles save_case(const env::GazeCase& c, const std::filesystem::path& dir);

// manifest.json: {"format", "version", "generator"?, "cases": [...]}
void write_manifest(const std::filesystem::path& dir, const std::vector<CaseFiles>& cases,
                    const std::optional<SynthConfig>& generator = std::nullopt);
std::vector<CaseFiles> read_manifest(const std::filesystem::path& dir);

// Loads every case listed in the manifest. Validation failures are collected
// and reported together in one ValidationError.
std::vector<env::GazeCase> load_dataset(const std::filesystem::path& dir,
                                        const LoadOptions& options = {});

struct DatasetSplit {
  std::vector<env::GazeCase> train;
  std::vector<env::GazeCase> test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then the first train_n cases train and the next test_n
// test. Throws InputError when there are too few cases.
DatasetSplit split_dataset(std::vector<env::GazeCase> cases, int train_n, int test_n,
                           std::uint64_t seed);

}  // namespace lesionrl::data
