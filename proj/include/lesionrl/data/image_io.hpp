#pragma once

#include <filesystem>
#include <vector>

#include "lesionrl/env/environment.hpp"
#include "lesionrl/image.hpp"

namespace lesionrl::data {

// 8-bit grayscale PGM (P5 or P2) or PNG, chosen by extension; values are
// normalized to v / 255.
Image read_gray_image(const std::filesystem::path& path);

// Writes round(v * 255) as 8-bit PGM or PNG, chosen by extension.
void write_gray_image(const std::filesystem::path& path, const Image& gray);

// Reads a grayscale image and thresholds it: inside iff v / 255 >= 0.5.
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

// Headerless CSV, one "x,y" pair per line in temporal order, 0-based,
// x = column, y = row.
std::vector<env::GazePoint> read_gaze_csv(const std::filesystem::path& path);
void write_gaze_csv(const std::filesystem::path& path, const std::vector<env::GazePoint>& gaze);

}  // namespace lesionrl::data
