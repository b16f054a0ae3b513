#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lesionrl {

// Dense row-major image with interleaved channels (HWC).
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w, int c, float fill = 0.0f);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  float& at(int y, int x, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::span<const float> view() const { return data; }

  bool operator==(const Image&) const = default;
};

// Binary lesion mask, same geometry as its image.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w, 0) {}

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int y, int x, bool v = true) {
    data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  bool operator==(const Mask&) const = default;
};

// Replicates a single-channel image into `channels` channels.
Image replicate_channels(const Image& gray, int channels);

}  // namespace lesionrl
