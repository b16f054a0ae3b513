#include "lesionrl/image.hpp"

#include <algorithm>

#include "lesionrl/error.hpp"

namespace lesionrl {

Image::Image(int h, int w, int c, float fill)
    : height(h),
      width(w),
      channels(c),
      data(static_cast<std::size_t>(h) * w * c, fill) {}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
}

Image replicate_channels(const Image& gray, int channels) {
  if (gray.channels != 1) throw_dimension_mismatch("replicate_channels input channels", 1, gray.channels);
  Image out(gray.height, gray.width, channels);
  const std::size_t n = gray.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) out.data[i * channels + c] = gray.data[i];
  }
  return out;
}

}  // namespace lesionrl
