#include "lesionrl/data/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "lesionrl/error.hpp"

namespace lesionrl::data {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

struct Gray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Skips whitespace and '#' comments between PGM header tokens.
int read_pgm_int(std::istream& in, const std::filesystem::path& path) {
  while (true) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) throw IngestionError("malformed PGM header in " + path.string());
  return v;
}

Gray8 read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5" && magic != "P2") throw IngestionError(path.string() + " is not a PGM file");
  Gray8 img;
  img.width = read_pgm_int(in, path);
  img.height = read_pgm_int(in, path);
  const int maxval = read_pgm_int(in, path);
  if (img.width <= 0 || img.height <= 0) throw IngestionError("bad PGM size in " + path.string());
  if (maxval != 255) throw IngestionError(path.string() + ": only 8-bit PGM (maxval 255) is supported");
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()),
                 static_cast<std::streamsize>(img.pixels.size()))) {
      throw IngestionError("truncated PGM data in " + path.string());
    }
  } else {
    for (auto& p : img.pixels) {
      int v = 0;
      if (!(in >> v) || v < 0 || v > 255) throw IngestionError("bad ASCII PGM data in " + path.string());
      p = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

Gray8 read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IngestionError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  Gray8 img;
  img.width = static_cast<int>(image.width);
  img.height = static_cast<int>(image.height);
  img.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IngestionError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

Gray8 read_gray8(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IngestionError("missing file " + path.string());
  return lower_extension(path) == ".png" ? read_png(path) : read_pgm(path);
}

void write_gray8(const std::filesystem::path& path, const Gray8& img) {
  if (lower_extension(path) == ".png") {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
      throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    }
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

Image read_gray_image(const std::filesystem::path& path) {
  const Gray8 g = read_gray8(path);
  Image img(g.height, g.width, 1);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) img.data[i] = g.pixels[i] / 255.0f;
  return img;
}

void write_gray_image(const std::filesystem::path& path, const Image& gray) {
  if (gray.channels != 1) throw DimensionError("write_gray_image expects one channel");
  Gray8 g{gray.width, gray.height, std::vector<std::uint8_t>(gray.data.size())};
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    g.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(gray.data[i], 0.0f, 1.0f) * 255.0f));
  }
  write_gray8(path, g);
}

Mask read_mask(const std::filesystem::path& path) {
  const Gray8 g = read_gray8(path);
  Mask m(g.height, g.width);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    m.data[i] = g.pixels[i] / 255.0 >= 0.5 ? 1 : 0;
  }
  return m;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  Gray8 g{mask.width, mask.height, std::vector<std::uint8_t>(mask.data.size())};
  for (std::size_t i = 0; i < mask.data.size(); ++i) g.pixels[i] = mask.data[i] ? 255 : 0;
  write_gray8(path, g);
}

std::vector<env::GazePoint> read_gaze_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open gaze file " + path.string());
  std::vector<env::GazePoint> gaze;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream row(line);
    env::GazePoint p;
    char comma = 0;
    if (!(row >> p.x >> comma >> p.y) || comma != ',') {
      throw IngestionError(path.string() + ":" + std::to_string(line_no) +
                           ": expected an integer pair 'x,y'");
    }
    row >> std::ws;
    if (!row.eof()) {
      throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": trailing characters");
    }
    gaze.push_back(p);
  }
  return gaze;
}

void write_gaze_csv(const std::filesystem::path& path, const std::vector<env::GazePoint>& gaze) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& p : gaze) out << p.x << ',' << p.y << '\n';
}

}  // namespace lesionrl::data
