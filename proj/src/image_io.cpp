// SPDX-License-Identifier: Apache-2.0
#include "taf/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

namespace taf {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int c = in.get();
  while (in) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) return token;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (token.empty()) throw InvalidArgument(fmt::format("{}: truncated netpbm header", path.string()));
  return token;
}

long header_number(std::istream& in, const std::filesystem::path& path, const char* what) {
  const std::string token = header_token(in, path);
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || value <= 0) {
    throw InvalidArgument(fmt::format("{}: bad {} '{}' in netpbm header", path.string(), what, token));
  }
  return value;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument(fmt::format("cannot open image {}", path.string()));

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || std::string_view("2356").find(magic[1]) == std::string_view::npos) {
    throw InvalidArgument(fmt::format("{}: unsupported format (expected netpbm P2/P3/P5/P6)", path.string()));
  }
  const bool ascii = magic[1] == '2' || magic[1] == '3';
  const int channels = (magic[1] == '3' || magic[1] == '6') ? 3 : 1;

  Image img;
  img.width = header_number(in, path, "width");
  img.height = header_number(in, path, "height");
  const long maxval = header_number(in, path, "maxval");
  if (maxval > 65535) throw InvalidArgument(fmt::format("{}: maxval {} exceeds 65535", path.string(), maxval));
  img.maxval = static_cast<int>(maxval);
  // header_token consumed the single whitespace byte after maxval.

  const Index n = img.pixels();
  img.bands.assign(static_cast<std::size_t>(channels), Vec<double>(n));
  const double scale = 1.0 / static_cast<double>(img.maxval);
  const int bytes = img.maxval > 255 ? 2 : 1;

  for (Index p = 0; p < n; ++p) {
    for (int c = 0; c < channels; ++c) {
      long level = 0;
      if (ascii) {
        if (!(in >> level)) throw InvalidArgument(fmt::format("{}: truncated pixel data", path.string()));
      } else {
        unsigned char buf[2];
        in.read(reinterpret_cast<char*>(buf), bytes);
        if (!in) throw InvalidArgument(fmt::format("{}: truncated pixel data", path.string()));
        level = bytes == 2 ? (buf[0] << 8) | buf[1] : buf[0];
      }
      if (level < 0 || level > img.maxval) {
        throw InvalidArgument(fmt::format("{}: sample {} outside [0, {}]", path.string(), level, img.maxval));
      }
      img.bands[static_cast<std::size_t>(c)][p] = static_cast<double>(level) * scale;
    }
  }
  return img;
}

void save_image(const std::filesystem::path& path, const Image& image) {
  const Index channels = image.channels();
  if (channels != 1 && channels != 3) {
    throw InvalidArgument(fmt::format("save_image: {} bands (expected 1 or 3)", channels));
  }
  if (image.width < 1 || image.height < 1) throw InvalidArgument("save_image: empty image");
  if (image.maxval < 1 || image.maxval > 65535) throw InvalidArgument("save_image: maxval out of range");
  for (const auto& band : image.bands) {
    if (band.size() != image.pixels()) throw InvalidArgument("save_image: band size does not match width*height");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument(fmt::format("cannot write image {}", path.string()));
  out << (channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << '\n'
      << image.maxval << '\n';

  const double levels = static_cast<double>(image.maxval);
  const bool wide = image.maxval > 255;
  std::string row;
  row.reserve(static_cast<std::size_t>(image.pixels() * channels * (wide ? 2 : 1)));
  for (Index p = 0; p < image.pixels(); ++p) {
    for (const auto& band : image.bands) {
      const double v = std::isfinite(band[p]) ? std::clamp(band[p], 0.0, 1.0) : 0.0;
      const auto level = static_cast<unsigned>(std::lround(v * levels));
      if (wide) row.push_back(static_cast<char>(level >> 8));
      row.push_back(static_cast<char>(level & 0xff));
    }
  }
  out.write(row.data(), static_cast<std::streamsize>(row.size()));
  if (!out) throw InvalidArgument(fmt::format("failed writing image {}", path.string()));
}

}  // namespace taf
