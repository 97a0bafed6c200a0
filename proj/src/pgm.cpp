#include "percdet/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace percdet {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (c == '#') in.unget();
  return token;
}

int32_t parse_header_int(std::istream& in, const char* what) {
  const std::string token = next_token(in);
  if (token.empty()) throw std::runtime_error(std::string("malformed PGM header: missing ") + what);
  try {
    size_t used = 0;
    const long value = std::stol(token, &used);
    if (used != token.size() || value < 0) throw std::invalid_argument(token);
    return static_cast<int32_t>(value);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("malformed PGM header: bad ") + what + " '" + token + "'");
  }
}

}  // namespace

GrayscaleImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM file: " + path);
  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P5")
    throw std::runtime_error("bad PGM magic '" + magic + "' (expected P2 or P5)");
  GrayscaleImage image;
  image.width = parse_header_int(in, "width");
  image.height = parse_header_int(in, "height");
  image.maxval = parse_header_int(in, "maxval");
  if (image.width < 1 || image.height < 1)
    throw std::runtime_error("malformed PGM header: non-positive dimensions");
  if (image.maxval < 1 || image.maxval > 65535)
    throw std::runtime_error("malformed PGM header: maxval out of [1, 65535]");
  const int64_t total = static_cast<int64_t>(image.width) * image.height;
  image.pixels.reserve(static_cast<size_t>(total));
  if (magic == "P2") {
    for (int64_t i = 0; i < total; ++i) {
      const std::string token = next_token(in);
      if (token.empty()) throw std::runtime_error("unexpected end of pixel data");
      int32_t value = 0;
      try {
        size_t used = 0;
        value = static_cast<int32_t>(std::stol(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw std::runtime_error("bad pixel value '" + token + "'");
      }
      if (value < 0 || value > image.maxval)
        throw std::runtime_error("pixel value " + std::to_string(value) + " exceeds maxval");
      image.pixels.push_back(value);
    }
  } else {
    // Exactly one whitespace byte separates the header from the payload.
    const int bytes_per_sample = image.maxval > 255 ? 2 : 1;
    std::vector<char> payload(static_cast<size_t>(total) * bytes_per_sample);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size()))
      throw std::runtime_error("unexpected end of pixel data");
    for (int64_t i = 0; i < total; ++i) {
      int32_t value;
      if (bytes_per_sample == 1) {
        value = static_cast<uint8_t>(payload[static_cast<size_t>(i)]);
      } else {
        // Big-endian two-byte samples.
        value = (static_cast<uint8_t>(payload[static_cast<size_t>(2 * i)]) << 8) |
                static_cast<uint8_t>(payload[static_cast<size_t>(2 * i + 1)]);
      }
      if (value > image.maxval)
        throw std::runtime_error("pixel value " + std::to_string(value) + " exceeds maxval");
      image.pixels.push_back(value);
    }
  }
  return image;
}

void write_pgm(const GrayscaleImage& image, const std::string& path, bool binary) {
  if (image.width < 1 || image.height < 1) throw std::invalid_argument("empty image");
  if (image.maxval < 1 || image.maxval > 65535)
    throw std::invalid_argument("maxval out of [1, 65535]");
  if (image.pixels.size() != static_cast<size_t>(image.width) * image.height)
    throw std::invalid_argument("pixel count does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM file: " + path);
  out << (binary ? "P5" : "P2") << "\n"
      << image.width << " " << image.height << "\n"
      << image.maxval << "\n";
  if (binary) {
    const int bytes_per_sample = image.maxval > 255 ? 2 : 1;
    for (int32_t v : image.pixels) {
      if (bytes_per_sample == 2) out.put(static_cast<char>((v >> 8) & 0xff));
      out.put(static_cast<char>(v & 0xff));
    }
  } else {
    for (size_t i = 0; i < image.pixels.size(); ++i) {
      out << image.pixels[i];
      out << (((i + 1) % static_cast<size_t>(image.width)) == 0 ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("failed writing PGM file: " + path);
}

ObservedImage image_to_observed(const GrayscaleImage& image, double r, double baseline,
                                int32_t side_length, double sigma) {
  if (!(r > 0.0)) throw std::invalid_argument("detector range r must be > 0");
  if (side_length < 1) throw std::invalid_argument("side_length must be >= 1");
  if (side_length > image.width || side_length > image.height)
    throw std::invalid_argument("requested lattice is larger than the image");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  const double b = baseline > 0.0 ? baseline : image.maxval / 2.0;
  const int32_t row0 = (image.height - side_length) / 2;
  const int32_t col0 = (image.width - side_length) / 2;
  ObservedImage out{Lattice(side_length), {}, sigma, true, r};
  out.values.resize(static_cast<size_t>(side_length) * side_length);
  for (int32_t rr = 0; rr < side_length; ++rr) {
    for (int32_t cc = 0; cc < side_length; ++cc) {
      const int32_t pixel =
          image.pixels[static_cast<size_t>(row0 + rr) * image.width + (col0 + cc)];
      const double y = (pixel - b) / b * r;
      out.values[static_cast<size_t>(rr) * side_length + cc] = std::clamp(y, -r, r);
    }
  }
  return out;
}

GrayscaleImage observed_to_pgm(const ObservedImage& image, double r, int32_t maxval) {
  if (!(r > 0.0)) throw std::invalid_argument("detector range r must be > 0");
  if (maxval < 1 || maxval > 65535) throw std::invalid_argument("maxval out of [1, 65535]");
  const int32_t n = image.lattice.side();
  GrayscaleImage out;
  out.width = n;
  out.height = n;
  out.maxval = maxval;
  out.pixels.resize(static_cast<size_t>(n) * n);
  const double baseline = maxval / 2.0;
  for (size_t i = 0; i < image.values.size(); ++i) {
    const double y = std::clamp(image.values[i], -r, r);
    const auto pixel = static_cast<int32_t>(std::lround(baseline * (1.0 + y / r)));
    out.pixels[i] = std::clamp(pixel, 0, maxval);
  }
  return out;
}

}  // namespace percdet
