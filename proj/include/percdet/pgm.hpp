#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percdet/noise.hpp"

namespace percdet {

struct GrayscaleImage {
  int32_t width = 0;
  int32_t height = 0;
  int32_t maxval = 0;
  std::vector<int32_t> pixels;  // row-major, values in [0, maxval]
};

// Parses plain (P2) and binary (P5) portable graymaps, including '#' comments
// and 2-byte big-endian samples for maxval > 255. Malformed inputs produce
// distinct diagnostics.
GrayscaleImage load_pgm(const std::string& path);

void write_pgm(const GrayscaleImage& image, const std::string& path, bool binary = true);

// Maps pixel integers to detector intensities: Y = (pixel - baseline)/baseline * r,
// clamped to [-r, r], after center-cropping to N x N. baseline <= 0 selects
// the default maxval/2. The result carries truncated = true, range = r.
ObservedImage image_to_observed(const GrayscaleImage& image, double r, double baseline,
                                int32_t side_length, double sigma = 1.0);

// Inverse quantization used by the simulate command:
// pixel = round(baseline * (1 + Y/r)) clamped to [0, maxval]. The quantization
// error on Y is at most r/maxval.
GrayscaleImage observed_to_pgm(const ObservedImage& image, double r, int32_t maxval = 255);

}  // namespace percdet
