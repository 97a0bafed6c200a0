#include "percdet/lattice.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace percdet {

Lattice::Lattice(int32_t side_length) : side_(side_length) {
  if (side_length < 1) throw std::invalid_argument("lattice side_length must be >= 1");
}

int Lattice::neighbors(SiteId s, std::array<SiteId, 6>& out) const {
  int count = 0;
  for (const auto& off : kNeighborOffsets) {
    const SiteId n{s.row + off[0], s.col + off[1]};
    if (contains(n)) out[count++] = n;
  }
  return count;
}

int Lattice::neighbor_indices(int32_t index, std::array<int32_t, 6>& out) const {
  std::array<SiteId, 6> sites;
  const int count = neighbors(site_at(index), sites);
  for (int i = 0; i < count; ++i) out[i] = index_of(sites[i]);
  return count;
}

int64_t SiteMask::count() const {
  int64_t total = 0;
  for (uint8_t m : marked_) total += m;
  return total;
}

std::vector<SiteId> SiteMask::marked_sites() const {
  std::vector<SiteId> sites;
  sites.reserve(static_cast<size_t>(count()));
  for (int32_t i = 0; i < static_cast<int32_t>(marked_.size()); ++i) {
    if (marked_[static_cast<size_t>(i)]) sites.push_back(lattice_.site_at(i));
  }
  return sites;
}

namespace {

double strict_bound(double max_abs) {
  double bound = max_abs + std::numeric_limits<double>::epsilon();
  if (bound <= max_abs) bound = std::nextafter(max_abs, std::numeric_limits<double>::infinity());
  return bound;
}

}  // namespace

DiscretizedPicture discretize(const std::function<double(double, double)>& f, int32_t side_length) {
  Lattice lattice(side_length);
  std::vector<double> values(static_cast<size_t>(lattice.site_count()));
  const double denom = side_length > 1 ? static_cast<double>(side_length - 1) : 1.0;
  double max_abs = 0.0;
  for (int32_t r = 0; r < side_length; ++r) {
    for (int32_t c = 0; c < side_length; ++c) {
      const double x = side_length > 1 ? c / denom : 0.0;
      const double y = side_length > 1 ? r / denom : 0.0;
      const double v = f(x, y);
      if (!std::isfinite(v)) throw std::invalid_argument("picture value is not finite");
      values[static_cast<size_t>(r) * side_length + c] = v;
      max_abs = std::max(max_abs, std::fabs(v));
    }
  }
  return {lattice, std::move(values), strict_bound(max_abs)};
}

DiscretizedPicture constant_picture(int32_t side_length, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("picture value is not finite");
  Lattice lattice(side_length);
  std::vector<double> values(static_cast<size_t>(lattice.site_count()), value);
  return {lattice, std::move(values), strict_bound(std::fabs(value))};
}

DiscretizedPicture square_picture(int32_t side_length, int32_t square_side, double intensity) {
  if (!std::isfinite(intensity)) throw std::invalid_argument("picture value is not finite");
  if (square_side < 0 || square_side > side_length)
    throw std::invalid_argument("square side must lie in [0, N]");
  Lattice lattice(side_length);
  std::vector<double> values(static_cast<size_t>(lattice.site_count()), 0.0);
  const int32_t r0 = (side_length - square_side) / 2;
  const int32_t c0 = (side_length - square_side) / 2;
  for (int32_t r = r0; r < r0 + square_side; ++r) {
    for (int32_t c = c0; c < c0 + square_side; ++c) {
      values[static_cast<size_t>(r) * side_length + c] = intensity;
    }
  }
  return {lattice, std::move(values), strict_bound(std::fabs(intensity))};
}

bool contains_square(const SiteMask& mask, int32_t side) {
  const int32_t n = mask.lattice().side();
  if (side < 1 || side > n) throw std::invalid_argument("square side must lie in [1, N]");
  // Prefix sums over the marked indicator; each translate is then O(1).
  const int32_t w = n + 1;
  std::vector<int64_t> prefix(static_cast<size_t>(w) * w, 0);
  for (int32_t r = 0; r < n; ++r) {
    for (int32_t c = 0; c < n; ++c) {
      prefix[static_cast<size_t>(r + 1) * w + (c + 1)] =
          prefix[static_cast<size_t>(r) * w + (c + 1)] +
          prefix[static_cast<size_t>(r + 1) * w + c] -
          prefix[static_cast<size_t>(r) * w + c] + (mask.test(r * n + c) ? 1 : 0);
    }
  }
  const int64_t want = static_cast<int64_t>(side) * side;
  for (int32_t r = 0; r + side <= n; ++r) {
    for (int32_t c = 0; c + side <= n; ++c) {
      const int64_t sum = prefix[static_cast<size_t>(r + side) * w + (c + side)] -
                          prefix[static_cast<size_t>(r) * w + (c + side)] -
                          prefix[static_cast<size_t>(r + side) * w + c] +
                          prefix[static_cast<size_t>(r) * w + c];
      if (sum == want) return true;
    }
  }
  return false;
}

}  // namespace percdet
