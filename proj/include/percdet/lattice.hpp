#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace percdet {

// Critical site-percolation probability of the triangular lattice.
inline constexpr double kCriticalProbability = 0.5;

struct SiteId {
  int32_t row = 0;
  int32_t col = 0;
  friend bool operator==(SiteId a, SiteId b) { return a.row == b.row && a.col == b.col; }
};

// Finite triangular lattice with side_length^2 sites, stored as an axial
// coordinate rhombus. A site (r,c) is adjacent to (r,c+-1), (r+-1,c),
// (r-1,c+1) and (r+1,c-1), clipped to the bounds; interior sites have the
// full 6-neighborhood of the triangular lattice.
class Lattice {
 public:
  explicit Lattice(int32_t side_length);

  int32_t side() const { return side_; }
  int64_t site_count() const { return static_cast<int64_t>(side_) * side_; }

  bool contains(SiteId s) const {
    return s.row >= 0 && s.row < side_ && s.col >= 0 && s.col < side_;
  }
  int32_t index_of(SiteId s) const { return s.row * side_ + s.col; }
  SiteId site_at(int32_t index) const { return {index / side_, index % side_}; }

  // Fills `out` with the neighbors of s; returns their count (2..6).
  int neighbors(SiteId s, std::array<SiteId, 6>& out) const;
  int neighbor_indices(int32_t index, std::array<int32_t, 6>& out) const;

 private:
  int32_t side_;
};

// Axial offsets of the 6-neighborhood.
inline constexpr std::array<std::array<int32_t, 2>, 6> kNeighborOffsets = {{
    {0, 1}, {0, -1}, {1, 0}, {-1, 0}, {1, -1}, {-1, 1},
}};

// Binary marking of lattice sites, stored densely.
class SiteMask {
 public:
  explicit SiteMask(const Lattice& lattice)
      : lattice_(lattice), marked_(static_cast<size_t>(lattice.site_count()), 0) {}

  const Lattice& lattice() const { return lattice_; }
  bool test(int32_t index) const { return marked_[static_cast<size_t>(index)] != 0; }
  bool test(SiteId s) const { return test(lattice_.index_of(s)); }
  void set(int32_t index, bool value) { marked_[static_cast<size_t>(index)] = value ? 1 : 0; }
  void set(SiteId s, bool value) { set(lattice_.index_of(s), value); }

  int64_t count() const;
  std::vector<SiteId> marked_sites() const;

 private:
  Lattice lattice_;
  std::vector<uint8_t> marked_;
};

// Pixel intensities f^(N) sampled on the lattice, with a strict sup bound.
struct DiscretizedPicture {
  Lattice lattice;
  std::vector<double> values;  // indexed by linear site index
  double bound = 0.0;          // |values[i]| < bound for all i
};

// Samples a continuous picture f:[0,1]^2 -> R at the grid points
// (col/(N-1), row/(N-1)); for N = 1 the single sample is f(0,0).
// Rejects non-finite samples.
DiscretizedPicture discretize(const std::function<double(double, double)>& f, int32_t side_length);

// Convenience builders for synthetic signals.
DiscretizedPicture constant_picture(int32_t side_length, double value);
// Centered axial square of the given side and intensity on a zero background.
DiscretizedPicture square_picture(int32_t side_length, int32_t square_side, double intensity);

// True iff some axial translate of the side x side sub-lattice is entirely
// marked. side must be in [1, N].
bool contains_square(const SiteMask& mask, int32_t side);

}  // namespace percdet
