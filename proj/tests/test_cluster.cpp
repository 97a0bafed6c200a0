#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "percdet/cluster.hpp"
#include "percdet/rng.hpp"

using namespace percdet;

namespace {

ObservedImage image_from_values(int32_t n, std::vector<double> values) {
  return ObservedImage{Lattice(n), std::move(values), 1.0, false, 0.0};
}

SiteMask random_mask(int32_t n, double density, uint64_t seed) {
  const Lattice lattice(n);
  SiteMask mask(lattice);
  Xoshiro256pp rng(seed);
  for (int32_t i = 0; i < lattice.site_count(); ++i) mask.set(i, rng.unit() < density);
  return mask;
}

}  // namespace

TEST_CASE("level sets use inclusive thresholds") {
  const auto zeros = image_from_values(2, {0.0, 0.0, 0.0, 0.0});
  CHECK(super_level_set(zeros, 0.0).count() == 4);
  CHECK(super_level_set(zeros, 0.1).count() == 0);
  CHECK(sub_level_set(zeros, 0.0).count() == 4);

  const auto image = image_from_values(2, {0.2, 0.6, -0.4, 0.6});
  const auto super = super_level_set(image, 0.5);
  CHECK(super.count() == 2);
  CHECK(super.test(SiteId{0, 1}));
  CHECK(super.test(SiteId{1, 1}));
  const auto sub = sub_level_set(image, 0.3);
  CHECK(sub.count() == 1);
  CHECK(sub.test(SiteId{1, 0}));

  CHECK_THROWS_AS(sub_level_set(image, -0.1), std::invalid_argument);
}

TEST_CASE("sub level set equals super level set of the negated image") {
  Xoshiro256pp rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.unit() * 7);
    std::vector<double> values(static_cast<size_t>(n) * n);
    for (double& v : values) v = 4.0 * rng.unit() - 2.0;
    std::vector<double> negated(values.size());
    for (size_t i = 0; i < values.size(); ++i) negated[i] = -values[i];
    const auto image = image_from_values(n, values);
    const auto flipped = image_from_values(n, negated);
    const double a = 2.0 * rng.unit();
    const auto sub = sub_level_set(image, a);
    const auto super = super_level_set(flipped, a);
    for (int32_t i = 0; i < n * n; ++i) CHECK(sub.test(i) == super.test(i));
  }
}

TEST_CASE("labeling spec examples") {
  const Lattice lat3(3);
  SiteMask empty(lat3);
  CHECK(label_clusters(empty).max_cluster_size == 0);
  CHECK(label_clusters(empty).cluster_sizes.empty());

  SiteMask full(lat3);
  for (int32_t i = 0; i < 9; ++i) full.set(i, true);
  const auto full_labels = label_clusters(full);
  CHECK(full_labels.max_cluster_size == 9);
  CHECK(full_labels.cluster_sizes.size() == 1);
  CHECK(full_labels.cluster_sizes[0].first == 0);  // canonical: smallest index

  // (0,0) and (1,1) are not axial neighbors.
  SiteMask diag(lat3);
  diag.set(SiteId{0, 0}, true);
  diag.set(SiteId{1, 1}, true);
  const auto diag_labels = label_clusters(diag);
  CHECK(diag_labels.max_cluster_size == 1);
  CHECK(diag_labels.cluster_sizes.size() == 2);

  // (0,1) and (1,0) ARE axial neighbors (offset (1,-1)).
  SiteMask anti(lat3);
  anti.set(SiteId{0, 1}, true);
  anti.set(SiteId{1, 0}, true);
  CHECK(label_clusters(anti).max_cluster_size == 2);
}

TEST_CASE("labeling invariants on random masks") {
  Xoshiro256pp rng(5150);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.unit() * 12);
    const auto mask = random_mask(n, rng.unit(), rng.next());
    const auto labels = label_clusters(mask);
    int64_t total = 0;
    for (const auto& [label, size] : labels.cluster_sizes) {
      total += size;
      CHECK(labels.labels[static_cast<size_t>(label)] == label);  // canonical member
      CHECK(size > 0);
    }
    CHECK(total == mask.count());
    int64_t max_size = 0;
    for (const auto& [label, size] : labels.cluster_sizes) max_size = std::max(max_size, size);
    CHECK(max_size == labels.max_cluster_size);
    // Canonical label is the smallest site index of its cluster.
    for (int32_t i = 0; i < n * n; ++i) {
      if (labels.labels[static_cast<size_t>(i)] >= 0)
        CHECK(labels.labels[static_cast<size_t>(i)] <= i);
      CHECK((labels.labels[static_cast<size_t>(i)] >= 0) == mask.test(i));
    }
  }
}

TEST_CASE("union-find and breadth-first labelings agree exactly") {
  Xoshiro256pp rng(8080);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.unit() * 16);
    const double density = 0.1 + 0.8 * rng.unit();
    const auto mask = random_mask(n, density, rng.next());
    const auto a = label_clusters(mask);
    const auto b = label_clusters_oracle(mask);
    CHECK(a.labels == b.labels);  // canonical labels make comparison exact
    CHECK(a.cluster_sizes == b.cluster_sizes);
    CHECK(a.max_cluster_size == b.max_cluster_size);
  }
}

TEST_CASE("max cluster statistic") {
  const auto model = NoiseModel::gaussian();
  const int n = 6;
  // Noiseless bright picture: full super level set.
  ObservedImage ones{Lattice(n), std::vector<double>(36, 1.0), 1.0, false, 0.0};
  CHECK(max_cluster_statistic(ones, 0.5, Side::plus) == 36);
  ObservedImage zeros{Lattice(n), std::vector<double>(36, 0.0), 1.0, false, 0.0};
  CHECK(max_cluster_statistic(zeros, 0.5, Side::plus) == 0);

  // Marked set {(0,0),(0,1),(2,2)} on N=3: sizes {2,1}.
  std::vector<double> values(9, 0.0);
  values[0] = 1.0;
  values[1] = 1.0;
  values[8] = 1.0;
  const auto image = image_from_values(3, values);
  CHECK(max_cluster_statistic(image, 0.5, Side::plus) == 2);
  // Minus side mirrors it.
  std::vector<double> negated(9, 0.0);
  for (size_t i = 0; i < 9; ++i) negated[i] = -values[i];
  const auto flipped = image_from_values(3, negated);
  CHECK(max_cluster_statistic(flipped, 0.5, Side::minus) == 2);
}

TEST_CASE("level-set nesting and statistic monotonicity in the threshold") {
  const auto model = NoiseModel::gaussian();
  Xoshiro256pp rng(1717);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.unit() * 10);
    const auto image = apply_noise(constant_picture(n, 0.0), 1.0, model, rng.next());
    double a_low = rng.unit();
    double a_high = a_low + rng.unit();
    const auto outer = super_level_set(image, a_low);
    const auto inner = super_level_set(image, a_high);
    for (int32_t i = 0; i < n * n; ++i)
      if (inner.test(i)) CHECK(outer.test(i));
    CHECK(max_cluster_statistic(image, a_high, Side::plus) <=
          max_cluster_statistic(image, a_low, Side::plus));
    CHECK(max_cluster_statistic(image, a_high, Side::minus) <=
          max_cluster_statistic(image, a_low, Side::minus));
  }
}

TEST_CASE("crossing clusters") {
  const Lattice lat4(4);
  SiteMask full(lat4);
  for (int32_t i = 0; i < 16; ++i) full.set(i, true);
  CHECK(crossing_cluster_exists(full));

  SiteMask empty(lat4);
  CHECK(!crossing_cluster_exists(empty));

  // A single column is connected via the (+-1, 0) offsets and touches both
  // extreme rows.
  SiteMask column(lat4);
  for (int32_t r = 0; r < 4; ++r) column.set(SiteId{r, 2}, true);
  CHECK(crossing_cluster_exists(column));

  SiteMask row(lat4);
  for (int32_t c = 0; c < 4; ++c) row.set(SiteId{1, c}, true);
  CHECK(crossing_cluster_exists(row));

  SiteMask lonely(lat4);
  lonely.set(SiteId{1, 1}, true);
  CHECK(!crossing_cluster_exists(lonely));

  // Touching both extreme rows with two different clusters must not count.
  SiteMask split(lat4);
  split.set(SiteId{0, 0}, true);
  split.set(SiteId{3, 3}, true);
  CHECK(!crossing_cluster_exists(split));
}
