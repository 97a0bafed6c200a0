#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "percdet/lattice.hpp"
#include "percdet/noise.hpp"

namespace percdet {

// Decomposition of a mask into connected clusters. Labels are canonical: the
// label of a cluster is the smallest linear site index it contains, and
// unmarked sites carry -1.
struct ClusterLabeling {
  std::vector<int32_t> labels;
  std::vector<std::pair<int32_t, int64_t>> cluster_sizes;  // (label, size), ascending by label
  int64_t max_cluster_size = 0;
  uint64_t ops = 0;  // elementary union-find steps, consumed by complexity probes
};

// Super level set {s : Y(s) >= a}.
SiteMask super_level_set(const ObservedImage& image, double a);
// Sub level set {s : Y(s) <= -a}; requires a >= 0.
SiteMask sub_level_set(const ObservedImage& image, double a);

// Union-find labeling (path halving, union by size).
ClusterLabeling label_clusters(const SiteMask& mask);
// Independent breadth-first labeling used as an equivalence oracle; shares no
// code with label_clusters beyond the lattice API.
ClusterLabeling label_clusters_oracle(const SiteMask& mask);

enum class Side { plus, minus };

// T_+(a) resp. T_-(a): size of the largest cluster of the super resp. sub
// level set.
int64_t max_cluster_statistic(const ObservedImage& image, double a, Side side);

// True iff some cluster touches both row 0 and row N-1, or both column 0 and
// column N-1.
bool crossing_cluster_exists(const SiteMask& mask);

// Same crossing predicate evaluated on an existing labeling of the lattice.
bool labeling_has_crossing(const Lattice& lattice, const ClusterLabeling& labeling);

}  // namespace percdet
