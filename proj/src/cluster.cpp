#include "percdet/cluster.hpp"

#include <algorithm>
#include <stdexcept>

namespace percdet {

SiteMask super_level_set(const ObservedImage& image, double a) {
  SiteMask mask(image.lattice);
  const int64_t total = image.lattice.site_count();
  for (int32_t i = 0; i < total; ++i) mask.set(i, image.values[static_cast<size_t>(i)] >= a);
  return mask;
}

SiteMask sub_level_set(const ObservedImage& image, double a) {
  if (a < 0.0) throw std::invalid_argument("sub_level_set requires a >= 0");
  SiteMask mask(image.lattice);
  const int64_t total = image.lattice.site_count();
  for (int32_t i = 0; i < total; ++i) mask.set(i, image.values[static_cast<size_t>(i)] <= -a);
  return mask;
}

namespace {

struct UnionFind {
  std::vector<int32_t> parent;  // -1: unmarked
  std::vector<int32_t> size;
  uint64_t ops = 0;

  explicit UnionFind(int64_t total)
      : parent(static_cast<size_t>(total), -1), size(static_cast<size_t>(total), 0) {}

  int32_t find(int32_t x) {
    while (parent[static_cast<size_t>(x)] != x) {
      // Path halving.
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
      ++ops;
    }
    ++ops;
    return x;
  }

  void unite(int32_t a, int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[static_cast<size_t>(a)] < size[static_cast<size_t>(b)]) std::swap(a, b);
    parent[static_cast<size_t>(b)] = a;
    size[static_cast<size_t>(a)] += size[static_cast<size_t>(b)];
    ++ops;
  }
};

ClusterLabeling finalize_labels(const SiteMask& mask, UnionFind& uf) {
  const int64_t total = mask.lattice().site_count();
  ClusterLabeling out;
  out.labels.assign(static_cast<size_t>(total), -1);
  std::vector<int32_t> canonical(static_cast<size_t>(total), -1);
  std::vector<int64_t> counts(static_cast<size_t>(total), 0);
  // Scanning in index order makes the first member of each cluster its
  // smallest site index, which becomes the canonical label.
  for (int32_t i = 0; i < total; ++i) {
    if (uf.parent[static_cast<size_t>(i)] == -1) continue;
    const int32_t root = uf.find(i);
    if (canonical[static_cast<size_t>(root)] == -1) canonical[static_cast<size_t>(root)] = i;
    const int32_t label = canonical[static_cast<size_t>(root)];
    out.labels[static_cast<size_t>(i)] = label;
    ++counts[static_cast<size_t>(label)];
  }
  for (int32_t i = 0; i < total; ++i) {
    if (counts[static_cast<size_t>(i)] > 0) {
      out.cluster_sizes.emplace_back(i, counts[static_cast<size_t>(i)]);
      out.max_cluster_size = std::max(out.max_cluster_size, counts[static_cast<size_t>(i)]);
    }
  }
  out.ops = uf.ops;
  return out;
}

}  // namespace

ClusterLabeling label_clusters(const SiteMask& mask) {
  const Lattice& lattice = mask.lattice();
  const int32_t n = lattice.side();
  UnionFind uf(lattice.site_count());
  for (int32_t r = 0; r < n; ++r) {
    for (int32_t c = 0; c < n; ++c) {
      const int32_t idx = r * n + c;
      if (!mask.test(idx)) continue;
      uf.parent[static_cast<size_t>(idx)] = idx;
      uf.size[static_cast<size_t>(idx)] = 1;
      ++uf.ops;
      // Backward half of the 6-neighborhood in row-major order.
      if (c > 0 && uf.parent[static_cast<size_t>(idx - 1)] != -1) uf.unite(idx, idx - 1);
      if (r > 0) {
        if (uf.parent[static_cast<size_t>(idx - n)] != -1) uf.unite(idx, idx - n);
        if (c + 1 < n && uf.parent[static_cast<size_t>(idx - n + 1)] != -1)
          uf.unite(idx, idx - n + 1);
      }
    }
  }
  return finalize_labels(mask, uf);
}

ClusterLabeling label_clusters_oracle(const SiteMask& mask) {
  const Lattice& lattice = mask.lattice();
  const int64_t total = lattice.site_count();
  ClusterLabeling out;
  out.labels.assign(static_cast<size_t>(total), -1);
  std::vector<int32_t> queue;
  std::array<SiteId, 6> nb;
  for (int32_t start = 0; start < total; ++start) {
    if (!mask.test(start) || out.labels[static_cast<size_t>(start)] != -1) continue;
    // First unvisited member in index order is the smallest in its cluster.
    int64_t cluster_size = 0;
    queue.clear();
    queue.push_back(start);
    out.labels[static_cast<size_t>(start)] = start;
    while (!queue.empty()) {
      const int32_t cur = queue.back();
      queue.pop_back();
      ++cluster_size;
      const int count = lattice.neighbors(lattice.site_at(cur), nb);
      for (int i = 0; i < count; ++i) {
        const int32_t ni = lattice.index_of(nb[i]);
        if (mask.test(ni) && out.labels[static_cast<size_t>(ni)] == -1) {
          out.labels[static_cast<size_t>(ni)] = start;
          queue.push_back(ni);
        }
      }
    }
    out.cluster_sizes.emplace_back(start, cluster_size);
    out.max_cluster_size = std::max(out.max_cluster_size, cluster_size);
  }
  return out;
}

int64_t max_cluster_statistic(const ObservedImage& image, double a, Side side) {
  const SiteMask mask = side == Side::plus ? super_level_set(image, a) : sub_level_set(image, a);
  return label_clusters(mask).max_cluster_size;
}

bool crossing_cluster_exists(const SiteMask& mask) {
  return labeling_has_crossing(mask.lattice(), label_clusters(mask));
}

bool labeling_has_crossing(const Lattice& lattice, const ClusterLabeling& labeling) {
  const int32_t n = lattice.side();
  const int64_t total = lattice.site_count();
  std::vector<uint8_t> seen(static_cast<size_t>(total), 0);
  // Row 0 against row N-1.
  for (int32_t c = 0; c < n; ++c) {
    const int32_t l = labeling.labels[static_cast<size_t>(c)];
    if (l >= 0) seen[static_cast<size_t>(l)] = 1;
  }
  for (int32_t c = 0; c < n; ++c) {
    const int32_t l = labeling.labels[static_cast<size_t>((n - 1) * n + c)];
    if (l >= 0 && seen[static_cast<size_t>(l)]) return true;
  }
  std::fill(seen.begin(), seen.end(), 0);
  // Column 0 against column N-1.
  for (int32_t r = 0; r < n; ++r) {
    const int32_t l = labeling.labels[static_cast<size_t>(r) * n];
    if (l >= 0) seen[static_cast<size_t>(l)] = 1;
  }
  for (int32_t r = 0; r < n; ++r) {
    const int32_t l = labeling.labels[static_cast<size_t>(r) * n + (n - 1)];
    if (l >= 0 && seen[static_cast<size_t>(l)]) return true;
  }
  return false;
}

}  // namespace percdet
