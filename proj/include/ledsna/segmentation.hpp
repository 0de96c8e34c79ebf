#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ledsna/core.hpp"
#include "ledsna/representation.hpp"

namespace ledsna {

/// Undirected simple graph over interpretable features.
class SegmentGraph {
 public:
  SegmentGraph() = default;
  explicit SegmentGraph(std::size_t n_vertices) : neighbors_(n_vertices) {}

  /// Idempotent. Throws ContractError on self-loops or out-of-range vertices.
  void add_edge(std::size_t a, std::size_t b);

  std::size_t n_vertices() const noexcept { return neighbors_.size(); }
  std::size_t n_edges() const noexcept { return n_edges_; }
  bool has_edge(std::size_t a, std::size_t b) const;

  /// Sorted neighbor list of `v`.
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return neighbors_[v]; }

  /// All edges as (a, b) with a < b, lexicographically sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  bool operator==(const SegmentGraph&) const = default;

 private:
  std::vector<std::vector<std::size_t>> neighbors_;
  std::size_t n_edges_ = 0;
};

struct SlicParams {
  int k = 50;                 // target number of superpixels
  double compactness = 10.0;  // weight of spatial vs. color distance
  int iterations = 10;
};

/// SLIC superpixels: k-means in CIELAB+xy, then orphaned fragments are merged
/// into their largest neighbor so that each segment is 4-connected.
/// Deterministic; yields between 1 and 2k segments.
SegmentMap slic_segment(const RgbImage& image, const SlicParams& params);
SegmentMap slic_segment(const Instance& image, const SlicParams& params);

/// rows x cols rectangular tiling; pixel (x, y) lands in cell
/// (floor(y * rows / height), floor(x * cols / width)), labelled row-major.
SegmentMap grid_segment(int width, int height, int rows, int cols);
SegmentMap grid_segment(const Instance& image, int rows, int cols);

/// Edge {a, b} iff a pixel labelled a is a 4-neighbor of a pixel labelled b.
SegmentGraph build_adjacency(const SegmentMap& segments);

/// r x c grid graph, vertices in row-major order.
SegmentGraph grid_graph(std::size_t rows, std::size_t cols);

}  // namespace ledsna
