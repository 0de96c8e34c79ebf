#include <algorithm>
#include <random>
#include <set>

#include <doctest.h>

#include "../support/label_maps.hpp"
#include "../support/oracles.hpp"
#include "ledsna/error.hpp"
#include "ledsna/segmentation.hpp"

using namespace ledsna;

namespace {

std::set<oracle::Edge> edge_set(const SegmentGraph& g) {
  const auto e = g.edges();
  return {e.begin(), e.end()};
}

std::vector<std::int32_t> to_vec(std::span<const std::int32_t> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("segment graph") {
  SegmentGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  g.add_edge(2, 1);
  CHECK(g.n_edges() == 2);
  CHECK(g.has_edge(1, 2));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(g.neighbors(1) == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(g.add_edge(1, 1), ContractError);
  CHECK_THROWS_AS(g.add_edge(0, 3), ContractError);
}

TEST_CASE("grid segmentation") {
  SUBCASE("exact tiling") {
    const auto s = grid_segment(4, 4, 2, 2);
    CHECK(s.n_segments() == 4);
    for (auto size : s.sizes()) CHECK(size == 4);
    CHECK(s.label(3, 0) == 1);
    CHECK(s.label(0, 3) == 2);
  }
  SUBCASE("single cell") { CHECK(grid_segment(7, 3, 1, 1).n_segments() == 1); }
  SUBCASE("uneven split: widths {3,2}, heights {2,1}") {
    const auto s = grid_segment(5, 3, 2, 2);
    CHECK(to_vec(s.labels()) == std::vector<std::int32_t>{0, 0, 0, 1, 1,  //
                                                          0, 0, 0, 1, 1,  //
                                                          2, 2, 2, 3, 3});
  }
  SUBCASE("too many cells") {
    CHECK_THROWS_AS(grid_segment(3, 3, 4, 1), ContractError);
    CHECK_THROWS_AS(grid_segment(3, 3, 1, 0), ContractError);
  }
}

TEST_CASE("adjacency") {
  SUBCASE("2x2 grid has no diagonal") {
    const auto g = build_adjacency(grid_segment(4, 4, 2, 2));
    CHECK(g.n_vertices() == 4);
    CHECK(g.n_edges() == 4);
    CHECK_FALSE(g.has_edge(0, 3));
    CHECK_FALSE(g.has_edge(1, 2));
  }
  SUBCASE("single segment") {
    const auto g = build_adjacency(grid_segment(3, 3, 1, 1));
    CHECK(g.n_vertices() == 1);
    CHECK(g.n_edges() == 0);
  }
  SUBCASE("grid_graph edge count and agreement with pixel grid") {
    for (std::size_t r = 1; r <= 6; ++r) {
      for (std::size_t c = 1; c <= 6; ++c) {
        const auto g = grid_graph(r, c);
        CHECK(g.n_edges() == 2 * r * c - r - c);
        CHECK(g == build_adjacency(grid_segment(12, 12, static_cast<int>(r), static_cast<int>(c))));
      }
    }
  }
  SUBCASE("random label maps match the pixel-pair oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
      const int w = 3 + static_cast<int>(rng() % 20), h = 3 + static_cast<int>(rng() % 20);
      const int regions = 1 + static_cast<int>(rng() % 12);
      const auto s = testing_support::random_label_map(w, h, regions, rng);
      CHECK(edge_set(build_adjacency(s)) == oracle::pixel_pair_edges(w, h, to_vec(s.labels())));
    }
  }
}

TEST_CASE("slic") {
  SUBCASE("uniform image, k=1") {
    const RgbImage img(12, 9, Rgb{80, 90, 100});
    const auto s = slic_segment(img, SlicParams{1, 10.0, 10});
    CHECK(s.n_segments() == 1);
  }
  SUBCASE("black/white halves, k=2") {
    RgbImage img(20, 10, Rgb{0, 0, 0});
    for (int y = 0; y < 10; ++y) {
      for (int x = 10; x < 20; ++x) img.set(x, y, Rgb{255, 255, 255});
    }
    const auto s = slic_segment(img, SlicParams{2, 40.0, 10});
    REQUIRE(s.n_segments() == 2);
    // The colour field has exactly two connected components, the halves.
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 20; ++x) CHECK(s.label(x, y) == s.label(x < 10 ? 0 : 19, 0));
    }
  }
  SUBCASE("invariants on noisy images") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const int w = 16 + static_cast<int>(rng() % 30), h = 16 + static_cast<int>(rng() % 30);
      std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
      for (auto& v : data) v = static_cast<std::uint8_t>(rng() & 0xff);
      const RgbImage img(w, h, data);
      const int k = 2 + static_cast<int>(rng() % 30);
      const auto s = slic_segment(img, SlicParams{k, 10.0, 5});
      CHECK(s.n_segments() >= 1);
      CHECK(s.n_segments() <= static_cast<std::size_t>(2 * k));
      CHECK(segments_are_connected(w, h, s.labels(), s.n_segments()));
      CHECK(s == slic_segment(img, SlicParams{k, 10.0, 5}));
    }
  }
  SUBCASE("k larger than the pixel count") {
    CHECK_THROWS_AS(slic_segment(RgbImage(2, 2), SlicParams{5, 10.0, 10}), ContractError);
  }
}
