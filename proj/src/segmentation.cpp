#include "ledsna/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "ledsna/error.hpp"

namespace ledsna {

void SegmentGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= n_vertices() || b >= n_vertices()) throw ContractError("edge endpoint out of range");
  if (a == b) throw ContractError("self-loop on vertex " + std::to_string(a));
  auto& na = neighbors_[a];
  const auto it = std::lower_bound(na.begin(), na.end(), b);
  if (it != na.end() && *it == b) return;
  na.insert(it, b);
  auto& nb = neighbors_[b];
  nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  ++n_edges_;
}

bool SegmentGraph::has_edge(std::size_t a, std::size_t b) const {
  if (a >= n_vertices() || b >= n_vertices()) return false;
  return std::binary_search(neighbors_[a].begin(), neighbors_[a].end(), b);
}

std::vector<std::pair<std::size_t, std::size_t>> SegmentGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(n_edges_);
  for (std::size_t a = 0; a < neighbors_.size(); ++a) {
    for (const auto b : neighbors_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

SegmentGraph grid_graph(std::size_t rows, std::size_t cols) {
  SegmentGraph g(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t v = r * cols + c;
      if (c + 1 < cols) g.add_edge(v, v + 1);
      if (r + 1 < rows) g.add_edge(v, v + cols);
    }
  }
  return g;
}

SegmentGraph build_adjacency(const SegmentMap& segments) {
  SegmentGraph g(segments.n_segments());
  const int w = segments.width();
  const int h = segments.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto a = static_cast<std::size_t>(segments.label(x, y));
      if (x + 1 < w) {
        const auto b = static_cast<std::size_t>(segments.label(x + 1, y));
        if (a != b) g.add_edge(a, b);
      }
      if (y + 1 < h) {
        const auto b = static_cast<std::size_t>(segments.label(x, y + 1));
        if (a != b) g.add_edge(a, b);
      }
    }
  }
  return g;
}

SegmentMap grid_segment(int width, int height, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ContractError("grid needs at least one row and one column");
  if (rows > height || cols > width) {
    throw ContractError("grid " + std::to_string(rows) + "x" + std::to_string(cols) + " exceeds image " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  std::vector<std::int32_t> labels(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    // Pixel coordinate y falls in cell floor(y * rows / height).
    const int r = static_cast<int>(static_cast<long long>(y) * rows / height);
    for (int x = 0; x < width; ++x) {
      const int c = static_cast<int>(static_cast<long long>(x) * cols / width);
      labels[static_cast<std::size_t>(y) * width + x] = r * cols + c;
    }
  }
  return SegmentMap(width, height, std::move(labels));
}

SegmentMap grid_segment(const Instance& image, int rows, int cols) {
  const RgbImage& img = image.as_image();
  return grid_segment(img.width(), img.height(), rows, cols);
}

namespace {

using Lab = std::array<double, 3>;

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

Lab to_lab(Rgb p) {
  const double r = srgb_to_linear(p.r / 255.0);
  const double g = srgb_to_linear(p.g / 255.0);
  const double b = srgb_to_linear(p.b / 255.0);
  // D65 white point.
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = (0.2126729 * r + 0.7151522 * g + 0.0721750 * b) / 1.0;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  auto f = [](double t) { return t > 0.008856 ? std::cbrt(t) : 7.787 * t + 16.0 / 116.0; };
  const double fx = f(x), fy = f(y), fz = f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct Center {
  Lab lab;
  double x;
  double y;
};

double sq(double v) { return v * v; }

// Union-find over connected components, tracking region sizes.
class Regions {
 public:
  explicit Regions(std::vector<std::size_t> sizes) : parent_(sizes.size()), size_(std::move(sizes)) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void merge_into(std::size_t from, std::size_t into) {
    from = find(from);
    into = find(into);
    if (from == into) return;
    parent_[from] = into;
    size_[into] += size_[from];
  }
  std::size_t size(std::size_t root) const { return size_[root]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

// Splits labels into 4-connected components, keeps the largest component of
// each label (if it is not tiny), and merges every other component into the
// largest adjacent region. Returns gapless labels in scan order.
std::vector<std::int32_t> enforce_connectivity(int w, int h, const std::vector<std::int32_t>& labels,
                                               std::size_t n_labels, std::size_t min_size) {
  const std::size_t n = labels.size();
  std::vector<std::int64_t> comp(n, -1);
  std::vector<std::size_t> comp_size;
  std::vector<std::int32_t> comp_label;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const auto id = static_cast<std::int64_t>(comp_size.size());
    const auto label = labels[s];
    std::size_t count = 0;
    comp[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++count;
      const int x = static_cast<int>(p % w);
      const int y = static_cast<int>(p / w);
      auto visit = [&](std::size_t q) {
        if (comp[q] < 0 && labels[q] == label) {
          comp[q] = id;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    comp_size.push_back(count);
    comp_label.push_back(label);
  }
  const std::size_t n_comp = comp_size.size();

  std::vector<std::set<std::size_t>> comp_adj(n_comp);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const auto a = static_cast<std::size_t>(comp[p]);
      if (x + 1 < w && comp[p + 1] != comp[p]) {
        comp_adj[a].insert(static_cast<std::size_t>(comp[p + 1]));
        comp_adj[static_cast<std::size_t>(comp[p + 1])].insert(a);
      }
      if (y + 1 < h && comp[p + w] != comp[p]) {
        comp_adj[a].insert(static_cast<std::size_t>(comp[p + w]));
        comp_adj[static_cast<std::size_t>(comp[p + w])].insert(a);
      }
    }
  }

  // Largest component per label; ties go to the earliest in scan order.
  std::vector<std::int64_t> main_comp(n_labels, -1);
  for (std::size_t c = 0; c < n_comp; ++c) {
    auto& m = main_comp[comp_label[c]];
    if (m < 0 || comp_size[c] > comp_size[static_cast<std::size_t>(m)]) m = static_cast<std::int64_t>(c);
  }
  std::vector<std::size_t> orphans;
  for (std::size_t c = 0; c < n_comp; ++c) {
    const bool is_main = main_comp[comp_label[c]] == static_cast<std::int64_t>(c);
    if (!is_main || comp_size[c] < min_size) orphans.push_back(c);
  }
  std::stable_sort(orphans.begin(), orphans.end(),
                   [&](std::size_t a, std::size_t b) { return comp_size[a] < comp_size[b]; });

  Regions regions(comp_size);
  for (const auto c : orphans) {
    const std::size_t self = regions.find(c);
    std::size_t best = self;
    for (const auto nb : comp_adj[c]) {
      const std::size_t r = regions.find(nb);
      if (r == self) continue;
      if (best == self || regions.size(r) > regions.size(best) || (regions.size(r) == regions.size(best) && r < best)) {
        best = r;
      }
    }
    if (best != self) regions.merge_into(self, best);
  }

  std::vector<std::int64_t> relabel(n_comp, -1);
  std::int32_t next = 0;
  std::vector<std::int32_t> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t root = regions.find(static_cast<std::size_t>(comp[p]));
    if (relabel[root] < 0) relabel[root] = next++;
    out[p] = static_cast<std::int32_t>(relabel[root]);
  }
  return out;
}

}  // namespace

SegmentMap slic_segment(const RgbImage& image, const SlicParams& params) {
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = image.pixel_count();
  if (params.k < 1) throw ContractError("slic: k must be at least 1");
  if (static_cast<std::size_t>(params.k) > n) {
    throw ContractError("slic: k=" + std::to_string(params.k) + " exceeds pixel count " + std::to_string(n));
  }
  if (!(params.compactness > 0.0)) throw ContractError("slic: compactness must be positive");
  if (params.iterations < 0) throw ContractError("slic: iterations must be non-negative");

  std::vector<Lab> lab(n);
  for (std::size_t p = 0; p < n; ++p) lab[p] = to_lab(image.pixel(p));

  const double step = std::sqrt(static_cast<double>(n) / params.k);
  int nx = std::clamp(static_cast<int>(std::lround(w / step)), 1, w);
  int ny = std::clamp(static_cast<int>(std::lround(h / step)), 1, h);
  while (nx * ny > 2 * params.k) {
    if (nx >= ny) --nx;
    else --ny;
  }
  const double step_x = static_cast<double>(w) / nx;
  const double step_y = static_cast<double>(h) / ny;

  auto gradient = [&](int x, int y) {
    if (x <= 0 || y <= 0 || x >= w - 1 || y >= h - 1) return std::numeric_limits<double>::infinity();
    const auto& l = lab[static_cast<std::size_t>(y) * w + x - 1];
    const auto& r = lab[static_cast<std::size_t>(y) * w + x + 1];
    const auto& u = lab[static_cast<std::size_t>(y - 1) * w + x];
    const auto& d = lab[static_cast<std::size_t>(y + 1) * w + x];
    double g = 0.0;
    for (int c = 0; c < 3; ++c) g += sq(r[c] - l[c]) + sq(d[c] - u[c]);
    return g;
  };

  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int cx = std::min(w - 1, static_cast<int>((i + 0.5) * step_x));
      int cy = std::min(h - 1, static_cast<int>((j + 0.5) * step_y));
      // Nudge the seed to the lowest-gradient position in its 3x3 neighborhood.
      double best = gradient(cx, cy);
      int bx = cx, by = cy;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double g = gradient(cx + dx, cy + dy);
          if (g < best) {
            best = g;
            bx = cx + dx;
            by = cy + dy;
          }
        }
      }
      cx = bx;
      cy = by;
      centers.push_back({lab[static_cast<std::size_t>(cy) * w + cx], static_cast<double>(cx), static_cast<double>(cy)});
    }
  }

  const double s = std::max(step_x, step_y);
  const double spatial_weight = sq(params.compactness / s);
  std::vector<std::int32_t> labels(n, -1);
  std::vector<double> dist(n);

  auto assign = [&] {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(labels.begin(), labels.end(), -1);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int x0 = std::max(0, static_cast<int>(std::floor(c.x - 2 * s)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + 2 * s)));
      const int y0 = std::max(0, static_cast<int>(std::floor(c.y - 2 * s)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + 2 * s)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          const auto& v = lab[p];
          const double dc = sq(v[0] - c.lab[0]) + sq(v[1] - c.lab[1]) + sq(v[2] - c.lab[2]);
          const double ds = sq(x - c.x) + sq(y - c.y);
          const double d = dc + ds * spatial_weight;
          if (d < dist[p]) {
            dist[p] = d;
            labels[p] = static_cast<std::int32_t>(k);
          }
        }
      }
    }
  };

  for (int it = 0; it < params.iterations; ++it) {
    assign();
    std::vector<std::array<double, 5>> acc(centers.size(), {0, 0, 0, 0, 0});
    std::vector<std::size_t> count(centers.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      if (labels[p] < 0) continue;
      auto& a = acc[labels[p]];
      a[0] += lab[p][0];
      a[1] += lab[p][1];
      a[2] += lab[p][2];
      a[3] += static_cast<double>(p % w);
      a[4] += static_cast<double>(p / w);
      ++count[labels[p]];
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (count[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(count[k]);
      centers[k] = {{acc[k][0] * inv, acc[k][1] * inv, acc[k][2] * inv}, acc[k][3] * inv, acc[k][4] * inv};
    }
  }
  assign();

  // Windows of 2S cover the plane, but guard against stragglers anyway.
  for (std::size_t p = 0; p < n; ++p) {
    if (labels[p] >= 0) continue;
    const double x = static_cast<double>(p % w), y = static_cast<double>(p / w);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double d = sq(x - centers[k].x) + sq(y - centers[k].y);
      if (d < best) {
        best = d;
        labels[p] = static_cast<std::int32_t>(k);
      }
    }
  }

  const auto min_size = static_cast<std::size_t>(std::max(1.0, step_x * step_y / 4.0));
  return SegmentMap(w, h, enforce_connectivity(w, h, labels, centers.size(), min_size));
}

SegmentMap slic_segment(const Instance& image, const SlicParams& params) {
  return slic_segment(image.as_image(), params);
}

}  // namespace ledsna
