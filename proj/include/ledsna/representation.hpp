#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ledsna {

/// Per-pixel superpixel labels, row-major. Labels are exactly {0..n-1} and
/// every segment is a single 4-connected pixel region; the constructor
/// rejects anything else.
class SegmentMap {
 public:
  SegmentMap() = default;
  SegmentMap(int width, int height, std::vector<std::int32_t> labels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return labels_.size(); }
  std::size_t n_segments() const noexcept { return sizes_.size(); }

  std::int32_t label(int x, int y) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::int32_t label(std::size_t index) const { return labels_[index]; }
  std::span<const std::int32_t> labels() const noexcept { return labels_; }

  /// Pixel count of each segment.
  std::span<const std::size_t> sizes() const noexcept { return sizes_; }

  bool operator==(const SegmentMap& other) const {
    return width_ == other.width_ && height_ == other.height_ && labels_ == other.labels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int32_t> labels_;
  std::vector<std::size_t> sizes_;
};

/// True when every label in `labels` forms one 4-connected region.
bool segments_are_connected(int width, int height, std::span<const std::int32_t> labels,
                            std::size_t n_segments);

/// A partition of token indices into groups that are toggled together.
class DependencyGroups {
 public:
  DependencyGroups() = default;

  /// Throws ContractError naming the first offending token index when the
  /// groups are not disjoint, not covering [0, n_tokens), or contain an empty group.
  DependencyGroups(std::vector<std::vector<std::size_t>> groups, std::size_t n_tokens);

  /// One group per token.
  static DependencyGroups singletons(std::size_t n_tokens);

  std::size_t size() const noexcept { return groups_.size(); }
  std::size_t n_tokens() const noexcept { return n_tokens_; }
  const std::vector<std::vector<std::size_t>>& groups() const noexcept { return groups_; }
  const std::vector<std::size_t>& operator[](std::size_t i) const { return groups_[i]; }

  /// Group index owning each token.
  std::vector<std::size_t> owner_of_tokens() const;

  bool operator==(const DependencyGroups&) const = default;

 private:
  std::vector<std::vector<std::size_t>> groups_;
  std::size_t n_tokens_ = 0;
};

}  // namespace ledsna
