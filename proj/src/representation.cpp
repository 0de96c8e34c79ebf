#include "ledsna/representation.hpp"

#include <algorithm>
#include <string>

#include "ledsna/error.hpp"

namespace ledsna {

bool segments_are_connected(int width, int height, std::span<const std::int32_t> labels,
                            std::size_t n_segments) {
  std::vector<std::uint8_t> seen_label(n_segments, 0);
  std::vector<std::uint8_t> visited(labels.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (visited[start]) continue;
    const auto label = labels[start];
    if (seen_label[label]) return false;  // second component of the same label
    seen_label[label] = 1;
    visited[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(p % width);
      const int y = static_cast<int>(p / width);
      auto visit = [&](std::size_t q) {
        if (!visited[q] && labels[q] == label) {
          visited[q] = 1;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < width) visit(p + 1);
      if (y > 0) visit(p - width);
      if (y + 1 < height) visit(p + width);
    }
  }
  return true;
}

SegmentMap::SegmentMap(int width, int height, std::vector<std::int32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width < 1 || height < 1) throw ContractError("segment map must be at least 1x1");
  if (labels_.size() != static_cast<std::size_t>(width) * height) {
    throw ContractError("segment map has " + std::to_string(labels_.size()) + " labels for a " +
                        std::to_string(width) + "x" + std::to_string(height) + " image");
  }
  std::int32_t max_label = -1;
  for (const auto l : labels_) {
    if (l < 0) throw ContractError("negative segment label " + std::to_string(l));
    max_label = std::max(max_label, l);
  }
  sizes_.assign(static_cast<std::size_t>(max_label) + 1, 0);
  for (const auto l : labels_) ++sizes_[l];
  for (std::size_t s = 0; s < sizes_.size(); ++s) {
    if (sizes_[s] == 0) {
      throw ContractError("segment labels are not gapless: label " + std::to_string(s) + " is unused");
    }
  }
  if (!segments_are_connected(width_, height_, labels_, sizes_.size())) {
    throw ContractError("segment map contains a segment that is not 4-connected");
  }
}

DependencyGroups::DependencyGroups(std::vector<std::vector<std::size_t>> groups, std::size_t n_tokens)
    : groups_(std::move(groups)), n_tokens_(n_tokens) {
  std::vector<std::uint8_t> owned(n_tokens, 0);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].empty()) throw ContractError("dependency group " + std::to_string(g) + " is empty");
    for (const auto t : groups_[g]) {
      if (t >= n_tokens) {
        throw ContractError("token index " + std::to_string(t) + " out of range (" +
                            std::to_string(n_tokens) + " tokens)");
      }
      if (owned[t]) throw ContractError("token index " + std::to_string(t) + " appears in more than one group");
      owned[t] = 1;
    }
  }
  for (std::size_t t = 0; t < n_tokens; ++t) {
    if (!owned[t]) throw ContractError("token index " + std::to_string(t) + " is not covered by any group");
  }
}

DependencyGroups DependencyGroups::singletons(std::size_t n_tokens) {
  std::vector<std::vector<std::size_t>> groups(n_tokens);
  for (std::size_t t = 0; t < n_tokens; ++t) groups[t] = {t};
  return DependencyGroups(std::move(groups), n_tokens);
}

std::vector<std::size_t> DependencyGroups::owner_of_tokens() const {
  std::vector<std::size_t> owner(n_tokens_);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (const auto t : groups_[g]) owner[t] = g;
  }
  return owner;
}

}  // namespace ledsna
