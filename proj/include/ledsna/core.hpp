#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ledsna/representation.hpp"

namespace ledsna {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  auto operator<=>(const Rgb&) const = default;
};

/// 8-bit RGB raster, row-major, channels interleaved.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {});
  RgbImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  Rgb pixel(std::size_t index) const {
    const std::size_t o = index * 3;
    return {data_[o], data_[o + 1], data_[o + 2]};
  }
  Rgb at(int x, int y) const { return pixel(static_cast<std::size_t>(y) * width_ + x); }
  void set_pixel(std::size_t index, Rgb c) {
    const std::size_t o = index * 3;
    data_[o] = c.r;
    data_[o + 1] = c.g;
    data_[o + 2] = c.b;
  }
  void set(int x, int y, Rgb c) { set_pixel(static_cast<std::size_t>(y) * width_ + x, c); }

  std::span<const std::uint8_t> data() const noexcept { return data_; }

  /// Per-channel mean, rounded to nearest.
  Rgb mean_color() const;

  bool operator==(const RgbImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

using TokenSequence = std::vector<std::string>;

/// Something a classifier can score: an image or a token sequence.
class Instance {
 public:
  Instance() = default;

  /// Throws ContractError on an empty raster.
  static Instance image(RgbImage img, std::string id = {});
  /// Throws ContractError if any token is empty. An empty sequence is legal
  /// here because fully-masked perturbations are still scored.
  static Instance text(TokenSequence tokens, std::string id = {});

  bool is_image() const noexcept { return std::holds_alternative<RgbImage>(payload_); }
  bool is_text() const noexcept { return std::holds_alternative<TokenSequence>(payload_); }
  const RgbImage& as_image() const;
  const TokenSequence& tokens() const;
  const std::string& id() const noexcept { return id_; }

  bool operator==(const Instance&) const = default;

 private:
  std::string id_;
  std::variant<RgbImage, TokenSequence> payload_;
};

/// Presence/absence vector over interpretable features.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(std::size_t size, bool value = false) : bits_(size, value ? 1 : 0) {}
  /// Throws ContractError if any entry is not 0 or 1.
  explicit BinaryMask(std::vector<std::uint8_t> bits);
  BinaryMask(std::initializer_list<int> bits);

  static BinaryMask ones(std::size_t size) { return BinaryMask(size, true); }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  std::size_t count() const noexcept;
  bool all_set() const noexcept { return count() == size(); }
  /// Indices of set bits, ascending.
  std::vector<std::size_t> active() const;
  std::string to_string() const;

  auto operator<=>(const BinaryMask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

enum class Modality { kImage, kText };

/// Mapping between an instance and its d′-dimensional binary representation.
class InterpretableSpace {
 public:
  static InterpretableSpace for_image(SegmentMap segments);
  static InterpretableSpace for_text(DependencyGroups groups);

  Modality kind() const noexcept { return kind_; }
  std::size_t d_prime() const noexcept;
  /// Throws ContractError for text spaces.
  const SegmentMap& segment_map() const;
  /// Throws ContractError for image spaces.
  const DependencyGroups& groups() const;

 private:
  Modality kind_ = Modality::kImage;
  SegmentMap segments_;
  DependencyGroups groups_;
};

/// Keeps pixels of active segments and paints the rest with `hide_color`
/// (per-image mean when unset).
Instance recover_image(const BinaryMask& mask, const SegmentMap& segments, const Instance& original,
                       std::optional<Rgb> hide_color = std::nullopt);

/// Keeps, in original order, the tokens whose group bit is set.
Instance recover_text(const BinaryMask& mask, const InterpretableSpace& space, const Instance& original);

/// Dispatches on the space's modality.
Instance recover(const BinaryMask& mask, const InterpretableSpace& space, const Instance& original,
                 std::optional<Rgb> hide_color = std::nullopt);

/// Whitespace tokenizer used for plain-text inputs.
TokenSequence split_whitespace(std::string_view text);

}  // namespace ledsna
