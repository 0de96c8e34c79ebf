#include "ledsna/core.hpp"

#include <string>

#include "ledsna/error.hpp"

namespace ledsna {

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ContractError("image must be at least 1x1");
  data_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) set_pixel(i, fill);
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw ContractError("image must be at least 1x1");
  if (data_.size() != pixel_count() * 3) {
    throw ContractError("image buffer holds " + std::to_string(data_.size()) + " bytes, expected " +
                        std::to_string(pixel_count() * 3));
  }
}

Rgb RgbImage::mean_color() const {
  std::uint64_t sum[3] = {0, 0, 0};
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    sum[0] += data_[i];
    sum[1] += data_[i + 1];
    sum[2] += data_[i + 2];
  }
  const std::uint64_t n = pixel_count();
  auto avg = [n](std::uint64_t s) { return static_cast<std::uint8_t>((s + n / 2) / n); };
  return {avg(sum[0]), avg(sum[1]), avg(sum[2])};
}

Instance Instance::image(RgbImage img, std::string id) {
  if (img.width() < 1 || img.height() < 1) throw ContractError("image instance must be at least 1x1");
  Instance inst;
  inst.id_ = std::move(id);
  inst.payload_ = std::move(img);
  return inst;
}

Instance Instance::text(TokenSequence tokens, std::string id) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) throw ContractError("token " + std::to_string(i) + " is empty");
  }
  Instance inst;
  inst.id_ = std::move(id);
  inst.payload_ = std::move(tokens);
  return inst;
}

const RgbImage& Instance::as_image() const {
  if (!is_image()) throw ContractError("instance '" + id_ + "' is not an image");
  return std::get<RgbImage>(payload_);
}

const TokenSequence& Instance::tokens() const {
  if (!is_text()) throw ContractError("instance '" + id_ + "' is not text");
  return std::get<TokenSequence>(payload_);
}

BinaryMask::BinaryMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] > 1) throw ContractError("mask entry " + std::to_string(i) + " is not 0 or 1");
  }
}

BinaryMask::BinaryMask(std::initializer_list<int> bits) {
  bits_.reserve(bits.size());
  for (const int b : bits) {
    if (b != 0 && b != 1) throw ContractError("mask entries must be 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(b));
  }
}

std::size_t BinaryMask::count() const noexcept {
  std::size_t n = 0;
  for (const auto b : bits_) n += b;
  return n;
}

std::vector<std::size_t> BinaryMask::active() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

std::string BinaryMask::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (const auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

InterpretableSpace InterpretableSpace::for_image(SegmentMap segments) {
  InterpretableSpace space;
  space.kind_ = Modality::kImage;
  space.segments_ = std::move(segments);
  return space;
}

InterpretableSpace InterpretableSpace::for_text(DependencyGroups groups) {
  if (groups.n_tokens() == 0) throw ContractError("text instance must have at least one token");
  InterpretableSpace space;
  space.kind_ = Modality::kText;
  space.groups_ = std::move(groups);
  return space;
}

std::size_t InterpretableSpace::d_prime() const noexcept {
  return kind_ == Modality::kImage ? segments_.n_segments() : groups_.size();
}

const SegmentMap& InterpretableSpace::segment_map() const {
  if (kind_ != Modality::kImage) throw ContractError("text space has no segment map");
  return segments_;
}

const DependencyGroups& InterpretableSpace::groups() const {
  if (kind_ != Modality::kText) throw ContractError("image space has no token groups");
  return groups_;
}

Instance recover_image(const BinaryMask& mask, const SegmentMap& segments, const Instance& original,
                       std::optional<Rgb> hide_color) {
  const RgbImage& src = original.as_image();
  if (mask.size() != segments.n_segments()) {
    throw ContractError("mask length " + std::to_string(mask.size()) + " != segment count " +
                        std::to_string(segments.n_segments()));
  }
  if (src.width() != segments.width() || src.height() != segments.height()) {
    throw ContractError("image and segment map dimensions differ");
  }
  const Rgb fill = hide_color.value_or(src.mean_color());
  RgbImage out = src;
  const auto labels = segments.labels();
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (!mask[static_cast<std::size_t>(labels[p])]) out.set_pixel(p, fill);
  }
  return Instance::image(std::move(out), original.id());
}

Instance recover_text(const BinaryMask& mask, const InterpretableSpace& space, const Instance& original) {
  const DependencyGroups& groups = space.groups();
  const TokenSequence& tokens = original.tokens();
  if (mask.size() != groups.size()) {
    throw ContractError("mask length " + std::to_string(mask.size()) + " != group count " +
                        std::to_string(groups.size()));
  }
  if (tokens.size() != groups.n_tokens()) throw ContractError("token count differs from the grouped instance");
  const auto owner = groups.owner_of_tokens();
  TokenSequence kept;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (mask[owner[t]]) kept.push_back(tokens[t]);
  }
  return Instance::text(std::move(kept), original.id());
}

Instance recover(const BinaryMask& mask, const InterpretableSpace& space, const Instance& original,
                 std::optional<Rgb> hide_color) {
  if (space.kind() == Modality::kImage) return recover_image(mask, space.segment_map(), original, hide_color);
  return recover_text(mask, space, original);
}

TokenSequence split_whitespace(std::string_view text) {
  TokenSequence out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

}  // namespace ledsna
