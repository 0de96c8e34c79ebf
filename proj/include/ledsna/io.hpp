#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledsna/core.hpp"
#include "ledsna/representation.hpp"

namespace ledsna::io {

/// Binary PPM (P6, maxval 255).
RgbImage decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const RgbImage& image);
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// Label maps: PGM (P5, gray value = segment id, at most 256 segments) or a
/// JSON 2-D integer array; chosen by file extension (.pgm / .json).
SegmentMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const SegmentMap& segments);
SegmentMap parse_label_json(std::string_view json_text);
std::string label_json(const SegmentMap& segments);

/// {"n_tokens": int, "groups": [[int, ...], ...]}. Throws FormatError on bad
/// JSON and ContractError when the groups are not a partition.
DependencyGroups parse_dependency_groups(std::string_view json_text);
DependencyGroups read_dependency_groups(const std::filesystem::path& path);

/// One instance per file (whole file tokenized) or one per non-blank line.
std::vector<Instance> read_text_instances(const std::filesystem::path& path, bool one_per_line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace ledsna::io
