#include "ledsna/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ledsna/error.hpp"

namespace ledsna::io {

namespace {

// Reads the whitespace/comment separated header fields of a PNM file.
class PnmHeader {
 public:
  explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2) throw FormatError("truncated PNM header");
    pos_ = 2;
    return {static_cast<char>(bytes_[0]), static_cast<char>(bytes_[1])};
  }

  long number() {
    skip_space_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) throw FormatError("PNM header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw FormatError("malformed PNM header");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw FormatError("malformed PNM header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

RgbImage decode_ppm(std::span<const std::uint8_t> bytes) {
  PnmHeader header(bytes);
  if (header.magic() != "P6") throw FormatError("not a binary PPM (P6) image");
  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (maxval != 255) throw FormatError("only PPM maxval 255 is supported, got " + std::to_string(maxval));
  if (width < 1 || height < 1) throw FormatError("PPM has zero size");
  const std::size_t offset = header.raster_offset();
  const std::size_t need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() < offset + need) throw FormatError("PPM raster is truncated");
  std::vector<std::uint8_t> data(bytes.begin() + offset, bytes.begin() + offset + need);
  return RgbImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.data().begin(), image.data().end());
  return out;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_ppm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  const auto bytes = encode_ppm(image);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

SegmentMap parse_label_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("label map is not valid JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw FormatError("label map must be a non-empty 2-D integer array");
  }
  const std::size_t height = j.size();
  const std::size_t width = j[0].size();
  std::vector<std::int32_t> labels;
  labels.reserve(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    if (!j[y].is_array() || j[y].size() != width) throw FormatError("label map rows have unequal lengths");
    for (const auto& v : j[y]) {
      if (!v.is_number_integer()) throw FormatError("label map entries must be integers");
      labels.push_back(v.get<std::int32_t>());
    }
  }
  return SegmentMap(static_cast<int>(width), static_cast<int>(height), std::move(labels));
}

std::string label_json(const SegmentMap& segments) {
  nlohmann::json rows = nlohmann::json::array();
  for (int y = 0; y < segments.height(); ++y) {
    nlohmann::json row = nlohmann::json::array();
    for (int x = 0; x < segments.width(); ++x) row.push_back(segments.label(x, y));
    rows.push_back(std::move(row));
  }
  return rows.dump();
}

SegmentMap read_label_map(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".json") return parse_label_json(read_file(path));
  if (ext != ".pgm") throw FormatError("label map must be .pgm or .json: " + path.string());
  const auto bytes = read_bytes(path);
  PnmHeader header(bytes);
  if (header.magic() != "P5") throw FormatError(path.string() + ": not a binary PGM (P5)");
  const long width = header.number();
  const long height = header.number();
  const long maxval = header.number();
  if (maxval < 1 || maxval > 255) throw FormatError(path.string() + ": PGM label maps must be 8-bit");
  if (width < 1 || height < 1) throw FormatError(path.string() + ": PGM has zero size");
  const std::size_t offset = header.raster_offset();
  const std::size_t need = static_cast<std::size_t>(width) * height;
  if (bytes.size() < offset + need) throw FormatError(path.string() + ": PGM raster is truncated");
  std::vector<std::int32_t> labels(bytes.begin() + offset, bytes.begin() + offset + need);
  return SegmentMap(static_cast<int>(width), static_cast<int>(height), std::move(labels));
}

void write_label_map(const std::filesystem::path& path, const SegmentMap& segments) {
  const std::string ext = lower_extension(path);
  if (ext == ".json") {
    write_file(path, label_json(segments));
    return;
  }
  if (ext != ".pgm") throw FormatError("label map must be .pgm or .json: " + path.string());
  if (segments.n_segments() > 256) {
    throw ContractError("PGM label maps hold at most 256 segments, have " + std::to_string(segments.n_segments()));
  }
  std::string out = "P5\n" + std::to_string(segments.width()) + " " + std::to_string(segments.height()) + "\n255\n";
  for (const auto l : segments.labels()) out.push_back(static_cast<char>(static_cast<std::uint8_t>(l)));
  write_file(path, out);
}

DependencyGroups parse_dependency_groups(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dependency file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n_tokens") || !j.contains("groups")) {
    throw FormatError("dependency file needs \"n_tokens\" and \"groups\"");
  }
  if (!j["n_tokens"].is_number_unsigned()) throw FormatError("\"n_tokens\" must be a non-negative integer");
  if (!j["groups"].is_array()) throw FormatError("\"groups\" must be an array of arrays");
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& g : j["groups"]) {
    if (!g.is_array()) throw FormatError("\"groups\" must be an array of arrays");
    std::vector<std::size_t> members;
    for (const auto& t : g) {
      if (!t.is_number_integer()) throw FormatError("token indices must be integers");
      if (t.get<long long>() < 0) throw ContractError("token index " + t.dump() + " is negative");
      members.push_back(t.get<std::size_t>());
    }
    groups.push_back(std::move(members));
  }
  return DependencyGroups(std::move(groups), j["n_tokens"].get<std::size_t>());
}

DependencyGroups read_dependency_groups(const std::filesystem::path& path) {
  return parse_dependency_groups(read_file(path));
}

std::vector<Instance> read_text_instances(const std::filesystem::path& path, bool one_per_line) {
  const std::string text = read_file(path);
  const std::string stem = path.stem().string();
  std::vector<Instance> out;
  if (!one_per_line) {
    auto tokens = split_whitespace(text);
    if (tokens.empty()) throw FormatError(path.string() + " contains no tokens");
    out.push_back(Instance::text(std::move(tokens), stem));
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    out.push_back(Instance::text(std::move(tokens), stem + ":" + std::to_string(line_no)));
  }
  if (out.empty()) throw FormatError(path.string() + " contains no tokens");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i < bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = i;
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (const char c : text) {
    if (c == '=') break;
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    const int v = lookup[static_cast<unsigned char>(c)];
    if (v < 0) throw FormatError("invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace ledsna::io
