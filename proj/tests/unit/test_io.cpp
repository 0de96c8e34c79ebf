#include <filesystem>

#include <unistd.h>

#include <doctest.h>

#include "ledsna/error.hpp"
#include "ledsna/io.hpp"
#include "ledsna/segmentation.hpp"

using namespace ledsna;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ledsna-io-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("ppm round trip") {
  const RgbImage img(3, 2, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18});
  CHECK(io::decode_ppm(io::encode_ppm(img)) == img);
  const std::string commented = "P6\n# a comment\n1 1\n255\n\x01\x02\x03";
  const std::vector<std::uint8_t> bytes(commented.begin(), commented.end());
  CHECK(io::decode_ppm(bytes).at(0, 0) == Rgb{1, 2, 3});
  const std::string ascii = "P3\n1 1\n255\n1 2 3\n";
  CHECK_THROWS_AS(io::decode_ppm(std::vector<std::uint8_t>(ascii.begin(), ascii.end())), FormatError);
  const std::string truncated = "P6\n2 2\n255\n\x01\x02";
  CHECK_THROWS_AS(io::decode_ppm(std::vector<std::uint8_t>(truncated.begin(), truncated.end())), FormatError);
  const auto path = scratch("img.ppm");
  io::write_ppm(path, img);
  CHECK(io::read_ppm(path) == img);
}

TEST_CASE("label maps") {
  const auto seg = grid_segment(5, 3, 2, 2);
  for (const char* name : {"labels.pgm", "labels.json"}) {
    const auto path = scratch(name);
    io::write_label_map(path, seg);
    CHECK(io::read_label_map(path) == seg);
  }
  CHECK(io::parse_label_json(io::label_json(seg)) == seg);
  CHECK_THROWS_AS(io::parse_label_json("[[0, 1], [0]]"), FormatError);
  CHECK_THROWS_AS(io::parse_label_json("[[0, 1], [1, 0]]"), ContractError);
}

TEST_CASE("dependency files") {
  const auto g = io::parse_dependency_groups(R"({"n_tokens":3,"groups":[[0,2],[1]]})");
  CHECK(g == DependencyGroups({{0, 2}, {1}}, 3));
  CHECK_THROWS_AS(io::parse_dependency_groups(R"({"n_tokens":2,"groups":[[0],[0,1]]})"), ContractError);
  CHECK_THROWS_AS(io::parse_dependency_groups(R"({"groups":[[0]]})"), FormatError);
  CHECK_THROWS_AS(io::parse_dependency_groups("[[0]"), FormatError);
}

TEST_CASE("text instances") {
  const auto path = scratch("reviews.txt");
  io::write_file(path, "good film\n\n  bad   plot \n");
  const auto whole = io::read_text_instances(path, false);
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].id() == "reviews");
  CHECK(whole[0].tokens() == TokenSequence{"good", "film", "bad", "plot"});
  const auto lines = io::read_text_instances(path, true);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].id() == "reviews:1");
  CHECK(lines[1].id() == "reviews:3");
  CHECK(lines[1].tokens() == TokenSequence{"bad", "plot"});
}

TEST_CASE("base64") {
  const std::string text = "any carnal pleas";
  for (std::size_t n = 0; n <= text.size(); ++n) {
    const std::vector<std::uint8_t> bytes(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(n));
    CHECK(io::base64_decode(io::base64_encode(bytes)) == bytes);
  }
  CHECK(io::base64_encode(std::vector<std::uint8_t>{'M', 'a'}) == "TWE=");
  CHECK_THROWS_AS(io::base64_decode("T*E="), FormatError);
}
