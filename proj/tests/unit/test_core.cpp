#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

#include "ledsna/core.hpp"
#include "ledsna/error.hpp"
#include "ledsna/segmentation.hpp"

using namespace ledsna;

namespace {

RgbImage noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : data) v = static_cast<std::uint8_t>(rng() & 0xff);
  return RgbImage(w, h, std::move(data));
}

}  // namespace

TEST_CASE("binary mask basics") {
  BinaryMask m{1, 0, 1, 1};
  CHECK(m.size() == 4);
  CHECK(m.count() == 3);
  CHECK_FALSE(m.all_set());
  CHECK(m.active() == std::vector<std::size_t>{0, 2, 3});
  CHECK(m.to_string() == "1011");
  CHECK(BinaryMask::ones(3).all_set());
  CHECK_THROWS_AS(BinaryMask({0, 2}), ContractError);
}

TEST_CASE("segment map validation") {
  CHECK_NOTHROW(SegmentMap(2, 2, {0, 0, 1, 1}));
  CHECK_THROWS_AS(SegmentMap(2, 2, {0, 0, 2, 2}), ContractError);  // gap
  CHECK_THROWS_AS(SegmentMap(2, 2, {0, 1, 1, 0}), ContractError);  // diagonal only
  CHECK_THROWS_AS(SegmentMap(2, 2, {0, 0, 0}), ContractError);
  const SegmentMap s(3, 1, {0, 1, 1});
  CHECK(s.n_segments() == 2);
  CHECK(s.sizes()[1] == 2);
}

TEST_CASE("dependency groups partition") {
  CHECK_NOTHROW(DependencyGroups({{0, 2}, {1}}, 3));
  CHECK_THROWS_WITH_AS(DependencyGroups({{0}, {0, 1}}, 2), doctest::Contains("token index 0"), ContractError);
  CHECK_THROWS_WITH_AS(DependencyGroups({{0}}, 2), doctest::Contains("token index 1"), ContractError);
  CHECK_THROWS_AS(DependencyGroups({{0}, {}}, 1), ContractError);
  CHECK_THROWS_AS(DependencyGroups({{0, 5}}, 2), ContractError);
  const auto owners = DependencyGroups({{0, 2}, {1}}, 3).owner_of_tokens();
  CHECK(owners == std::vector<std::size_t>{0, 1, 0});
}

TEST_CASE("recover_image") {
  const RgbImage img = noise_image(4, 2, 1);
  const Instance inst = Instance::image(img);
  const SegmentMap halves(4, 2, {0, 0, 1, 1, 0, 0, 1, 1});
  const Rgb hide{9, 8, 7};

  SUBCASE("all ones is identity") { CHECK(recover_image(BinaryMask::ones(2), halves, inst, hide) == inst); }
  SUBCASE("all zeros hides everything") {
    const auto out = recover_image(BinaryMask(2), halves, inst, hide).as_image();
    for (std::size_t p = 0; p < out.pixel_count(); ++p) CHECK(out.pixel(p) == hide);
  }
  SUBCASE("left half kept") {
    const auto out = recover_image(BinaryMask{1, 0}, halves, inst, hide).as_image();
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 4; ++x) CHECK(out.at(x, y) == (x < 2 ? img.at(x, y) : hide));
    }
  }
  SUBCASE("default hide colour is the image mean") {
    const RgbImage two(2, 1, std::vector<std::uint8_t>{0, 10, 255, 100, 20, 0});
    const auto out = recover_image(BinaryMask{0}, SegmentMap(2, 1, {0, 0}), Instance::image(two)).as_image();
    CHECK(out.at(0, 0) == Rgb{50, 15, 128});  // rounded half up
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(recover_image(BinaryMask(3), halves, inst, hide), ContractError);
    CHECK_THROWS_AS(recover_image(BinaryMask(2), SegmentMap(2, 1, {0, 1}), inst, hide), ContractError);
  }
}

TEST_CASE("recover_image property: pixels follow their segment bit") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 5 + static_cast<int>(rng() % 10), h = 4 + static_cast<int>(rng() % 10);
    const RgbImage img = noise_image(w, h, trial);
    const SegmentMap seg = grid_segment(w, h, 3, 4);
    BinaryMask mask(seg.n_segments());
    for (std::size_t j = 0; j < mask.size(); ++j) mask.set(j, rng() & 1u);
    const Rgb hide{1, 2, 3};
    const auto out = recover_image(mask, seg, Instance::image(img), hide).as_image();
    CHECK(out.width() == w);
    CHECK(out.height() == h);
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
      CHECK(out.pixel(p) == (mask[seg.label(p)] ? img.pixel(p) : hide));
    }
  }
}

TEST_CASE("recover_text") {
  const Instance text = Instance::text({"a", "b", "c"});
  const auto space = InterpretableSpace::for_text(DependencyGroups({{0, 2}, {1}}, 3));
  CHECK(recover_text(BinaryMask{1, 1}, space, text).tokens() == TokenSequence{"a", "b", "c"});
  CHECK(recover_text(BinaryMask{1, 0}, space, text).tokens() == TokenSequence{"a", "c"});
  CHECK(recover_text(BinaryMask{0, 1}, space, text).tokens() == TokenSequence{"b"});
  CHECK(recover_text(BinaryMask{0, 0}, space, text).tokens().empty());
  CHECK_THROWS_AS(recover_text(BinaryMask{1}, space, text), ContractError);
}

TEST_CASE("recover_text property: order kept, exactly the active groups") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    TokenSequence tokens;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back("t" + std::to_string(i));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n;) {
      const std::size_t len = std::min<std::size_t>(1 + rng() % 3, n - i);
      groups.emplace_back(perm.begin() + i, perm.begin() + i + len);
      i += len;
    }
    const auto space = InterpretableSpace::for_text(DependencyGroups(groups, n));
    BinaryMask mask(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) mask.set(g, rng() & 1u);
    TokenSequence expected;
    const auto owners = space.groups().owner_of_tokens();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[owners[i]]) expected.push_back(tokens[i]);
    }
    CHECK(recover_text(mask, space, Instance::text(tokens)).tokens() == expected);
  }
}

TEST_CASE("text instances and tokenization") {
  CHECK(split_whitespace("  the  cat\tsat\n") == TokenSequence{"the", "cat", "sat"});
  CHECK(Instance::text({}).tokens().empty());
  CHECK_THROWS_AS(Instance::text({"a", ""}), ContractError);
  CHECK_THROWS_AS(Instance::text({"a"}).as_image(), ContractError);
}
