#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "ledsna/comparison.hpp"
#include "ledsna/error.hpp"
#include "ledsna/explain.hpp"
#include "ledsna/segmentation.hpp"

using namespace ledsna;

namespace {

Instance noise_instance(int w, int h, std::uint64_t seed, std::string id = "img") {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : data) v = static_cast<std::uint8_t>(20 + rng() % 200);
  return Instance::image(RgbImage(w, h, data), std::move(id));
}

}  // namespace

TEST_CASE("top-k selection") {
  CHECK(top_k_features({0.1, 0.5, -0.2, 0.5}, 2) == std::vector<std::size_t>{1, 3});
  CHECK(top_k_features({0.1, 0.5}, 10) == std::vector<std::size_t>{1, 0});
  auto all = top_k_features({3, 1, 2, 0}, 4);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("explain with a constant black box") {
  const auto img = noise_instance(8, 8, 1);
  const auto space = InterpretableSpace::for_image(grid_segment(8, 8, 2, 2));
  ConstantClassifier bb(0.7);
  for (const auto kind : {SurrogateKind::kSvr, SurrogateKind::kRidge}) {
    ExplainConfig cfg;
    cfg.surrogate = kind;
    cfg.epsilon = 0.0;
    cfg.k = 1;
    cfg.sampling.n_samples = 100;
    const auto e = explain(img, space, bb, cfg);
    CHECK(e.f_at_x == 0.7);
    CHECK(e.err() <= 1e-12);
    for (const double a : e.attributions) CHECK(std::abs(a) <= 1e-12);
    CHECK(e.top_k.size() == 1);
    CHECK(e.fidelity.r_squared_defined);
    CHECK(e.n_samples == 101);
  }
}

TEST_CASE("explain on a quadratic-logit image") {
  const auto img = noise_instance(16, 16, 2);
  const auto space = InterpretableSpace::for_image(grid_segment(16, 16, 4, 4));
  QuadraticLogitClassifier bb(QuadraticLogit::random(16, 5), space, img);
  ExplainConfig cfg;
  cfg.sampling.seed = 3;
  const auto svr = explain(img, space, bb, cfg);
  cfg.surrogate = SurrogateKind::kRidge;
  const auto ridge = explain(img, space, bb, cfg);
  CHECK(svr.f_at_x == ridge.f_at_x);
  CHECK(svr.fidelity.r_squared > ridge.fidelity.r_squared);
  CHECK(svr.err() >= 0.0);
  CHECK(svr.fidelity.r_squared <= 1.0);
  CHECK(svr.top_k.size() == 4);
  for (std::size_t i = 1; i < svr.top_k.size(); ++i) {
    CHECK(svr.attributions[svr.top_k[i - 1]] >= svr.attributions[svr.top_k[i]]);
  }
  // Same seed, same answer.
  cfg.surrogate = SurrogateKind::kSvr;
  const auto again = explain(img, space, bb, cfg);
  CHECK(again.attributions == svr.attributions);
}

TEST_CASE("lexicon text: top feature is the strongest word present") {
  const Instance text = Instance::text({"the", "acting", "was", "superb", "but", "dull", "ending"});
  const auto space = InterpretableSpace::for_text(DependencyGroups::singletons(7));
  LexiconClassifier bb({{"superb", 2.5}, {"dull", -1.0}, {"acting", 0.3}});
  ExplainConfig cfg;
  cfg.sampling.n_samples = 500;
  cfg.k = 1;
  const auto e = explain(text, space, bb, cfg);
  CHECK(e.top_k == std::vector<std::size_t>{3});
}

TEST_CASE("explanation json") {
  const Instance text = Instance::text({"good", "plot", "bad", "acting"}, "review");
  const auto space = InterpretableSpace::for_text(DependencyGroups({{0, 1}, {2, 3}}, 4));
  LexiconClassifier bb({{"good", 1.0}, {"bad", -1.0}});
  ExplainConfig cfg;
  cfg.sampling.n_samples = 50;
  cfg.sampling.seed = 9;
  const auto e = explain(text, space, bb, cfg);
  const auto j = explanation_json(e, text, space, cfg);
  for (const char* key : {"instance_id", "surrogate", "attributions", "top_k", "g_at_x", "f_at_x", "err", "r_squared",
                          "n_samples", "seed", "config"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["instance_id"] == "review");
  CHECK(j["seed"] == 9);
  CHECK(j["attributions"][1]["tokens"] == nlohmann::json::array({"bad", "acting"}));
  CHECK(j["attributions"][1]["token_indices"] == nlohmann::json::array({2, 3}));
  CHECK(j.dump() == explanation_json(explain(text, space, bb, cfg), text, space, cfg).dump());
}

TEST_CASE("overlay") {
  const RgbImage img(4, 2, Rgb{100, 200, 50});
  const auto seg = grid_segment(4, 2, 1, 2);
  CHECK(render_overlay(img, seg, {0, 1}) == img);
  const auto dimmed = render_overlay(img, seg, {1});
  CHECK(dimmed.at(0, 0) == Rgb{30, 60, 15});
  CHECK(dimmed.at(3, 1) == img.at(3, 1));
}

TEST_CASE("surrogate comparison") {
  std::vector<CorpusEntry> corpus;
  for (int i = 0; i < 3; ++i) {
    corpus.push_back({noise_instance(8, 8, 10 + i, "i" + std::to_string(i)),
                      InterpretableSpace::for_image(grid_segment(8, 8, 2, 3))});
  }
  const ClassifierFactory factory = [](const CorpusEntry& e, std::uint64_t seed) -> std::unique_ptr<Classifier> {
    return std::make_unique<QuadraticLogitClassifier>(QuadraticLogit::random(e.space.d_prime(), seed), e.space,
                                                      e.instance);
  };
  ExplainConfig svr, ridge;
  svr.sampling.n_samples = ridge.sampling.n_samples = 200;
  ridge.surrogate = SurrogateKind::kRidge;

  SUBCASE("one row per instance and method") {
    const auto one = compare_surrogates({corpus[0]}, factory, svr, ridge, 1, 0);
    CHECK(one.instances.size() == 1);
    const auto csv = comparison_csv(one);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  }
  SUBCASE("identical methods tie everywhere") {
    const auto same = compare_surrogates(corpus, factory, svr, svr, 2, 4);
    CHECK(same.err_ties == 3);
    CHECK(same.r2_ties == 3);
    CHECK(same.err_win_rate() == 0.5);
    CHECK(same.r2_win_rate() == 0.5);
    CHECK(same.err_win_fraction() == 0.0);
    CHECK(same.first_label != same.second_label);
  }
  SUBCASE("deterministic") {
    const auto a = compare_surrogates(corpus, factory, svr, ridge, 2, 4);
    const auto b = compare_surrogates(corpus, factory, svr, ridge, 2, 4);
    CHECK(comparison_csv(a) == comparison_csv(b));
    CHECK(a.err_wins + a.err_ties <= 3);
  }
}
