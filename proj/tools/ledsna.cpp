// ledsna: explain black-box image and text classifiers with dependency-aware
// sampling and kernel SVR surrogates.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ledsna/comparison.hpp"
#include "ledsna/error.hpp"
#include "ledsna/explain.hpp"
#include "ledsna/io.hpp"
#include "ledsna/log.hpp"
#include "ledsna/segmentation.hpp"

namespace fs = std::filesystem;
using namespace ledsna;

namespace {

constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

// Flag misuse detected after parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SurrogateFlags {
  std::string blackbox;
  std::string surrogate = "svr";
  std::string kernel = "gaussian";
  std::optional<double> gamma;
  double c = 1.0;
  double epsilon = 0.01;
  double lambda = 1.0;
  std::size_t n_samples = 1000;
  std::optional<double> sigma;
  std::string metric;
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;
  std::size_t parallelism = 1;
  std::string hide_color;
  double tol = 1e-3;
};

struct SegmentationFlags {
  std::string slic;
  std::string grid;
  std::string labels;
};

struct TextFlags {
  std::string deps;
  std::size_t window = 1;
  bool per_line = false;
};

void add_surrogate_flags(CLI::App* cmd, SurrogateFlags& f, bool require_blackbox = true) {
  auto* bb = cmd->add_option("--blackbox", f.blackbox,
                             "builtin:<name>[:args] | subprocess:<cmdline> | http:<url>");
  if (require_blackbox) bb->required();
  cmd->add_option("--surrogate", f.surrogate, "svr or ridge")->check(CLI::IsMember({"svr", "ridge"}));
  cmd->add_option("--kernel", f.kernel, "SVR kernel")->check(CLI::IsMember({"gaussian", "linear"}));
  cmd->add_option("--gamma", f.gamma, "gaussian kernel width (default 1/d')")->check(CLI::PositiveNumber);
  cmd->add_option("--c", f.c, "SVR box constraint C")->check(CLI::PositiveNumber);
  cmd->add_option("--epsilon", f.epsilon, "SVR tube half-width")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda", f.lambda, "ridge strength")->check(CLI::NonNegativeNumber);
  cmd->add_option("--n-samples", f.n_samples, "perturbations to draw")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", f.sigma, "proximity kernel width")->check(CLI::PositiveNumber);
  cmd->add_option("--metric", f.metric, "proximity distance")->check(CLI::IsMember({"cosine", "l2"}));
  cmd->add_option("--k", f.k, "number of top features to report")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "sampling seed");
  cmd->add_option("--batch-size", f.batch_size, "black-box batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--parallelism", f.parallelism, "concurrent black-box batches")->check(CLI::PositiveNumber);
  cmd->add_option("--hide-color", f.hide_color, "R,G,B fill for hidden segments (default: image mean)");
  cmd->add_option("--tol", f.tol, "SVR KKT tolerance")->check(CLI::PositiveNumber);
}

void add_segmentation_flags(CLI::App* cmd, SegmentationFlags& f) {
  auto* slic = cmd->add_option("--slic", f.slic, "SLIC superpixels: k,compactness,iterations");
  auto* grid = cmd->add_option("--grid", f.grid, "rectangular grid: RxC");
  auto* labels = cmd->add_option("--labels", f.labels, "precomputed label map (.pgm or .json)");
  slic->excludes(grid)->excludes(labels);
  grid->excludes(labels);
}

void add_text_flags(CLI::App* cmd, TextFlags& f) {
  auto* deps = cmd->add_option("--deps", f.deps, "dependency-group JSON file");
  cmd->add_option("--window", f.window, "built-in grouper run length")->check(CLI::PositiveNumber)->excludes(deps);
  cmd->add_flag("--per-line", f.per_line, "one text instance per line");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto end = s.find(sep, pos);
    out.push_back(s.substr(pos, end - pos));
    if (end == std::string::npos) return out;
    pos = end + 1;
  }
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    T value;
    if constexpr (std::is_floating_point_v<T>) value = static_cast<T>(std::stod(text, &used));
    else value = static_cast<T>(std::stoll(text, &used));
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::logic_error&) {
    throw UsageError("bad " + what + ": '" + text + "'");
  }
}

ExplainConfig make_config(const SurrogateFlags& f) {
  ExplainConfig cfg;
  cfg.surrogate = f.surrogate == "ridge" ? SurrogateKind::kRidge : SurrogateKind::kSvr;
  cfg.kernel = f.kernel == "linear" ? KernelKind::kLinear : KernelKind::kGaussian;
  cfg.gamma = f.gamma;
  cfg.c = f.c;
  cfg.epsilon = f.epsilon;
  cfg.lambda = f.lambda;
  cfg.k = f.k;
  cfg.solver.tol = f.tol;
  cfg.sampling.n_samples = f.n_samples;
  cfg.sampling.seed = f.seed;
  cfg.sampling.sigma = f.sigma;
  if (!f.metric.empty()) cfg.sampling.metric = f.metric == "l2" ? DistanceMetric::kL2 : DistanceMetric::kCosine;
  cfg.sampling.query.batch_size = f.batch_size;
  cfg.sampling.query.parallelism = f.parallelism;
  if (!f.hide_color.empty()) {
    const auto parts = split(f.hide_color, ',');
    if (parts.size() != 3) throw UsageError("--hide-color expects R,G,B");
    Rgb c;
    std::uint8_t* channels[] = {&c.r, &c.g, &c.b};
    for (int i = 0; i < 3; ++i) {
      const int v = parse_number<int>(parts[i], "--hide-color channel");
      if (v < 0 || v > 255) throw UsageError("--hide-color channels must be in 0..255");
      *channels[i] = static_cast<std::uint8_t>(v);
    }
    cfg.sampling.hide_color = c;
  }
  return cfg;
}

// Segmentation for one image; `sidecar` is consulted when no flag is given.
SegmentMap segment_image(const RgbImage& image, const SegmentationFlags& f, const std::optional<fs::path>& sidecar) {
  if (!f.slic.empty()) {
    const auto parts = split(f.slic, ',');
    if (parts.empty() || parts.size() > 3) throw UsageError("--slic expects k[,compactness[,iterations]]");
    SlicParams p;
    p.k = parse_number<int>(parts[0], "--slic k");
    if (parts.size() > 1) p.compactness = parse_number<double>(parts[1], "--slic compactness");
    if (parts.size() > 2) p.iterations = parse_number<int>(parts[2], "--slic iterations");
    return slic_segment(image, p);
  }
  if (!f.grid.empty()) {
    const auto parts = split(f.grid, 'x');
    if (parts.size() != 2) throw UsageError("--grid expects RxC, e.g. 4x4");
    return grid_segment(image.width(), image.height(), parse_number<int>(parts[0], "--grid rows"),
                        parse_number<int>(parts[1], "--grid cols"));
  }
  const fs::path labels = !f.labels.empty() ? fs::path(f.labels) : sidecar.value_or(fs::path());
  if (labels.empty()) throw UsageError("choose a segmentation: --slic, --grid or --labels");
  SegmentMap segments = io::read_label_map(labels);
  if (segments.width() != image.width() || segments.height() != image.height()) {
    throw ContractError("label map " + labels.string() + " does not match the image size");
  }
  return segments;
}

DependencyGroups text_groups(const Instance& text, const TextFlags& f) {
  if (!f.deps.empty()) {
    try {
      return group_tokens(text, FixedGroups(io::read_dependency_groups(f.deps)));
    } catch (const Error& e) {
      throw UsageError("invalid dependency file " + f.deps + ": " + e.what());
    }
  }
  return group_tokens(text, WindowGrouper(f.window));
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    io::write_file(out_path, text);
  }
}

std::unique_ptr<Classifier> blackbox_for(const std::string& spec, const InterpretableSpace& space,
                                         const Instance& instance, std::uint64_t seed) {
  BlackBoxContext ctx;
  ctx.space = &space;
  ctx.reference = &instance;
  ctx.default_seed = seed;
  return make_classifier(spec, ctx);
}

int run_explain_image(const std::string& image_path, const SegmentationFlags& seg, const SurrogateFlags& sf,
                      const std::string& out, const std::string& overlay, const std::string& labels_out) {
  const ExplainConfig cfg = make_config(sf);
  const Instance instance = Instance::image(io::read_ppm(image_path), fs::path(image_path).stem().string());
  const InterpretableSpace space = InterpretableSpace::for_image(segment_image(instance.as_image(), seg, std::nullopt));
  if (!labels_out.empty()) io::write_label_map(labels_out, space.segment_map());
  auto blackbox = blackbox_for(sf.blackbox, space, instance, sf.seed);
  const Explanation e = explain(instance, space, *blackbox, cfg);
  emit(out, explanation_json(e, instance, space, cfg).dump(2) + "\n");
  if (!overlay.empty()) io::write_ppm(overlay, render_overlay(instance.as_image(), space.segment_map(), e.top_k));
  return 0;
}

int run_explain_text(const std::string& text_path, const TextFlags& tf, const SurrogateFlags& sf,
                     const std::string& out) {
  if (tf.per_line && !tf.deps.empty()) throw UsageError("--deps describes a single instance; drop --per-line");
  const ExplainConfig cfg = make_config(sf);
  const auto instances = io::read_text_instances(text_path, tf.per_line);
  nlohmann::json results = nlohmann::json::array();
  for (const auto& instance : instances) {
    const InterpretableSpace space = InterpretableSpace::for_text(text_groups(instance, tf));
    auto blackbox = blackbox_for(sf.blackbox, space, instance, sf.seed);
    const Explanation e = explain(instance, space, *blackbox, cfg);
    results.push_back(explanation_json(e, instance, space, cfg));
  }
  emit(out, (tf.per_line ? results : results.front()).dump(2) + "\n");
  return 0;
}

int run_compare(const std::string& corpus_dir, const SegmentationFlags& seg, const TextFlags& tf,
                const SurrogateFlags& sf, const std::string& methods, std::size_t trials, const std::string& out) {
  const auto names = split(methods, ',');
  if (names.size() != 2) throw UsageError("--methods expects two surrogates, e.g. svr,ridge");
  std::vector<ExplainConfig> configs;
  for (const auto& name : names) {
    if (name != "svr" && name != "ridge") throw UsageError("unknown surrogate '" + name + "' in --methods");
    SurrogateFlags copy = sf;
    copy.surrogate = name;
    configs.push_back(make_config(copy));
  }
  if (!fs::is_directory(corpus_dir)) throw UsageError("--corpus must be a directory: " + corpus_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    const auto name = entry.path().filename().string();
    const auto ext = entry.path().extension().string();
    if (!entry.is_regular_file()) continue;
    if (ext == ".ppm" || (ext == ".txt" && name.find(".deps.") == std::string::npos)) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("corpus " + corpus_dir + " holds no .ppm or .txt instances");

  std::vector<CorpusEntry> corpus;
  for (const auto& file : files) {
    const auto stem = file.stem().string();
    if (file.extension() == ".ppm") {
      Instance inst = Instance::image(io::read_ppm(file), stem);
      std::optional<fs::path> sidecar;
      for (const char* ext : {".labels.json", ".labels.pgm"}) {
        const auto candidate = file.parent_path() / (stem + ext);
        if (fs::exists(candidate)) sidecar = candidate;
      }
      auto space = InterpretableSpace::for_image(segment_image(inst.as_image(), seg, sidecar));
      corpus.push_back({std::move(inst), std::move(space)});
      continue;
    }
    const auto deps = file.parent_path() / (stem + ".deps.json");
    for (auto& inst : io::read_text_instances(file, tf.per_line)) {
      TextFlags local = tf;
      if (local.deps.empty() && !tf.per_line && fs::exists(deps)) local.deps = deps.string();
      auto space = InterpretableSpace::for_text(text_groups(inst, local));
      corpus.push_back({std::move(inst), std::move(space)});
    }
  }

  const auto factory = [&](const CorpusEntry& entry, std::uint64_t seed) {
    return blackbox_for(sf.blackbox, entry.space, entry.instance, seed);
  };
  const ComparisonReport report = compare_surrogates(corpus, factory, configs[0], configs[1], trials, sf.seed);
  std::cout << comparison_table(report);
  if (!out.empty()) io::write_file(out, comparison_csv(report));
  return 0;
}

int run_segment(const std::string& image_path, const SegmentationFlags& seg, const std::string& out) {
  const RgbImage image = io::read_ppm(image_path);
  const SegmentMap segments = segment_image(image, seg, std::nullopt);
  io::write_label_map(out, segments);
  const SegmentGraph graph = build_adjacency(segments);
  std::cout << segments.n_segments() << " segments, " << graph.n_edges() << " adjacency edges\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging_from_env();
  CLI::App app{"Local explanations for black-box classifiers with dependency-aware sampling and kernel SVR surrogates"};
  app.require_subcommand(1);

  SurrogateFlags sf;
  SegmentationFlags seg;
  TextFlags tf;
  std::string image_path, text_path, corpus_dir, out, overlay, labels_out, methods = "svr,ridge";
  std::size_t trials = 1;

  auto* ei = app.add_subcommand("explain-image", "explain one PPM image");
  ei->add_option("--image", image_path, "binary PPM (P6) input")->required()->check(CLI::ExistingFile);
  add_segmentation_flags(ei, seg);
  add_surrogate_flags(ei, sf);
  ei->add_option("--out", out, "explanation JSON path (default stdout)");
  ei->add_option("--overlay", overlay, "write a PPM with non-top-K segments dimmed");
  ei->add_option("--labels-out", labels_out, "also save the segmentation (.pgm or .json)");

  auto* et = app.add_subcommand("explain-text", "explain a text instance");
  et->add_option("--text", text_path, "UTF-8 text input")->required()->check(CLI::ExistingFile);
  add_text_flags(et, tf);
  add_surrogate_flags(et, sf);
  et->add_option("--out", out, "explanation JSON path (default stdout)");

  auto* cmp = app.add_subcommand("compare", "compare two surrogates over a corpus directory");
  cmp->add_option("--corpus", corpus_dir, "directory of .ppm / .txt instances")->required();
  add_segmentation_flags(cmp, seg);
  add_text_flags(cmp, tf);
  add_surrogate_flags(cmp, sf);
  cmp->add_option("--methods", methods, "two surrogates to compare (first is scored against second)");
  cmp->add_option("--trials", trials, "perturbation sets per instance")->check(CLI::PositiveNumber);
  cmp->add_option("--out", out, "CSV output path");

  auto* sg = app.add_subcommand("segment", "segment an image and save the label map");
  sg->add_option("--image", image_path, "binary PPM (P6) input")->required()->check(CLI::ExistingFile);
  add_segmentation_flags(sg, seg);
  sg->add_option("--out", out, "label map output (.pgm or .json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ei) return run_explain_image(image_path, seg, sf, out, overlay, labels_out);
    if (*et) return run_explain_text(text_path, tf, sf, out);
    if (*cmp) return run_compare(corpus_dir, seg, tf, sf, methods, trials, out);
    if (*sg) return run_segment(image_path, seg, out);
  } catch (const UsageError& e) {
    std::cerr << "ledsna: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ledsna: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
