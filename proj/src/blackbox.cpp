#include "ledsna/blackbox.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <future>
#include <random>
#include <sstream>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ledsna/error.hpp"
#include "ledsna/io.hpp"

extern char** environ;

namespace ledsna {

double sigmoid(double logit) {
  if (logit >= 0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

std::vector<double> query(Classifier& classifier, std::span<const Instance> batch, std::size_t batch_index) {
  if (batch.empty()) throw ContractError("query needs a non-empty batch");
  std::vector<double> out;
  try {
    out = classifier.predict(batch);
  } catch (const BlackBoxError& e) {
    throw BlackBoxError(e.kind(), "batch " + std::to_string(batch_index) + ": " + e.what(), batch_index);
  } catch (const ContractError&) {
    throw;
  } catch (const std::exception& e) {
    throw BlackBoxError(BlackBoxError::Kind::kTransport, "batch " + std::to_string(batch_index) + ": " + e.what(),
                        batch_index);
  }
  if (out.size() != batch.size()) {
    throw BlackBoxError(BlackBoxError::Kind::kMalformedResponse,
                        "batch " + std::to_string(batch_index) + ": expected " + std::to_string(batch.size()) +
                            " predictions, got " + std::to_string(out.size()),
                        batch_index);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i]) || out[i] < 0.0 || out[i] > 1.0) {
      std::ostringstream msg;
      msg << "batch " << batch_index << ": prediction " << i << " = " << out[i] << " is outside [0, 1]";
      throw BlackBoxError(BlackBoxError::Kind::kOutOfRange, msg.str(), batch_index);
    }
  }
  return out;
}

std::vector<double> query_batched(Classifier& classifier, std::span<const Instance> instances,
                                  const QueryOptions& options) {
  if (options.batch_size == 0) throw ContractError("batch size must be positive");
  const std::size_t n = instances.size();
  const std::size_t n_batches = (n + options.batch_size - 1) / options.batch_size;
  std::vector<double> out(n);
  auto run = [&](std::size_t b) {
    const std::size_t begin = b * options.batch_size;
    const std::size_t len = std::min(options.batch_size, n - begin);
    const auto preds = query(classifier, instances.subspan(begin, len), b);
    std::copy(preds.begin(), preds.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
  };
  const std::size_t workers = classifier.thread_safe() ? std::max<std::size_t>(1, options.parallelism) : 1;
  if (workers == 1 || n_batches <= 1) {
    for (std::size_t b = 0; b < n_batches; ++b) run(b);
    return out;
  }
  // Each wave runs up to `workers` batches; the first failure in batch order wins.
  for (std::size_t start = 0; start < n_batches; start += workers) {
    std::vector<std::future<void>> wave;
    for (std::size_t b = start; b < std::min(n_batches, start + workers); ++b) {
      wave.push_back(std::async(std::launch::async, run, b));
    }
    for (auto& f : wave) f.wait();
    for (auto& f : wave) f.get();
  }
  return out;
}

ConstantClassifier::ConstantClassifier(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ContractError("constant prediction must lie in [0, 1]");
}

std::vector<double> ConstantClassifier::predict(std::span<const Instance> batch) {
  return std::vector<double>(batch.size(), value_);
}

std::string ConstantClassifier::describe() const {
  std::ostringstream s;
  s << "builtin:constant:" << value_;
  return s.str();
}

FunctionClassifier::FunctionClassifier(Fn fn, std::string name, bool thread_safe)
    : fn_(std::move(fn)), name_(std::move(name)), thread_safe_(thread_safe) {}

std::vector<double> FunctionClassifier::predict(std::span<const Instance> batch) { return fn_(batch); }

QuadraticLogit::QuadraticLogit(std::size_t dim, std::vector<double> quadratic, std::vector<double> linear,
                               double bias)
    : dim_(dim), quadratic_(std::move(quadratic)), linear_(std::move(linear)), bias_(bias) {
  if (dim_ == 0) throw ContractError("quadratic-logit needs dimension >= 1");
  if (quadratic_.size() != dim_ * dim_ || linear_.size() != dim_) {
    throw ContractError("quadratic-logit parameter shapes do not match dimension");
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (quadratic_[i * dim_ + j] != quadratic_[j * dim_ + i]) throw ContractError("quadratic term must be symmetric");
    }
  }
}

QuadraticLogit QuadraticLogit::random(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ContractError("quadratic-logit needs dimension >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(dim * dim);
  for (auto& v : a) v = normal(rng);
  std::vector<double> quadratic(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) quadratic[i * dim + j] = 0.5 * (a[i * dim + j] + a[j * dim + i]);
  }
  std::vector<double> linear(dim);
  for (auto& v : linear) v = normal(rng);
  const double target = (rng() >> 63) ? 2.0 : -2.0;
  QuadraticLogit model(dim, std::move(quadratic), std::move(linear), 0.0);
  const std::vector<double> ones(dim, 1.0);
  model.bias_ = target - model.logit(ones);
  return model;
}

double QuadraticLogit::logit(std::span<const double> m) const {
  if (m.size() != dim_) throw ContractError("activation length does not match quadratic-logit dimension");
  double acc = bias_;
  for (std::size_t i = 0; i < dim_; ++i) {
    if (m[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) row += quadratic_[i * dim_ + j] * m[j];
    acc += m[i] * (row + linear_[i]);
  }
  return acc;
}

double QuadraticLogit::operator()(const BinaryMask& mask) const {
  std::vector<double> m(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) m[i] = mask[i] ? 1.0 : 0.0;
  return (*this)(std::span<const double>(m));
}

QuadraticLogitClassifier::QuadraticLogitClassifier(QuadraticLogit model, InterpretableSpace space,
                                                   Instance reference)
    : model_(std::move(model)), space_(std::move(space)), reference_(std::move(reference)) {
  if (model_.dim() != space_.d_prime()) throw ContractError("quadratic-logit dimension differs from d'");
  if (space_.kind() == Modality::kImage) {
    const auto& img = reference_.as_image();
    if (img.width() != space_.segment_map().width() || img.height() != space_.segment_map().height()) {
      throw ContractError("reference image does not match the segment map");
    }
  } else if (reference_.tokens().size() != space_.groups().n_tokens()) {
    throw ContractError("reference text does not match the token groups");
  }
}

std::vector<double> QuadraticLogitClassifier::activation(const Instance& instance) const {
  std::vector<double> m(space_.d_prime(), 0.0);
  if (space_.kind() == Modality::kImage) {
    const auto& segments = space_.segment_map();
    const auto& ref = reference_.as_image();
    const auto& img = instance.as_image();
    if (img.width() != ref.width() || img.height() != ref.height()) {
      throw ContractError("instance dimensions differ from the reference image");
    }
    for (std::size_t p = 0; p < segments.pixel_count(); ++p) {
      if (img.pixel(p) == ref.pixel(p)) m[static_cast<std::size_t>(segments.label(p))] += 1.0;
    }
    for (std::size_t s = 0; s < m.size(); ++s) m[s] /= static_cast<double>(segments.sizes()[s]);
    return m;
  }
  const auto& groups = space_.groups();
  const auto owner = groups.owner_of_tokens();
  const auto& ref = reference_.tokens();
  const auto& toks = instance.tokens();
  std::size_t r = 0;
  for (const auto& t : toks) {
    while (r < ref.size() && ref[r] != t) ++r;
    if (r == ref.size()) break;
    m[owner[r]] += 1.0;
    ++r;
  }
  for (std::size_t g = 0; g < m.size(); ++g) m[g] /= static_cast<double>(groups[g].size());
  return m;
}

std::vector<double> QuadraticLogitClassifier::predict(std::span<const Instance> batch) {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& inst : batch) {
    const auto m = activation(inst);
    out.push_back(model_(std::span<const double>(m)));
  }
  return out;
}

std::string QuadraticLogitClassifier::describe() const { return "builtin:quadratic-logit"; }

LexiconClassifier::LexiconClassifier(std::map<std::string, double> weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {}

std::vector<double> LexiconClassifier::predict(std::span<const Instance> batch) {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& inst : batch) {
    double s = bias_;
    for (const auto& t : inst.tokens()) {
      if (const auto it = weights_.find(t); it != weights_.end()) s += it->second;
    }
    out.push_back(sigmoid(s));
  }
  return out;
}

std::string LexiconClassifier::describe() const { return "builtin:lexicon"; }

std::string encode_predict_request(std::uint64_t id, std::span<const Instance> batch) {
  if (batch.empty()) throw ContractError("request batch must be non-empty");
  nlohmann::json j;
  j["id"] = id;
  const bool image = batch.front().is_image();
  j["kind"] = image ? "image" : "text";
  nlohmann::json items = nlohmann::json::array();
  for (const auto& inst : batch) {
    if (inst.is_image() != image) throw ContractError("request batch mixes images and text");
    if (image) {
      items.push_back(io::base64_encode(io::encode_ppm(inst.as_image())));
    } else {
      items.push_back(inst.tokens());
    }
  }
  j["batch"] = std::move(items);
  return j.dump();
}

std::vector<double> decode_predict_response(std::string_view body, std::optional<std::uint64_t> id,
                                            std::size_t expected) {
  using Kind = BlackBoxError::Kind;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw BlackBoxError(Kind::kMalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("predictions") || !j["predictions"].is_array()) {
    throw BlackBoxError(Kind::kMalformedResponse, "response lacks a \"predictions\" array");
  }
  if (id && (!j.contains("id") || !j["id"].is_number_unsigned() || j["id"].get<std::uint64_t>() != *id)) {
    throw BlackBoxError(Kind::kMalformedResponse, "response id does not match request " + std::to_string(*id));
  }
  const auto& p = j["predictions"];
  if (p.size() != expected) {
    throw BlackBoxError(Kind::kMalformedResponse, "expected " + std::to_string(expected) + " predictions, got " +
                                                      std::to_string(p.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : p) {
    if (!v.is_number()) throw BlackBoxError(Kind::kMalformedResponse, "prediction is not a number");
    out.push_back(v.get<double>());
  }
  return out;
}

SubprocessClassifier::SubprocessClassifier(std::string command_line, int retries)
    : command_line_(std::move(command_line)), retries_(std::max(0, retries)) {
  if (command_line_.empty()) throw ContractError("subprocess classifier needs a command line");
  // A dead child must surface as EPIPE, not kill us.
  std::signal(SIGPIPE, SIG_IGN);
  launch();
}

SubprocessClassifier::~SubprocessClassifier() { shutdown(); }

void SubprocessClassifier::launch() {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw BlackBoxError(BlackBoxError::Kind::kTransport, "pipe() failed");
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw BlackBoxError(BlackBoxError::Kind::kTransport, "pipe() failed");
  }
  fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[0]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[1]);

  std::string sh = "/bin/sh";
  std::string dash_c = "-c";
  char* argv[] = {sh.data(), dash_c.data(), command_line_.data(), nullptr};
  pid_t pid = -1;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw BlackBoxError(BlackBoxError::Kind::kTransport, "failed to launch '" + command_line_ + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  read_buffer_.clear();
  spdlog::debug("launched classifier subprocess pid={} cmd='{}'", pid_, command_line_);
}

void SubprocessClassifier::shutdown() noexcept {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin asks the child to exit; do not wait forever on a stuck one.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      usleep(10'000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string SubprocessClassifier::exchange(const std::string& line) {
  using Kind = BlackBoxError::Kind;
  const std::string payload = line + "\n";
  std::size_t written = 0;
  while (written < payload.size()) {
    const ssize_t w = write(to_child_, payload.data() + written, payload.size() - written);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw BlackBoxError(Kind::kTransport, std::string("write to classifier failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(w);
  }
  char chunk[4096];
  for (;;) {
    if (const auto nl = read_buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      return reply;
    }
    const ssize_t r = read(from_child_, chunk, sizeof chunk);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw BlackBoxError(Kind::kTransport, std::string("read from classifier failed: ") + std::strerror(errno));
    }
    if (r == 0) throw BlackBoxError(Kind::kTransport, "classifier process closed its output");
    read_buffer_.append(chunk, static_cast<std::size_t>(r));
  }
}

std::vector<double> SubprocessClassifier::predict(std::span<const Instance> batch) {
  std::lock_guard lock(mutex_);
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t id = next_id_++;
    const std::string request = encode_predict_request(id, batch);
    std::string reply;
    try {
      if (pid_ < 0) launch();
      reply = exchange(request);
    } catch (const BlackBoxError& e) {
      if (e.kind() != BlackBoxError::Kind::kTransport || attempt >= retries_) throw;
      spdlog::info("classifier transport failure ({}), relaunching (attempt {}/{})", e.what(), attempt + 1, retries_);
      shutdown();
      continue;
    }
    return decode_predict_response(reply, id, batch.size());
  }
}

HttpClassifier::HttpClassifier(std::string url, int retries, std::chrono::milliseconds timeout)
    : url_(std::move(url)), retries_(std::max(0, retries)), timeout_(timeout) {
  const auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) throw ContractError("http classifier URL needs a scheme: " + url_);
  const auto path_start = url_.find('/', scheme_end + 3);
  origin_ = url_.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/predict" : url_.substr(path_start);
  if (path_ == "/") path_ = "/predict";
}

std::vector<double> HttpClassifier::predict(std::span<const Instance> batch) {
  using Kind = BlackBoxError::Kind;
  const std::string body = encode_predict_request(0, batch);
  httplib::Client client(origin_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  client.set_connection_timeout(seconds);
  client.set_read_timeout(seconds);
  client.set_write_timeout(seconds);
  for (int attempt = 0;; ++attempt) {
    std::string failure;
    if (auto res = client.Post(path_, body, "application/json")) {
      if (res->status == 200) return decode_predict_response(res->body, std::nullopt, batch.size());
      failure = "HTTP status " + std::to_string(res->status);
    } else {
      failure = "HTTP request failed: " + httplib::to_string(res.error());
    }
    if (attempt >= retries_) throw BlackBoxError(Kind::kTransport, failure + " (" + url_ + path_ + ")");
    spdlog::info("{} from {}, retrying ({}/{})", failure, url_, attempt + 1, retries_);
  }
}

namespace {

std::map<std::string, double> parse_lexicon(std::string_view args) {
  std::map<std::string, double> weights;
  if (args.size() > 5 && args.substr(args.size() - 5) == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(std::string(args)));
    } catch (const nlohmann::json::exception& e) {
      throw ContractError(std::string("lexicon file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ContractError("lexicon file must map words to weights");
    for (const auto& [word, w] : j.items()) {
      if (!w.is_number()) throw ContractError("lexicon weight for '" + word + "' is not a number");
      weights[word] = w.get<double>();
    }
    return weights;
  }
  std::size_t pos = 0;
  while (pos < args.size()) {
    auto end = args.find(',', pos);
    if (end == std::string_view::npos) end = args.size();
    const auto entry = args.substr(pos, end - pos);
    const auto eq = entry.rfind('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ContractError("lexicon entries must look like word=weight, got '" + std::string(entry) + "'");
    }
    try {
      std::size_t used = 0;
      const std::string num(entry.substr(eq + 1));
      weights[std::string(entry.substr(0, eq))] = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::logic_error&) {
      throw ContractError("bad lexicon weight in '" + std::string(entry) + "'");
    }
    pos = end + 1;
  }
  return weights;
}

}  // namespace

std::unique_ptr<Classifier> make_classifier(std::string_view spec, const BlackBoxContext& context) {
  auto starts_with = [&](std::string_view p) { return spec.substr(0, p.size()) == p; };
  if (starts_with("subprocess:")) return std::make_unique<SubprocessClassifier>(std::string(spec.substr(11)));
  if (starts_with("http:")) {
    std::string url(spec.substr(5));
    if (url.starts_with("//")) url = "http:" + url;
    return std::make_unique<HttpClassifier>(url);
  }
  if (starts_with("https:")) return std::make_unique<HttpClassifier>(std::string(spec));
  if (!starts_with("builtin:")) throw ContractError("unknown black-box spec '" + std::string(spec) + "'");

  const auto rest = spec.substr(8);
  const auto colon = rest.find(':');
  const std::string name(rest.substr(0, colon));
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : rest.substr(colon + 1);

  if (name == "constant") {
    if (args.empty()) throw ContractError("builtin:constant needs a value, e.g. builtin:constant:0.7");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(std::string(args), &used);
      if (used != args.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ContractError("builtin:constant value '" + std::string(args) + "' is not a number");
    }
    return std::make_unique<ConstantClassifier>(value);
  }
  if (name == "quadratic-logit") {
    if (!context.space || !context.reference) {
      throw ContractError("builtin:quadratic-logit needs the interpretable space of the explained instance");
    }
    std::uint64_t seed = context.default_seed;
    if (!args.empty()) {
      try {
        std::size_t used = 0;
        seed = std::stoull(std::string(args), &used);
        if (used != args.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw ContractError("builtin:quadratic-logit seed '" + std::string(args) + "' is not an integer");
      }
    }
    return std::make_unique<QuadraticLogitClassifier>(QuadraticLogit::random(context.space->d_prime(), seed),
                                                      *context.space, *context.reference);
  }
  if (name == "lexicon") {
    if (args.empty()) throw ContractError("builtin:lexicon needs word=weight pairs or a .json file");
    return std::make_unique<LexiconClassifier>(parse_lexicon(args));
  }
  throw ContractError("unknown builtin classifier '" + name + "'");
}

}  // namespace ledsna
