#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledsna/core.hpp"

namespace ledsna {

/// A black-box model returning one class probability per instance.
class Classifier {
 public:
  virtual ~Classifier() = default;

  /// Same length and order as `batch`. Implementations throw BlackBoxError on
  /// transport problems; range checks are done by `query`.
  virtual std::vector<double> predict(std::span<const Instance> batch) = 0;

  /// Whether `predict` may run concurrently from several threads.
  virtual bool thread_safe() const { return true; }

  virtual std::string describe() const = 0;
};

/// Calls the classifier and checks the response: one finite value in [0, 1]
/// per instance. Errors are rethrown as BlackBoxError tagged with `batch_index`.
std::vector<double> query(Classifier& classifier, std::span<const Instance> batch, std::size_t batch_index = 0);

struct QueryOptions {
  std::size_t batch_size = 64;
  std::size_t parallelism = 1;  // capped to 1 for classifiers that are not thread_safe()
};

/// Splits `instances` into batches and reassembles predictions in input
/// order. Any failed batch fails the whole call.
std::vector<double> query_batched(Classifier& classifier, std::span<const Instance> instances,
                                  const QueryOptions& options = {});

double sigmoid(double logit);

class ConstantClassifier final : public Classifier {
 public:
  explicit ConstantClassifier(double value);
  std::vector<double> predict(std::span<const Instance> batch) override;
  std::string describe() const override;

 private:
  double value_;
};

/// Wraps an in-process scoring function.
class FunctionClassifier final : public Classifier {
 public:
  using Fn = std::function<std::vector<double>(std::span<const Instance>)>;
  FunctionClassifier(Fn fn, std::string name = "function", bool thread_safe = false);
  std::vector<double> predict(std::span<const Instance> batch) override;
  bool thread_safe() const override { return thread_safe_; }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
  bool thread_safe_;
};

/// sigmoid(mᵀQm + qᵀm + b) over a real activation vector m.
class QuadraticLogit {
 public:
  QuadraticLogit(std::size_t dim, std::vector<double> quadratic, std::vector<double> linear, double bias);

  /// Seeded draw: Q = (A + Aᵀ)/2 and q with standard normal entries; the bias
  /// puts the logit of the all-ones activation at ±2 so the explained point
  /// sits on the curved part of the sigmoid.
  static QuadraticLogit random(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  double logit(std::span<const double> activation) const;
  double operator()(std::span<const double> activation) const { return sigmoid(logit(activation)); }
  double operator()(const BinaryMask& mask) const;

  const std::vector<double>& quadratic() const noexcept { return quadratic_; }
  const std::vector<double>& linear() const noexcept { return linear_; }
  double bias() const noexcept { return bias_; }

 private:
  std::size_t dim_;
  std::vector<double> quadratic_;  // row-major dim x dim, symmetric
  std::vector<double> linear_;
  double bias_;
};

/// Scores instances by first decoding which interpretable features of
/// `reference` survive in them. For images a segment's activation is the
/// fraction of its pixels identical to the reference; for text it is the
/// fraction of the group's tokens found by greedy in-order matching.
class QuadraticLogitClassifier final : public Classifier {
 public:
  QuadraticLogitClassifier(QuadraticLogit model, InterpretableSpace space, Instance reference);
  std::vector<double> predict(std::span<const Instance> batch) override;
  std::string describe() const override;

  std::vector<double> activation(const Instance& instance) const;
  const QuadraticLogit& model() const noexcept { return model_; }

 private:
  QuadraticLogit model_;
  InterpretableSpace space_;
  Instance reference_;
};

/// sigmoid(Σ weight(token)); unknown tokens weigh 0. Text only.
class LexiconClassifier final : public Classifier {
 public:
  explicit LexiconClassifier(std::map<std::string, double> weights, double bias = 0.0);
  std::vector<double> predict(std::span<const Instance> batch) override;
  std::string describe() const override;
  const std::map<std::string, double>& weights() const noexcept { return weights_; }

 private:
  std::map<std::string, double> weights_;
  double bias_;
};

/// Serializes a batch into the wire form shared by the subprocess and HTTP
/// adapters: {"id": n, "kind": "image"|"text", "batch": [...]}, images as
/// base64-encoded binary PPM, text as token arrays.
std::string encode_predict_request(std::uint64_t id, std::span<const Instance> batch);

/// Parses {"id": n, "predictions": [...]} and checks it answers request `id`
/// with `expected` entries. Throws BlackBoxError(kMalformedResponse).
std::vector<double> decode_predict_response(std::string_view body, std::optional<std::uint64_t> id,
                                            std::size_t expected);

/// Long-lived child process speaking NDJSON on stdin/stdout. Relaunched on
/// transport failure up to `retries` times per request.
class SubprocessClassifier final : public Classifier {
 public:
  explicit SubprocessClassifier(std::string command_line, int retries = 2);
  ~SubprocessClassifier() override;
  SubprocessClassifier(const SubprocessClassifier&) = delete;
  SubprocessClassifier& operator=(const SubprocessClassifier&) = delete;

  std::vector<double> predict(std::span<const Instance> batch) override;
  bool thread_safe() const override { return false; }
  std::string describe() const override { return "subprocess:" + command_line_; }

 private:
  void launch();
  void shutdown() noexcept;
  std::string exchange(const std::string& line);

  std::string command_line_;
  int retries_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
  std::uint64_t next_id_ = 0;
  std::mutex mutex_;
};

/// POSTs the request JSON to an HTTP endpoint (path defaults to /predict).
class HttpClassifier final : public Classifier {
 public:
  explicit HttpClassifier(std::string url, int retries = 2,
                          std::chrono::milliseconds timeout = std::chrono::seconds(30));
  std::vector<double> predict(std::span<const Instance> batch) override;
  std::string describe() const override { return "http:" + url_; }

 private:
  std::string url_;
  std::string origin_;
  std::string path_;
  int retries_;
  std::chrono::milliseconds timeout_;
};

/// What a builtin classifier may need to know about the explained instance.
struct BlackBoxContext {
  const InterpretableSpace* space = nullptr;
  const Instance* reference = nullptr;
  /// Seed for builtin:quadratic-logit when the spec names none.
  std::uint64_t default_seed = 0;
};

/// Parses builtin:<name>[:args] | subprocess:<cmdline> | http:<url>.
/// Builtins: constant:<p>, quadratic-logit[:<seed>], lexicon:<word=w,...|file.json>.
/// Throws ContractError on a malformed spec.
std::unique_ptr<Classifier> make_classifier(std::string_view spec, const BlackBoxContext& context = {});

}  // namespace ledsna
