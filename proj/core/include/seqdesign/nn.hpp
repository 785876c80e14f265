#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "seqdesign/sequence.hpp"

namespace seqdesign::nn {

enum class Activation { kRelu, kLinear };

/// Fully connected feed-forward network. Hidden layers use `hidden_activation`;
/// the output layer is always linear. Parameters live in one flat buffer so an
/// optimizer can treat the whole net as a single vector.
///
/// Layer l stores an n_in x n_out weight block (input-major, so a sparse input
/// row can be accumulated column by column) followed by n_out biases.
class DenseNet {
 public:
  /// Activations recorded by a forward pass, consumed by backward().
  struct Tape {
    std::vector<std::vector<double>> activations;
  };

  DenseNet() = default;
  /// Glorot-uniform weights, zero biases.
  DenseNet(std::vector<std::size_t> layer_sizes, Rng& rng, Activation hidden = Activation::kRelu);
  static DenseNet zeros(std::vector<std::size_t> layer_sizes, Activation hidden = Activation::kRelu);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  std::size_t parameter_count() const { return params_.size(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Weight connecting input j of layer l to its output i.
  double& weight(std::size_t layer, std::size_t j, std::size_t i);
  double& bias(std::size_t layer, std::size_t i);

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, Tape& tape) const;

  /// Accumulates dL/dparams into `grads` (size parameter_count()) given dL/doutput.
  /// When `input_grad` is non-null it receives dL/dx.
  void backward(const Tape& tape, std::span<const double> upstream, std::span<double> grads,
                std::vector<double>* input_grad = nullptr) const;

  bool operator==(const DenseNet&) const = default;

 private:
  void layout();

  std::vector<std::size_t> sizes_;
  Activation hidden_ = Activation::kRelu;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  std::vector<double> params_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t parameter_count, AdamConfig config);

  void step(std::span<double> params, std::span<const double> grads);
  void reset();

  std::size_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  std::size_t steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Scales `grads` in place so its L2 norm is at most `max_norm`. Returns the original norm.
double clip_grad_norm(std::span<double> grads, double max_norm);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
/// Draws an index with probability softmax(logits)[i].
std::size_t categorical_sample(std::span<const double> logits, Rng& rng);
/// Draws an index from an already-normalized probability vector.
std::size_t sample_probabilities(std::span<const double> probs, Rng& rng);

double logistic(double x);

/// JSON checkpoint: {"format": "seqdesign.densenet", "version": 1, ...}.
void save_checkpoint(const DenseNet& net, std::ostream& out);
DenseNet load_checkpoint(std::istream& in);
void save_checkpoint(const DenseNet& net, const std::string& path);
DenseNet load_checkpoint(const std::string& path);

}  // namespace seqdesign::nn
