#include "seqdesign/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "seqdesign/error.hpp"

namespace seqdesign::nn {

DenseNet::DenseNet(std::vector<std::size_t> layer_sizes, Rng& rng, Activation hidden)
    : sizes_(std::move(layer_sizes)), hidden_(hidden) {
  layout();
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
    std::uniform_real_distribution<double> u(-limit, limit);
    const std::size_t n = sizes_[l] * sizes_[l + 1];
    for (std::size_t k = 0; k < n; ++k) params_[weight_offset_[l] + k] = u(rng);
  }
}

DenseNet DenseNet::zeros(std::vector<std::size_t> layer_sizes, Activation hidden) {
  DenseNet net;
  net.sizes_ = std::move(layer_sizes);
  net.hidden_ = hidden;
  net.layout();
  return net;
}

void DenseNet::layout() {
  if (sizes_.size() < 2) throw ContractError("a network needs at least input and output sizes");
  for (auto s : sizes_)
    if (s == 0) throw ContractError("layer sizes must be positive");
  std::size_t offset = 0;
  weight_offset_.clear();
  bias_offset_.clear();
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weight_offset_.push_back(offset);
    offset += sizes_[l] * sizes_[l + 1];
    bias_offset_.push_back(offset);
    offset += sizes_[l + 1];
  }
  params_.assign(offset, 0.0);
}

double& DenseNet::weight(std::size_t layer, std::size_t j, std::size_t i) {
  return params_[weight_offset_.at(layer) + j * sizes_[layer + 1] + i];
}

double& DenseNet::bias(std::size_t layer, std::size_t i) { return params_[bias_offset_.at(layer) + i]; }

std::vector<double> DenseNet::forward(std::span<const double> x) const {
  Tape tape;
  return forward(x, tape);
}

std::vector<double> DenseNet::forward(std::span<const double> x, Tape& tape) const {
  if (x.size() != input_size()) throw ContractError("network input has wrong length");
  tape.activations.resize(sizes_.size());
  tape.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto& in = tape.activations[l];
    auto& out = tape.activations[l + 1];
    const std::size_t n_out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset_[l];
    const double* b = params_.data() + bias_offset_[l];
    out.assign(b, b + n_out);
    for (std::size_t j = 0; j < in.size(); ++j) {
      const double a = in[j];
      if (a == 0.0) continue;
      const double* row = w + j * n_out;
      for (std::size_t i = 0; i < n_out; ++i) out[i] += a * row[i];
    }
    const bool is_output = l + 1 == layer_count();
    if (!is_output && hidden_ == Activation::kRelu)
      for (auto& v : out) v = v > 0.0 ? v : 0.0;
  }
  return tape.activations.back();
}

void DenseNet::backward(const Tape& tape, std::span<const double> upstream, std::span<double> grads,
                        std::vector<double>* input_grad) const {
  if (upstream.size() != output_size()) throw ContractError("upstream gradient has wrong length");
  if (grads.size() != params_.size()) throw ContractError("gradient buffer has wrong length");
  if (tape.activations.size() != sizes_.size()) throw ContractError("tape does not match network");

  std::vector<double> delta(upstream.begin(), upstream.end());
  std::vector<double> prev;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const auto& in = tape.activations[l];
    const std::size_t n_out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset_[l];
    double* gw = grads.data() + weight_offset_[l];
    double* gb = grads.data() + bias_offset_[l];
    for (std::size_t i = 0; i < n_out; ++i) gb[i] += delta[i];
    for (std::size_t j = 0; j < in.size(); ++j) {
      const double a = in[j];
      if (a == 0.0) continue;
      double* grow = gw + j * n_out;
      for (std::size_t i = 0; i < n_out; ++i) grow[i] += a * delta[i];
    }
    if (l == 0 && input_grad == nullptr) break;
    prev.assign(in.size(), 0.0);
    for (std::size_t j = 0; j < in.size(); ++j) {
      const double* row = w + j * n_out;
      double s = 0.0;
      for (std::size_t i = 0; i < n_out; ++i) s += row[i] * delta[i];
      prev[j] = s;
    }
    if (l > 0 && hidden_ == Activation::kRelu)
      for (std::size_t j = 0; j < in.size(); ++j)
        if (in[j] <= 0.0) prev[j] = 0.0;
    delta.swap(prev);
  }
  if (input_grad != nullptr) *input_grad = delta;
}

Adam::Adam(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void Adam::reset() {
  steps_ = 0;
  std::fill(m_.begin(), m_.end(), 0.0);
  std::fill(v_.begin(), v_.end(), 0.0);
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ContractError("optimizer state does not match parameter shape");
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    m_[k] = config_.beta1 * m_[k] + (1.0 - config_.beta1) * g;
    v_[k] = config_.beta2 * v_[k] + (1.0 - config_.beta2) * g * g;
    const double m_hat = m_[k] / c1;
    const double v_hat = v_[k] / c2;
    params[k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

namespace {

void check_finite(std::span<const double> logits) {
  if (logits.empty()) throw ContractError("empty logit vector");
  for (double v : logits)
    if (std::isnan(v)) throw DomainError("NaN logit");
}

}  // namespace

std::vector<double> log_softmax(std::span<const double> logits) {
  check_finite(logits);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  check_finite(logits);
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::size_t sample_probabilities(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    r -= probs[i];
    if (r < 0.0) return i;
  }
  // Rounding left a sliver of mass; return the last index with positive probability.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

std::size_t categorical_sample(std::span<const double> logits, Rng& rng) {
  const auto p = softmax(logits);
  return sample_probabilities(p, rng);
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void save_checkpoint(const DenseNet& net, std::ostream& out) {
  nlohmann::json j;
  j["format"] = "seqdesign.densenet";
  j["version"] = 1;
  j["hidden_activation"] = net.hidden_activation() == Activation::kRelu ? "relu" : "linear";
  j["layer_sizes"] = net.layer_sizes();
  j["parameters"] = std::vector<double>(net.parameters().begin(), net.parameters().end());
  out << j.dump() << '\n';
}

DenseNet load_checkpoint(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "seqdesign.densenet" || j.value("version", 0) != 1)
    throw ParseError("unrecognized checkpoint format");
  const auto act = j.at("hidden_activation").get<std::string>();
  if (act != "relu" && act != "linear") throw ParseError("unknown activation '" + act + "'");
  auto net = DenseNet::zeros(j.at("layer_sizes").get<std::vector<std::size_t>>(),
                             act == "relu" ? Activation::kRelu : Activation::kLinear);
  const auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != net.parameter_count()) throw ParseError("checkpoint parameter count mismatch");
  std::copy(params.begin(), params.end(), net.parameters().begin());
  return net;
}

void save_checkpoint(const DenseNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_checkpoint(net, out);
}

DenseNet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace seqdesign::nn
