#pragma once

// Small dense feedforward networks with tanh hidden layers, manual
// backpropagation and Adam.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "hashseg/text.hpp"

namespace hashseg::nn {

enum class OutputActivation { Linear, Sigmoid };

/// Parameters live in one flat vector; layer l stores its weight matrix
/// (out x in, row-major) followed by its bias.
class MLP {
 public:
  struct Cache {
    std::vector<std::vector<double>> inputs;  // input to each layer (after dropout)
    std::vector<std::vector<double>> hidden;  // tanh output of each hidden layer, before dropout
    std::vector<std::vector<double>> masks;   // dropout multipliers, empty when off
    double output = 0.0;
  };

  MLP() = default;

  MLP(std::vector<std::size_t> sizes, OutputActivation out) : sizes_(std::move(sizes)), out_(out) {
    if (sizes_.size() < 2 || sizes_.back() != 1) throw Error("network must end in one output unit");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(total);
      total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(total, 0.0);
  }

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  OutputActivation output_activation() const { return out_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  bool empty() const { return sizes_.empty(); }

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  void initialize(std::mt19937_64& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      std::uniform_real_distribution<double> u(-bound, bound);
      const std::size_t n = sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
      for (std::size_t i = 0; i < n; ++i) params_[offsets_[l] + i] = u(rng);
    }
  }

  /// Forward pass. With a dropout rng, each hidden activation is zeroed
  /// with probability p and survivors are scaled by 1/(1-p).
  double forward(std::span<const double> x, Cache* cache = nullptr, std::mt19937_64* dropout_rng = nullptr,
                 double p = 0.0) const {
    if (x.size() != input_size()) throw Error("network input has wrong dimension");
    std::vector<double> a(x.begin(), x.end());
    if (cache) {
      cache->inputs.clear();
      cache->hidden.clear();
      cache->masks.clear();
    }
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const std::size_t in = sizes_[l];
      const std::size_t out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      const double* b = w + out * in;
      std::vector<double> z(out);
      for (std::size_t o = 0; o < out; ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * a[i];
        z[o] = s;
      }
      if (cache) cache->inputs.push_back(a);
      if (l + 1 == num_layers()) {
        const double y = out_ == OutputActivation::Sigmoid ? sigmoid(z[0]) : z[0];
        if (cache) cache->output = y;
        return y;
      }
      for (auto& v : z) v = std::tanh(v);
      if (cache) cache->hidden.push_back(z);
      if (dropout_rng && p > 0.0) {
        std::bernoulli_distribution keep(1.0 - p);
        std::vector<double> mask(out);
        for (std::size_t o = 0; o < out; ++o) {
          mask[o] = keep(*dropout_rng) ? 1.0 / (1.0 - p) : 0.0;
          z[o] *= mask[o];
        }
        if (cache) cache->masks.push_back(std::move(mask));
      } else if (cache) {
        cache->masks.emplace_back();
      }
      a = std::move(z);
    }
    return 0.0;  // unreachable
  }

  /// Adds d(loss)/d(params) into grad given d(loss)/d(output); returns
  /// d(loss)/d(input).
  std::vector<double> backward(const Cache& cache, double d_output, std::vector<double>& grad) const {
    if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
    std::vector<double> delta{out_ == OutputActivation::Sigmoid ? d_output * cache.output * (1.0 - cache.output)
                                                                 : d_output};
    for (std::size_t l = num_layers(); l-- > 0;) {
      const std::size_t in = sizes_[l];
      const std::size_t out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + out * in;
      const auto& a = cache.inputs[l];
      std::vector<double> da(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) {
          gw[o * in + i] += delta[o] * a[i];
          da[i] += w[o * in + i] * delta[o];
        }
      }
      if (l == 0) return da;
      const auto& h = cache.hidden[l - 1];
      const auto& mask = cache.masks[l - 1];
      for (std::size_t i = 0; i < in; ++i) {
        if (!mask.empty()) da[i] *= mask[i];
        da[i] *= 1.0 - h[i] * h[i];
      }
      delta = std::move(da);
    }
    return {};
  }

  static double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  OutputActivation out_ = OutputActivation::Linear;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

 private:
  double lr_ = 0.001;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace hashseg::nn
