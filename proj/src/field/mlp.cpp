#include "objrecon/field/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace objrecon::field {

TinyMlp TinyMlp::create(const std::vector<int>& layer_sizes, std::mt19937_64& rng) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("mlp needs at least two layers");
  TinyMlp mlp;
  mlp.sizes = layer_sizes;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    int fan_in = layer_sizes[l];
    int fan_out = layer_sizes[l + 1];
    float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    std::vector<double> w(static_cast<size_t>(fan_in) * fan_out);
    for (double& v : w) v = dist(rng);
    mlp.weights.push_back(std::move(w));
    mlp.biases.emplace_back(fan_out, 0.0);
  }
  return mlp;
}

int TinyMlp::max_width() const {
  return *std::max_element(sizes.begin(), sizes.end());
}

size_t TinyMlp::parameter_count() const {
  size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

void TinyMlp::forward(const double* input, double* logits, double* scratch, double* cache) const {
  const int width = max_width();
  double* a = scratch;
  double* b = scratch + width;
  std::memcpy(a, input, sizeof(double) * sizes[0]);
  if (cache) std::memcpy(cache, input, sizeof(double) * sizes[0]);

  const int n_layers = layer_count();
  for (int l = 0; l < n_layers; ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double* w = weights[l].data();
    const double* bias = biases[l].data();
    for (int o = 0; o < out; ++o) {
      double acc = bias[o];
      const double* row = w + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * a[i];
      b[o] = acc;
    }
    if (l + 1 < n_layers) {
      for (int o = 0; o < out; ++o) b[o] = b[o] > 0 ? b[o] : 0.0;
      if (cache) std::memcpy(cache + static_cast<size_t>(l + 1) * width, b, sizeof(double) * out);
    }
    std::swap(a, b);
  }
  std::memcpy(logits, a, sizeof(double) * sizes.back());
}

void TinyMlp::backward(const double* d_logits, const double* cache,
                       std::vector<std::vector<double>>* grad_w,
                       std::vector<std::vector<double>>* grad_b, double* d_input,
                       double* scratch) const {
  const int width = max_width();
  double* d_out = scratch;
  double* d_in = scratch + width;
  std::memcpy(d_out, d_logits, sizeof(double) * sizes.back());

  for (int l = layer_count() - 1; l >= 0; --l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double* x = cache + static_cast<size_t>(l) * width;
    const double* w = weights[l].data();

    if (grad_w) {
      double* gw = (*grad_w)[l].data();
      double* gb = (*grad_b)[l].data();
      for (int o = 0; o < out; ++o) {
        double g = d_out[o];
        if (g == 0.0) continue;
        double* row = gw + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) row[i] += g * x[i];
        gb[o] += g;
      }
    }
    if (l == 0 && !d_input) break;
    for (int i = 0; i < in; ++i) d_in[i] = 0.0;
    for (int o = 0; o < out; ++o) {
      double g = d_out[o];
      if (g == 0.0) continue;
      const double* row = w + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) d_in[i] += g * row[i];
    }
    if (l > 0) {
      // rectifier mask from the cached post-activation
      for (int i = 0; i < in; ++i)
        if (x[i] <= 0) d_in[i] = 0.0;
    } else {
      std::memcpy(d_input, d_in, sizeof(double) * in);
    }
    std::swap(d_out, d_in);
  }
}

}  // namespace objrecon::field
