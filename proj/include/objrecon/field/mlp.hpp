#pragma once

#include <random>
#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::field {

/// Fully connected network with rectifier hidden units. Outputs are raw
/// logits; callers apply the logistic squashing.
struct TinyMlp {
  std::vector<int> sizes;                    // e.g. {3, 64, 1}
  std::vector<std::vector<double>> weights;  // per layer, row-major [out][in]
  std::vector<std::vector<double>> biases;

  static TinyMlp create(const std::vector<int>& layer_sizes, std::mt19937_64& rng);

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  int max_width() const;
  size_t parameter_count() const;

  /// Forward pass. `scratch` must hold 2 * max_width() doubles; `cache`, when
  /// non-null, receives the input and every post-activation hidden vector
  /// (layer_count() - 1 of them, each max_width() wide) for the backward pass.
  void forward(const double* input, double* logits, double* scratch, double* cache = nullptr) const;

  /// Backprop from d_logits. Adds parameter gradients into grad_w/grad_b
  /// (same shapes as weights/biases, may be null to skip) and writes the
  /// input gradient into d_input (may be null).
  void backward(const double* d_logits, const double* cache,
                std::vector<std::vector<double>>* grad_w, std::vector<std::vector<double>>* grad_b,
                double* d_input, double* scratch) const;
};

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace objrecon::field
