#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mge/common.hpp"

namespace mge::nn {

enum class Act { identity, relu, tanh_fn, sigmoid };

const char* act_name(Act a);
Act act_from_name(const std::string& name);

// Fully connected net: sizes[0] inputs through sizes.back() outputs. One
// activation for all hidden layers, a separate one for the output layer.
// Weights are double precision row-major (out x in).
struct DenseNet {
  std::vector<int> sizes;
  Act hidden_act = Act::tanh_fn;
  Act output_act = Act::identity;
  std::vector<std::vector<double>> weights;  // per layer
  std::vector<std::vector<double>> biases;

  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }

  // Glorot-uniform weights, zero biases.
  void init(Rng& rng);

  std::vector<double> predict(std::span<const double> x) const;
};

enum class LossKind { mse, bce };

// Per-layer gradient accumulators matching a DenseNet's shape.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  void match(const DenseNet& net);
  void zero();
};

// Scratch activations reused across backprop calls.
struct Workspace {
  std::vector<std::vector<double>> pre;    // pre-activation per layer
  std::vector<std::vector<double>> post;   // post-activation per layer
  std::vector<std::vector<double>> delta;  // backpropagated error
};

// Forward + backward for one sample; gradients are accumulated (not reset)
// into `grads`. Returns the sample loss. mse is the per-element mean squared
// error; bce expects a sigmoid output layer and a single target in {0,1}.
double backprop(const DenseNet& net, std::span<const double> x,
                std::span<const double> target, LossKind loss, Gradients& grads,
                Workspace& ws);

// Plain gradient-descent step over averaged batch gradients.
struct SgdOptimizer {
  double lr = 1e-3;
  void step(DenseNet& net, const Gradients& grads, int batch_size);
};

// Adam with bias correction.
struct AdamOptimizer {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void step(DenseNet& net, const Gradients& grads, int batch_size);

 private:
  Gradients m_, v_;
  long t_ = 0;
  bool ready_ = false;
};

void save_net(const DenseNet& net, std::ostream& out);
DenseNet load_net(std::istream& in);

}  // namespace mge::nn
