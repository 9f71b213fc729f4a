#include "mge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mge::nn {

const char* act_name(Act a) {
  switch (a) {
    case Act::identity: return "identity";
    case Act::relu: return "relu";
    case Act::tanh_fn: return "tanh";
    case Act::sigmoid: return "sigmoid";
  }
  return "identity";
}

Act act_from_name(const std::string& name) {
  if (name == "identity") return Act::identity;
  if (name == "relu") return Act::relu;
  if (name == "tanh") return Act::tanh_fn;
  if (name == "sigmoid") return Act::sigmoid;
  throw ParseError("unknown activation '" + name + "'");
}

namespace {

double apply_act(Act a, double z) {
  switch (a) {
    case Act::identity: return z;
    case Act::relu: return z > 0.0 ? z : 0.0;
    case Act::tanh_fn: return std::tanh(z);
    case Act::sigmoid: return sigmoid(z);
  }
  return z;
}

// Derivative in terms of pre-activation z and post-activation y.
double act_derivative(Act a, double z, double y) {
  switch (a) {
    case Act::identity: return 1.0;
    case Act::relu: return z > 0.0 ? 1.0 : 0.0;
    case Act::tanh_fn: return 1.0 - y * y;
    case Act::sigmoid: return y * (1.0 - y);
  }
  return 1.0;
}

}  // namespace

void DenseNet::init(Rng& rng) {
  const int layers = layer_count();
  weights.assign(layers, {});
  biases.assign(layers, {});
  for (int l = 0; l < layers; ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    weights[l].resize(size_t(fan_out) * fan_in);
    for (auto& w : weights[l]) w = (rng.uniform() * 2.0 - 1.0) * bound;
    biases[l].assign(fan_out, 0.0);
  }
}

std::vector<double> DenseNet::predict(std::span<const double> x) const {
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (int l = 0; l < layer_count(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const Act act = (l + 1 == layer_count()) ? output_act : hidden_act;
    next.assign(out, 0.0);
    for (int o = 0; o < out; ++o) {
      double z = biases[l][o];
      const double* wrow = weights[l].data() + size_t(o) * in;
      for (int i = 0; i < in; ++i) z += wrow[i] * cur[i];
      next[o] = apply_act(act, z);
    }
    cur.swap(next);
  }
  return cur;
}

void Gradients::match(const DenseNet& net) {
  weights.resize(net.weights.size());
  biases.resize(net.biases.size());
  for (size_t l = 0; l < net.weights.size(); ++l) {
    weights[l].assign(net.weights[l].size(), 0.0);
    biases[l].assign(net.biases[l].size(), 0.0);
  }
}

void Gradients::zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

double backprop(const DenseNet& net, std::span<const double> x,
                std::span<const double> target, LossKind loss, Gradients& grads,
                Workspace& ws) {
  const int layers = net.layer_count();
  ws.pre.resize(layers);
  ws.post.resize(layers);
  ws.delta.resize(layers);

  // Forward pass keeping every activation.
  std::span<const double> cur = x;
  for (int l = 0; l < layers; ++l) {
    const int in = net.sizes[l];
    const int out = net.sizes[l + 1];
    const Act act = (l + 1 == layers) ? net.output_act : net.hidden_act;
    ws.pre[l].assign(out, 0.0);
    ws.post[l].assign(out, 0.0);
    for (int o = 0; o < out; ++o) {
      double z = net.biases[l][o];
      const double* wrow = net.weights[l].data() + size_t(o) * in;
      for (int i = 0; i < in; ++i) z += wrow[i] * cur[i];
      ws.pre[l][o] = z;
      ws.post[l][o] = apply_act(act, z);
    }
    cur = ws.post[l];
  }

  const auto& out_post = ws.post[layers - 1];
  const int out_dim = net.sizes[layers];
  double sample_loss = 0.0;
  ws.delta[layers - 1].assign(out_dim, 0.0);
  if (loss == LossKind::mse) {
    for (int o = 0; o < out_dim; ++o) {
      const double diff = out_post[o] - target[o];
      sample_loss += diff * diff;
      const double dl_dy = 2.0 * diff / out_dim;
      ws.delta[layers - 1][o] =
          dl_dy * act_derivative(net.output_act, ws.pre[layers - 1][o],
                                 out_post[o]);
    }
    sample_loss /= out_dim;
  } else {
    // Binary cross-entropy with a sigmoid output collapses to p - y on the
    // pre-activation.
    const double p = std::clamp(out_post[0], 1e-12, 1.0 - 1e-12);
    const double y = target[0];
    sample_loss = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    ws.delta[layers - 1][0] = out_post[0] - y;
  }

  for (int l = layers - 1; l >= 0; --l) {
    const int in = net.sizes[l];
    const int out = net.sizes[l + 1];
    std::span<const double> below = (l == 0) ? x : std::span<const double>(ws.post[l - 1]);
    for (int o = 0; o < out; ++o) {
      const double d = ws.delta[l][o];
      grads.biases[l][o] += d;
      double* grow = grads.weights[l].data() + size_t(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += d * below[i];
    }
    if (l > 0) {
      ws.delta[l - 1].assign(in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double d = ws.delta[l][o];
        const double* wrow = net.weights[l].data() + size_t(o) * in;
        for (int i = 0; i < in; ++i) ws.delta[l - 1][i] += d * wrow[i];
      }
      for (int i = 0; i < in; ++i) {
        ws.delta[l - 1][i] *=
            act_derivative(net.hidden_act, ws.pre[l - 1][i], ws.post[l - 1][i]);
      }
    }
  }
  return sample_loss;
}

void SgdOptimizer::step(DenseNet& net, const Gradients& grads, int batch_size) {
  const double scale = lr / batch_size;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    for (size_t i = 0; i < net.weights[l].size(); ++i) {
      net.weights[l][i] -= scale * grads.weights[l][i];
    }
    for (size_t i = 0; i < net.biases[l].size(); ++i) {
      net.biases[l][i] -= scale * grads.biases[l][i];
    }
  }
}

void AdamOptimizer::step(DenseNet& net, const Gradients& grads,
                         int batch_size) {
  if (!ready_) {
    m_.match(net);
    v_.match(net);
    ready_ = true;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1, t_);
  const double c2 = 1.0 - std::pow(beta2, t_);
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] / batch_size;
      m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
      v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  };
  for (size_t l = 0; l < net.weights.size(); ++l) {
    update(net.weights[l], grads.weights[l], m_.weights[l], v_.weights[l]);
    update(net.biases[l], grads.biases[l], m_.biases[l], v_.biases[l]);
  }
}

void save_net(const DenseNet& net, std::ostream& out) {
  out << "layers";
  for (int s : net.sizes) out << ' ' << s;
  out << '\n';
  out << "hidden_act " << act_name(net.hidden_act) << '\n';
  out << "output_act " << act_name(net.output_act) << '\n';
  for (int l = 0; l < net.layer_count(); ++l) {
    out << "w" << l;
    for (double w : net.weights[l]) out << ' ' << format_double(w);
    out << '\n';
    out << "b" << l;
    for (double b : net.biases[l]) out << ' ' << format_double(b);
    out << '\n';
  }
}

DenseNet load_net(std::istream& in) {
  DenseNet net;
  std::string tag;
  if (!(in >> tag) || tag != "layers") {
    throw ParseError("model file must start with 'layers'");
  }
  std::string line;
  std::getline(in, line);
  {
    std::istringstream ls(line);
    int s;
    while (ls >> s) net.sizes.push_back(s);
  }
  if (net.sizes.size() < 2) throw ParseError("model needs at least two layer sizes");
  std::string name;
  in >> tag >> name;
  net.hidden_act = act_from_name(name);
  in >> tag >> name;
  net.output_act = act_from_name(name);
  net.weights.resize(net.layer_count());
  net.biases.resize(net.layer_count());
  for (int l = 0; l < net.layer_count(); ++l) {
    const size_t w_count = size_t(net.sizes[l + 1]) * net.sizes[l];
    in >> tag;
    net.weights[l].resize(w_count);
    for (auto& w : net.weights[l]) {
      if (!(in >> w)) throw ParseError("model file truncated in weights");
    }
    in >> tag;
    net.biases[l].resize(net.sizes[l + 1]);
    for (auto& b : net.biases[l]) {
      if (!(in >> b)) throw ParseError("model file truncated in biases");
    }
  }
  return net;
}

}  // namespace mge::nn
