#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirp/rng.hpp"

namespace dirp {

using Vec = std::vector<double>;

enum class Activation { linear, relu, softmax };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "linear") return Activation::linear;
  if (s == "relu") return Activation::relu;
  if (s == "softmax") return Activation::softmax;
  throw std::runtime_error("unknown activation: " + s);
}

// Dense layer. Weights are row-major, w[o * in + i]. `groups` matters only
// for softmax outputs: the out vector splits into `groups` equal blocks and
// each block is normalized on its own (one block per cell for the
// centralized actor, a single block for a local actor).
struct Layer {
  int in = 0;
  int out = 0;
  Activation act = Activation::linear;
  int groups = 1;
  Vec w;
  Vec b;
};

struct Mlp {
  std::vector<Layer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

// Numerically safe per-group softmax (max subtraction before exp).
inline Vec decoupled_softmax(const Vec& logits, int groups) {
  if (groups <= 0 || logits.empty() || logits.size() % static_cast<std::size_t>(groups) != 0)
    throw std::invalid_argument("softmax: output size not divisible into groups");
  const std::size_t block = logits.size() / static_cast<std::size_t>(groups);
  Vec y(logits.size());
  for (int g = 0; g < groups; ++g) {
    const std::size_t base = static_cast<std::size_t>(g) * block;
    double m = logits[base];
    for (std::size_t i = 1; i < block; ++i) m = std::max(m, logits[base + i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < block; ++i) {
      y[base + i] = std::exp(logits[base + i] - m);
      sum += y[base + i];
    }
    for (std::size_t i = 0; i < block; ++i) y[base + i] /= sum;
  }
  return y;
}

// Layer dims hidden layers get relu, the last layer gets `out_act`.
// Init is uniform in +-1/sqrt(fan_in) for both weights and biases.
inline Mlp make_mlp(const std::vector<int>& dims, Activation out_act, int out_groups,
                    std::mt19937_64& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("make_mlp: nonpositive layer dim");
  if (out_act == Activation::softmax && dims.back() % out_groups != 0)
    throw std::invalid_argument("make_mlp: output dim not divisible by groups");
  Mlp net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    const bool last = (l + 2 == dims.size());
    layer.act = last ? out_act : Activation::relu;
    layer.groups = (last && out_act == Activation::softmax) ? out_groups : 1;
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.resize(static_cast<std::size_t>(layer.out));
    for (auto& v : layer.w) v = dist(rng);
    for (auto& v : layer.b) v = dist(rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

// Forward pass record: layer inputs and preactivations, enough to run the
// exact reverse pass later.
struct Tape {
  std::vector<Vec> x;  // x[l] = input of layer l
  std::vector<Vec> z;  // z[l] = preactivation of layer l
  Vec y;               // network output
};

inline void forward(const Mlp& net, const Vec& in, Tape& tape) {
  if (static_cast<int>(in.size()) != net.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  tape.x.assign(net.layers.size(), Vec{});
  tape.z.assign(net.layers.size(), Vec{});
  Vec cur = in;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    tape.x[l] = cur;
    Vec z(static_cast<std::size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o) {
      double acc = layer.b[static_cast<std::size_t>(o)];
      const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) acc += wrow[i] * cur[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = acc;
    }
    tape.z[l] = z;
    switch (layer.act) {
      case Activation::linear: cur = z; break;
      case Activation::relu:
        cur = z;
        for (auto& v : cur) v = v > 0.0 ? v : 0.0;
        break;
      case Activation::softmax: cur = decoupled_softmax(z, layer.groups); break;
    }
  }
  tape.y = cur;
}

inline Vec forward(const Mlp& net, const Vec& in) {
  Tape t;
  forward(net, in, t);
  return t.y;
}

// Gradient accumulator shaped like a given net.
struct Grad {
  std::vector<Vec> w;
  std::vector<Vec> b;

  static Grad zeros_like(const Mlp& net) {
    Grad g;
    g.w.reserve(net.layers.size());
    g.b.reserve(net.layers.size());
    for (const auto& l : net.layers) {
      g.w.emplace_back(l.w.size(), 0.0);
      g.b.emplace_back(l.b.size(), 0.0);
    }
    return g;
  }

  void zero() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
  }

  void scale(double s) {
    for (auto& v : w)
      for (auto& x : v) x *= s;
    for (auto& v : b)
      for (auto& x : v) x *= s;
  }
};

// Reverse pass. `dy` is dLoss/dOutput at the tape's output; gradients are
// accumulated (+=) into `grad`; the return value is dLoss/dInput.
// Softmax backprop within a group g: dz_i = y_i * (dy_i - sum_j y_j dy_j).
inline Vec backward(const Mlp& net, const Tape& tape, const Vec& dy_out, Grad& grad) {
  if (dy_out.size() != tape.y.size()) throw std::invalid_argument("backward: dy dim mismatch");
  Vec dy = dy_out;
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const Layer& layer = net.layers[li];
    const Vec& z = tape.z[li];
    const Vec& x = tape.x[li];
    Vec dz(static_cast<std::size_t>(layer.out));
    switch (layer.act) {
      case Activation::linear: dz = dy; break;
      case Activation::relu:
        for (int o = 0; o < layer.out; ++o)
          dz[static_cast<std::size_t>(o)] =
              z[static_cast<std::size_t>(o)] > 0.0 ? dy[static_cast<std::size_t>(o)] : 0.0;
        break;
      case Activation::softmax: {
        const Vec y = (li + 1 == net.layers.size()) ? tape.y : decoupled_softmax(z, layer.groups);
        const int block = layer.out / layer.groups;
        for (int g = 0; g < layer.groups; ++g) {
          const int base = g * block;
          double dot = 0.0;
          for (int i = 0; i < block; ++i)
            dot += y[static_cast<std::size_t>(base + i)] * dy[static_cast<std::size_t>(base + i)];
          for (int i = 0; i < block; ++i)
            dz[static_cast<std::size_t>(base + i)] =
                y[static_cast<std::size_t>(base + i)] *
                (dy[static_cast<std::size_t>(base + i)] - dot);
        }
        break;
      }
    }
    Vec& gw = grad.w[li];
    Vec& gb = grad.b[li];
    Vec dx(static_cast<std::size_t>(layer.in), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double d = dz[static_cast<std::size_t>(o)];
      gb[static_cast<std::size_t>(o)] += d;
      double* gwrow = gw.data() + static_cast<std::size_t>(o) * layer.in;
      const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) {
        gwrow[i] += d * x[static_cast<std::size_t>(i)];
        dx[static_cast<std::size_t>(i)] += wrow[i] * d;
      }
    }
    dy = std::move(dx);
  }
  return dy;
}

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Vec> mw, vw, mb, vb;

  static AdamState make(const Mlp& net, double lr) {
    AdamState s;
    s.lr = lr;
    for (const auto& l : net.layers) {
      s.mw.emplace_back(l.w.size(), 0.0);
      s.vw.emplace_back(l.w.size(), 0.0);
      s.mb.emplace_back(l.b.size(), 0.0);
      s.vb.emplace_back(l.b.size(), 0.0);
    }
    return s;
  }
};

namespace detail {
inline void adam_apply(Vec& p, const Vec& g, Vec& m, Vec& v, const AdamState& s, double bc1,
                       double bc2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(g[i])) throw std::invalid_argument("adam_step: nonfinite gradient");
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}
}  // namespace detail

// One Adam update with bias correction. Rejects nonfinite gradients before
// touching any parameter.
inline void adam_step(Mlp& net, const Grad& grad, AdamState& s) {
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    for (double g : grad.w[li])
      if (!std::isfinite(g)) throw std::invalid_argument("adam_step: nonfinite gradient");
    for (double g : grad.b[li])
      if (!std::isfinite(g)) throw std::invalid_argument("adam_step: nonfinite gradient");
  }
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    detail::adam_apply(net.layers[li].w, grad.w[li], s.mw[li], s.vw[li], s, bc1, bc2);
    detail::adam_apply(net.layers[li].b, grad.b[li], s.mb[li], s.vb[li], s, bc1, bc2);
  }
}

// theta_target <- tau * theta + (1 - tau) * theta_target, elementwise
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.layers.size() != online.layers.size())
    throw std::invalid_argument("soft_update: shape mismatch");
  for (std::size_t li = 0; li < target.layers.size(); ++li) {
    Layer& t = target.layers[li];
    const Layer& o = online.layers[li];
    if (t.w.size() != o.w.size() || t.b.size() != o.b.size())
      throw std::invalid_argument("soft_update: shape mismatch");
    for (std::size_t i = 0; i < t.w.size(); ++i) t.w[i] = tau * o.w[i] + (1.0 - tau) * t.w[i];
    for (std::size_t i = 0; i < t.b.size(); ++i) t.b[i] = tau * o.b[i] + (1.0 - tau) * t.b[i];
  }
}

}  // namespace dirp
