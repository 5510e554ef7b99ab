#include "wpolab/diff_net.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wpolab {

Activation activation_from_string(const std::string& s) {
  if (s == "elu") return Activation::elu;
  if (s == "silu") return Activation::silu;
  if (s == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::elu: return "elu";
    case Activation::silu: return "silu";
    case Activation::identity: return "identity";
  }
  throw std::logic_error("bad activation enum");
}

double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::elu: return x > 0.0 ? x : std::expm1(x);
    case Activation::silu: return x / (1.0 + std::exp(-x));
    case Activation::identity: return x;
  }
  throw std::logic_error("bad activation enum");
}

double activation_derivative(Activation a, double x) {
  switch (a) {
    case Activation::elu: return x > 0.0 ? 1.0 : std::exp(x);
    case Activation::silu: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 + x * (1.0 - s));
    }
    case Activation::identity: return 1.0;
  }
  throw std::logic_error("bad activation enum");
}

DiffNet DiffNet::make(const std::vector<int>& sizes, Activation act, Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("DiffNet: need at least two sizes");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("DiffNet: layer sizes must be positive");
  DiffNet net;
  net.sizes = sizes;
  net.hidden_act = act;
  net.params.resize(net.param_count());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i)
      net.params[off++] = rng.uniform(-bound, bound);
    for (int i = 0; i < fan_out; ++i) net.params[off++] = 0.0;
  }
  return net;
}

std::size_t DiffNet::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  return n;
}

Vec DiffNet::forward(const Vec& input) const {
  return net_forward(*this, input).output;
}

NetTape net_forward(const DiffNet& net, const Vec& input) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument("net_forward: input dim mismatch");
  NetTape tape;
  const std::size_t layers = net.sizes.size() - 1;
  tape.inputs.resize(layers);
  tape.pre.resize(layers);

  Vec x = input;
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = net.sizes[l];
    const int out = net.sizes[l + 1];
    tape.inputs[l] = x;
    Vec z(out);
    for (int i = 0; i < out; ++i) {
      const double* w = &net.params[off + static_cast<std::size_t>(i) * in];
      double s = net.params[off + static_cast<std::size_t>(out) * in + i];
      for (int j = 0; j < in; ++j) s += w[j] * x[j];
      z[i] = s;
    }
    off += static_cast<std::size_t>(out) * in + out;
    tape.pre[l] = z;
    if (l + 1 < layers) {
      x.resize(out);
      for (int i = 0; i < out; ++i) x[i] = apply_activation(net.hidden_act, z[i]);
    } else {
      x = z;
    }
  }
  tape.output = x;
  return tape;
}

Vec net_backward_accumulate(const DiffNet& net, const NetTape& tape, const Vec& v,
                            Vec& d_params) {
  if (static_cast<int>(v.size()) != net.output_dim())
    throw std::invalid_argument("net_backward: cotangent dim mismatch");
  if (d_params.size() != net.param_count())
    throw std::invalid_argument("net_backward: d_params size mismatch");

  const std::size_t layers = net.sizes.size() - 1;
  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(net.sizes[l + 1]) * net.sizes[l] + net.sizes[l + 1];
  }

  Vec delta = v;  // cotangent on the current layer's preactivation
  for (std::size_t li = layers; li-- > 0;) {
    const int in = net.sizes[li];
    const int out = net.sizes[li + 1];
    if (li + 1 < layers)
      for (int i = 0; i < out; ++i)
        delta[i] *= activation_derivative(net.hidden_act, tape.pre[li][i]);

    const Vec& x = tape.inputs[li];
    double* dw = &d_params[offsets[li]];
    double* db = &d_params[offsets[li] + static_cast<std::size_t>(out) * in];
    Vec dx(in, 0.0);
    for (int i = 0; i < out; ++i) {
      const double di = delta[i];
      const double* w = &net.params[offsets[li] + static_cast<std::size_t>(i) * in];
      double* dwi = dw + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) {
        dwi[j] += di * x[j];
        dx[j] += di * w[j];
      }
      db[i] += di;
    }
    delta = std::move(dx);
  }
  return delta;
}

NetVjp net_backward(const DiffNet& net, const NetTape& tape, const Vec& v) {
  NetVjp out;
  out.d_params.assign(net.param_count(), 0.0);
  out.d_input = net_backward_accumulate(net, tape, v, out.d_params);
  return out;
}

void Sgd::step(Vec& params, const Vec& grad) const {
  check_same_size(params, grad, "Sgd::step");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
}

void Adam::step(Vec& params, const Vec& grad) {
  check_same_size(params, grad, "Adam::step");
  if (m.empty()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const DiffNet*>>& nets,
                     const std::map<std::string, double>& scalars) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open checkpoint for write: " + path);
  f << kCheckpointHeader << "\n";
  f << "nets " << nets.size() << "\n";
  char buf[32];
  for (const auto& [name, net] : nets) {
    f << "net " << name << "\n";
    f << "sizes";
    for (int s : net->sizes) f << ' ' << s;
    f << "\n";
    f << "act " << to_string(net->hidden_act) << "\n";
    f << "params " << net->params.size() << "\n";
    for (double p : net->params) {
      std::snprintf(buf, sizeof buf, "%.17g", p);
      f << buf << "\n";
    }
  }
  f << "scalars " << scalars.size() << "\n";
  for (const auto& [name, value] : scalars) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    f << name << ' ' << buf << "\n";
  }
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

void load_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, DiffNet*>>& nets,
                     std::map<std::string, double>* scalars) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(f, line) || line != kCheckpointHeader)
    throw std::runtime_error("bad checkpoint header in " + path);

  std::string word;
  std::size_t count = 0;
  f >> word >> count;
  if (word != "nets") throw std::runtime_error("malformed checkpoint: " + path);

  struct Blob {
    std::vector<int> sizes;
    Activation act;
    Vec params;
  };
  std::map<std::string, Blob> stored;
  for (std::size_t k = 0; k < count; ++k) {
    std::string name, got;
    f >> word >> name;
    if (word != "net") throw std::runtime_error("malformed checkpoint: " + path);
    f >> word;
    if (word != "sizes") throw std::runtime_error("malformed checkpoint: " + path);
    Blob blob;
    {
      std::getline(f, line);
      std::istringstream ss(line);
      int s;
      while (ss >> s) blob.sizes.push_back(s);
    }
    f >> word >> got;
    if (word != "act") throw std::runtime_error("malformed checkpoint: " + path);
    blob.act = activation_from_string(got);
    std::size_t n = 0;
    f >> word >> n;
    if (word != "params") throw std::runtime_error("malformed checkpoint: " + path);
    blob.params.resize(n);
    for (std::size_t i = 0; i < n; ++i) f >> blob.params[i];
    stored.emplace(name, std::move(blob));
  }

  for (const auto& [name, net] : nets) {
    const auto it = stored.find(name);
    if (it == stored.end())
      throw std::runtime_error("checkpoint " + path + " has no net '" + name + "'");
    net->sizes = it->second.sizes;
    net->hidden_act = it->second.act;
    net->params = it->second.params;
    if (net->params.size() != net->param_count())
      throw std::runtime_error("checkpoint param count inconsistent with sizes");
  }

  f >> word >> count;
  if (word != "scalars") throw std::runtime_error("malformed checkpoint: " + path);
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    double value;
    f >> name >> value;
    if (scalars) (*scalars)[name] = value;
  }
  if (f.fail()) throw std::runtime_error("checkpoint parse failed: " + path);
}

}  // namespace wpolab
