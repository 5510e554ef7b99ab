#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "wpolab/rng.hpp"
#include "wpolab/vec.hpp"

namespace wpolab {

enum class Activation { elu, silu, identity };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

double apply_activation(Activation a, double x);
double activation_derivative(Activation a, double x);

// Fully connected net on doubles. Hidden layers use the configured
// activation, the last layer is linear. Parameters live in one flat vector,
// per layer weights (out x in, row-major) then biases.
struct DiffNet {
  std::vector<int> sizes;
  Activation hidden_act = Activation::elu;
  Vec params;

  static DiffNet make(const std::vector<int>& sizes, Activation act, Rng& rng);

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  std::size_t param_count() const;

  Vec forward(const Vec& input) const;
};

// Cached forward pass for reverse mode.
struct NetTape {
  std::vector<Vec> inputs;  // activation vector fed to each layer
  std::vector<Vec> pre;     // preactivations per layer
  Vec output;
};

NetTape net_forward(const DiffNet& net, const Vec& input);

struct NetVjp {
  Vec d_params;
  Vec d_input;
};

// Vector-Jacobian product for cotangent v on the output; one reverse sweep
// yields gradients for both the parameters and the input.
NetVjp net_backward(const DiffNet& net, const NetTape& tape, const Vec& v);

// Accumulating variant for batch losses: adds the parameter gradient into
// d_params (must be param_count long) and returns the input gradient.
Vec net_backward_accumulate(const DiffNet& net, const NetTape& tape, const Vec& v,
                            Vec& d_params);

struct Sgd {
  double lr = 3e-4;
  void step(Vec& params, const Vec& grad) const;
};

struct Adam {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vec m, v;
  long t = 0;

  void step(Vec& params, const Vec& grad);
};

// Checkpoint files start with this header line.
inline constexpr const char* kCheckpointHeader = "wpolab-ckpt-v1";

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const DiffNet*>>& nets,
                     const std::map<std::string, double>& scalars = {});
void load_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, DiffNet*>>& nets,
                     std::map<std::string, double>* scalars = nullptr);

}  // namespace wpolab
