#pragma once

#include <vector>

#include <json.hpp>

#include "bada/common.hpp"
#include "bada/rng.hpp"

namespace bada {

// Feed-forward net with tanh hidden layers and a linear output layer.
// Forward/backward are explicit; no autodiff anywhere in the project.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, const std::vector<int>& hidden, int output_dim);

  // Symmetric uniform init scaled by 1/sqrt(fan_in); the output layer is
  // additionally scaled by output_scale.
  void init(Rng& rng, double output_scale = 1.0);

  Vector forward(const Vector& x) const;

  struct Trace {
    std::vector<Vector> act;  // act[0] = input, act[L] = output
  };
  Vector forward(const Vector& x, Trace& tr) const;

  // Accumulates d(out)/d(params) * dout into grads (same architecture).
  void backward(const Trace& tr, const Vector& dout, Mlp& grads) const;

  void set_zero();
  Index parameter_count() const;
  Vector flatten() const;
  void unflatten(const Vector& flat);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  const std::vector<Matrix>& weights() const { return weights_; }

  friend void to_json(nlohmann::json& j, const Mlp& net);
  friend void from_json(const nlohmann::json& j, Mlp& net);

 private:
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<Matrix> weights_;  // weights_[l]: out_l x in_l
  std::vector<Vector> biases_;
};

}  // namespace bada
