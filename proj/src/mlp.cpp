#include "bada/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace bada {

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, int output_dim)
    : input_dim_(input_dim), output_dim_(output_dim), hidden_(hidden) {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    weights_.emplace_back(Matrix::Zero(dims[l + 1], dims[l]));
    biases_.emplace_back(Vector::Zero(dims[l + 1]));
  }
}

void Mlp::init(Rng& rng, double output_scale) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double bound = std::sqrt(3.0 / static_cast<double>(weights_[l].cols()));
    const double scale = (l + 1 == weights_.size()) ? output_scale : 1.0;
    for (Index i = 0; i < weights_[l].rows(); ++i) {
      for (Index j = 0; j < weights_[l].cols(); ++j) {
        weights_[l](i, j) = scale * rng.uniform(-bound, bound);
      }
    }
    biases_[l].setZero();
  }
}

Vector Mlp::forward(const Vector& x) const {
  Vector a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    a = weights_[l] * a + biases_[l];
    if (l + 1 < weights_.size()) a = a.array().tanh();
  }
  return a;
}

Vector Mlp::forward(const Vector& x, Trace& tr) const {
  tr.act.clear();
  tr.act.reserve(weights_.size() + 1);
  tr.act.push_back(x);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Vector a = weights_[l] * tr.act.back() + biases_[l];
    if (l + 1 < weights_.size()) a = a.array().tanh();
    tr.act.push_back(std::move(a));
  }
  return tr.act.back();
}

void Mlp::backward(const Trace& tr, const Vector& dout, Mlp& grads) const {
  Vector dz = dout;
  for (int l = layer_count() - 1; l >= 0; --l) {
    if (l + 1 < layer_count()) {
      // Hidden activations are tanh; tr.act holds post-activation values.
      dz = dz.array() * (1.0 - tr.act[l + 1].array().square());
    }
    grads.weights_[l].noalias() += dz * tr.act[l].transpose();
    grads.biases_[l] += dz;
    if (l > 0) dz = weights_[l].transpose() * dz;
  }
}

void Mlp::set_zero() {
  for (auto& w : weights_) w.setZero();
  for (auto& b : biases_) b.setZero();
}

Index Mlp::parameter_count() const {
  Index n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += weights_[l].size() + biases_[l].size();
  }
  return n;
}

Vector Mlp::flatten() const {
  Vector flat(parameter_count());
  Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.segment(at, weights_[l].size()) =
        Eigen::Map<const Vector>(weights_[l].data(), weights_[l].size());
    at += weights_[l].size();
    flat.segment(at, biases_[l].size()) = biases_[l];
    at += biases_[l].size();
  }
  return flat;
}

void Mlp::unflatten(const Vector& flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("Mlp::unflatten: size mismatch");
  }
  Index at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::Map<Vector>(weights_[l].data(), weights_[l].size()) =
        flat.segment(at, weights_[l].size());
    at += weights_[l].size();
    biases_[l] = flat.segment(at, biases_[l].size());
    at += biases_[l].size();
  }
}

void to_json(nlohmann::json& j, const Mlp& net) {
  j = nlohmann::json{{"input_dim", net.input_dim_},
                     {"hidden", net.hidden_},
                     {"output_dim", net.output_dim_}};
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    const Matrix& w = net.weights_[l];
    std::vector<double> flat(w.size());
    Eigen::Map<Matrix>(flat.data(), w.rows(), w.cols()) = w;
    weights.push_back(flat);
    biases.push_back(std::vector<double>(net.biases_[l].data(),
                                         net.biases_[l].data() + net.biases_[l].size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
}

void from_json(const nlohmann::json& j, Mlp& net) {
  net = Mlp(j.at("input_dim").get<int>(), j.at("hidden").get<std::vector<int>>(),
            j.at("output_dim").get<int>());
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto w = weights.at(l).get<std::vector<double>>();
    const auto b = biases.at(l).get<std::vector<double>>();
    if (static_cast<Index>(w.size()) != net.weights_[l].size() ||
        static_cast<Index>(b.size()) != net.biases_[l].size()) {
      throw std::invalid_argument("Mlp: serialized layer shape mismatch");
    }
    net.weights_[l] = Eigen::Map<const Matrix>(w.data(), net.weights_[l].rows(),
                                               net.weights_[l].cols());
    net.biases_[l] = Eigen::Map<const Vector>(b.data(), net.biases_[l].size());
  }
}

}  // namespace bada
