#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gdmopt/rng.hpp"
#include "gdmopt/types.hpp"

namespace gdmopt::nn {

enum class Activation { kLinear, kTanh, kRelu };

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

struct Layer {
  Mat weight;  // out x in
  Vec bias;    // out
  Activation activation = Activation::kLinear;

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

// Feed-forward network weights. Each instance carries an identity and a
// mutation counter so a ForwardTape recorded against one state of one network
// cannot be replayed against another.
class ParamSet {
 public:
  ParamSet() : id_(next_id()) {}
  explicit ParamSet(std::vector<Layer> layers);

  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  std::size_t num_layers() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  // Mutable access counts as a mutation and invalidates outstanding tapes.
  Layer& mutable_layer(std::size_t i);
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  std::vector<double> flatten() const;
  void assign(std::span<const double> values);

  bool shape_equals(const ParamSet& other) const;
  bool all_finite() const;

  std::uint64_t id() const { return id_; }
  std::uint64_t version() const { return version_; }

 private:
  static std::uint64_t next_id();
  void validate() const;

  std::vector<Layer> layers_;
  std::uint64_t id_;
  std::uint64_t version_ = 0;
};

// Glorot-uniform weights, zero biases. `dims` lists layer widths including the
// input, e.g. {4, 64, 64, 2}. Hidden layers use `hidden`, the last layer
// `output`.
ParamSet make_mlp(std::span<const std::size_t> dims, Activation hidden, Activation output, Rng& rng);
ParamSet make_mlp(std::initializer_list<std::size_t> dims, Activation hidden, Activation output, Rng& rng);

// Partial derivatives with the same shape as a ParamSet.
struct GradSet {
  std::vector<Mat> weight;
  std::vector<Vec> bias;

  static GradSet zeros_like(const ParamSet& params);

  bool shape_matches(const ParamSet& params) const;
  GradSet& operator+=(const GradSet& other);
  GradSet& operator*=(double s);
  void set_zero();
  double squared_norm() const;
  double norm() const;
  bool all_finite() const;
  std::vector<double> flatten() const;
};

// Activations recorded by a forward pass over a batch (one column per sample).
struct ForwardTape {
  std::uint64_t params_id = 0;
  std::uint64_t params_version = 0;
  std::vector<Mat> inputs;       // input to layer k
  std::vector<Mat> activations;  // output of layer k (post-activation)

  std::size_t batch() const { return inputs.empty() ? 0 : static_cast<std::size_t>(inputs[0].cols()); }
};

Vec forward(const ParamSet& params, const Vec& input);
Mat forward(const ParamSet& params, const Mat& inputs);
Mat forward(const ParamSet& params, const Mat& inputs, ForwardTape& tape);

// Backpropagates `upstream` (dL/d output, one column per sample) through the
// recorded pass. Parameter gradients are summed over the batch into `grads`
// when it is non-null; the return value is dL/d input.
Mat backward(const ParamSet& params, const ForwardTape& tape, const Mat& upstream, GradSet* grads);

struct BackwardResult {
  GradSet grads;
  Mat input_grad;
};
BackwardResult backward(const ParamSet& params, const ForwardTape& tape, const Mat& upstream);

// target <- tau * source + (1 - tau) * target, elementwise.
void soft_update(ParamSet& target, const ParamSet& source, double tau);

}  // namespace gdmopt::nn

namespace gdmopt::nn {

struct LossAndGrad {
  double loss = 0.0;
  GradSet grads;
};

}  // namespace gdmopt::nn
