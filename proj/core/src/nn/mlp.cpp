#include "gdmopt/nn/mlp.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "gdmopt/error.hpp"

namespace gdmopt::nn {

namespace {

void apply_activation(Activation a, Mat& z) {
  switch (a) {
    case Activation::kLinear: break;
    case Activation::kTanh: {
      // 1 - 2 / (exp(2z) + 1) runs on Eigen's vectorized exp, unlike the
      // scalar libm tanh; absolute error stays at the 1e-16 level. Beyond
      // |z| = 20 tanh equals +-1 in double precision.
      const auto c = z.array().max(-20.0).min(20.0);
      z = (1.0 - 2.0 / ((2.0 * c).exp() + 1.0)).matrix();
      break;
    }
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
  }
}

// dL/dz from dL/dy, given y = act(z).
void activation_backward(Activation a, const Mat& y, Mat& grad) {
  switch (a) {
    case Activation::kLinear: break;
    case Activation::kTanh: grad.array() *= (1.0 - y.array().square()); break;
    case Activation::kRelu: grad.array() *= (y.array() > 0.0).cast<double>(); break;
  }
}

std::string dims_message(std::string_view what, std::size_t expected, std::size_t got) {
  return std::string(what) + ": expected " + std::to_string(expected) + ", got " + std::to_string(got);
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "linear";
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  return std::nullopt;
}

std::uint64_t ParamSet::next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

ParamSet::ParamSet(std::vector<Layer> layers) : layers_(std::move(layers)), id_(next_id()) { validate(); }

ParamSet::ParamSet(const ParamSet& other) : layers_(other.layers_), id_(next_id()), version_(0) {}

ParamSet& ParamSet::operator=(const ParamSet& other) {
  if (this != &other) {
    layers_ = other.layers_;
    ++version_;
  }
  return *this;
}

void ParamSet::validate() const {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    if (l.bias.size() != l.weight.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "layer " + std::to_string(k) + ": bias length != weight rows");
    }
    if (k > 0 && layers_[k - 1].out_dim() != l.in_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  dims_message("layer " + std::to_string(k) + " input", layers_[k - 1].out_dim(), l.in_dim()));
    }
  }
}

Layer& ParamSet::mutable_layer(std::size_t i) {
  ++version_;
  return layers_.at(i);
}

std::size_t ParamSet::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }

std::size_t ParamSet::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

// Layer order; within a layer, weights row-major then bias.
std::vector<double> ParamSet::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const Layer& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void ParamSet::assign(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw Error(ErrorCode::kDimensionMismatch, dims_message("assign parameter count", parameter_count(), values.size()));
  }
  std::size_t i = 0;
  for (Layer& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[i++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[i++];
  }
  ++version_;
}

bool ParamSet::shape_equals(const ParamSet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& a = layers_[k];
    const Layer& b = other.layers_[k];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() || a.activation != b.activation) {
      return false;
    }
  }
  return true;
}

bool ParamSet::all_finite() const {
  for (const Layer& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

ParamSet make_mlp(std::span<const std::size_t> dims, Activation hidden, Activation output, Rng& rng) {
  if (dims.size() < 2) throw Error(ErrorCode::kInvalidArgument, "make_mlp needs at least input and output dims");
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(dims[k]);
    const auto out = static_cast<Eigen::Index>(dims[k + 1]);
    if (in == 0 || out == 0) throw Error(ErrorCode::kInvalidArgument, "make_mlp: zero-width layer");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer l;
    l.weight.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = rng.uniform(-limit, limit);
    }
    l.bias = Vec::Zero(out);
    l.activation = (k + 2 == dims.size()) ? output : hidden;
    layers.push_back(std::move(l));
  }
  return ParamSet(std::move(layers));
}

ParamSet make_mlp(std::initializer_list<std::size_t> dims, Activation hidden, Activation output, Rng& rng) {
  return make_mlp(std::span<const std::size_t>(dims.begin(), dims.size()), hidden, output, rng);
}

GradSet GradSet::zeros_like(const ParamSet& params) {
  GradSet g;
  for (const Layer& l : params.layers()) {
    g.weight.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vec::Zero(l.bias.size()));
  }
  return g;
}

bool GradSet::shape_matches(const ParamSet& params) const {
  if (weight.size() != params.num_layers() || bias.size() != params.num_layers()) return false;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    const Layer& l = params.layer(k);
    if (weight[k].rows() != l.weight.rows() || weight[k].cols() != l.weight.cols() || bias[k].size() != l.bias.size()) {
      return false;
    }
  }
  return true;
}

GradSet& GradSet::operator+=(const GradSet& other) {
  if (other.weight.size() != weight.size()) throw Error(ErrorCode::kDimensionMismatch, "GradSet += shape mismatch");
  for (std::size_t k = 0; k < weight.size(); ++k) {
    if (weight[k].rows() != other.weight[k].rows() || weight[k].cols() != other.weight[k].cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "GradSet += shape mismatch");
    }
    weight[k] += other.weight[k];
    bias[k] += other.bias[k];
  }
  return *this;
}

GradSet& GradSet::operator*=(double s) {
  for (auto& w : weight) w *= s;
  for (auto& b : bias) b *= s;
  return *this;
}

void GradSet::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

double GradSet::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weight) s += w.squaredNorm();
  for (const auto& b : bias) s += b.squaredNorm();
  return s;
}

double GradSet::norm() const { return std::sqrt(squared_norm()); }

bool GradSet::all_finite() const {
  for (std::size_t k = 0; k < weight.size(); ++k) {
    if (!weight[k].allFinite() || !bias[k].allFinite()) return false;
  }
  return true;
}

std::vector<double> GradSet::flatten() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    for (Eigen::Index r = 0; r < weight[k].rows(); ++r) {
      for (Eigen::Index c = 0; c < weight[k].cols(); ++c) out.push_back(weight[k](r, c));
    }
    for (Eigen::Index r = 0; r < bias[k].size(); ++r) out.push_back(bias[k](r));
  }
  return out;
}

Vec forward(const ParamSet& params, const Vec& input) {
  Mat out = forward(params, Mat(input));
  return out.col(0);
}

Mat forward(const ParamSet& params, const Mat& inputs) {
  if (static_cast<std::size_t>(inputs.rows()) != params.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                dims_message("mlp input", params.input_dim(), static_cast<std::size_t>(inputs.rows())));
  }
  Mat h = inputs;
  for (const Layer& l : params.layers()) {
    Mat z = l.weight * h;
    z.colwise() += l.bias;
    apply_activation(l.activation, z);
    h = std::move(z);
  }
  return h;
}

Mat forward(const ParamSet& params, const Mat& inputs, ForwardTape& tape) {
  if (static_cast<std::size_t>(inputs.rows()) != params.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                dims_message("mlp input", params.input_dim(), static_cast<std::size_t>(inputs.rows())));
  }
  tape.params_id = params.id();
  tape.params_version = params.version();
  tape.inputs.clear();
  tape.activations.clear();
  tape.inputs.reserve(params.num_layers());
  tape.activations.reserve(params.num_layers());

  Mat h = inputs;
  for (const Layer& l : params.layers()) {
    tape.inputs.push_back(h);
    Mat z = l.weight * h;
    z.colwise() += l.bias;
    apply_activation(l.activation, z);
    tape.activations.push_back(z);
    h = std::move(z);
  }
  return h;
}

Mat backward(const ParamSet& params, const ForwardTape& tape, const Mat& upstream, GradSet* grads) {
  if (tape.params_id != params.id() || tape.params_version != params.version() ||
      tape.inputs.size() != params.num_layers()) {
    throw Error(ErrorCode::kStaleTape, "tape was not recorded against the current parameters");
  }
  if (static_cast<std::size_t>(upstream.rows()) != params.output_dim() ||
      static_cast<std::size_t>(upstream.cols()) != tape.batch()) {
    throw Error(ErrorCode::kDimensionMismatch, "upstream gradient shape does not match forward output");
  }
  if (grads != nullptr && !grads->shape_matches(params)) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient accumulator shape does not match parameters");
  }

  Mat delta = upstream;
  for (std::size_t k = params.num_layers(); k-- > 0;) {
    const Layer& l = params.layer(k);
    activation_backward(l.activation, tape.activations[k], delta);
    if (grads != nullptr) {
      grads->weight[k].noalias() += delta * tape.inputs[k].transpose();
      grads->bias[k].noalias() += delta.rowwise().sum();
    }
    delta = l.weight.transpose() * delta;
  }
  return delta;
}

BackwardResult backward(const ParamSet& params, const ForwardTape& tape, const Mat& upstream) {
  BackwardResult r{GradSet::zeros_like(params), Mat()};
  r.input_grad = backward(params, tape, upstream, &r.grads);
  return r;
}

void soft_update(ParamSet& target, const ParamSet& source, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "soft_update: tau must be in (0, 1]");
  if (!target.shape_equals(source)) throw Error(ErrorCode::kDimensionMismatch, "soft_update: shape mismatch");
  for (std::size_t k = 0; k < target.num_layers(); ++k) {
    Layer& t = target.mutable_layer(k);
    const Layer& s = source.layer(k);
    if (tau == 1.0) {
      t.weight = s.weight;
      t.bias = s.bias;
    } else {
      t.weight = tau * s.weight + (1.0 - tau) * t.weight;
      t.bias = tau * s.bias + (1.0 - tau) * t.bias;
    }
  }
}

}  // namespace gdmopt::nn
