#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saln/matrix.hpp"

namespace saln {

enum class Architecture { linear, mlp };

/// One affine layer: y = x * weight + bias. weight is (fan_in x fan_out).
struct Layer {
    Matrix weight;
    std::vector<double> bias;
};

/// Softmax-regression (linear) or one-hidden-layer ReLU MLP classifier.
/// Layers are [fc] for linear and [hidden, fc] for the MLP; the last layer is
/// always the fully connected head with one unit per class.
struct Classifier {
    Architecture architecture = Architecture::linear;
    std::size_t input_dim = 0;
    std::size_t class_count = 0;
    std::size_t hidden_width = 0; // mlp only
    std::vector<Layer> layers;

    const Layer& final_layer() const { return layers.back(); }
};

/// Per-layer parameter gradients, same shapes as Classifier::layers.
struct Gradients {
    std::vector<Layer> layers;
};

/// Classical SGD momentum state: v <- mu*v + g, w <- w - lr*v.
struct OptimizerState {
    double learning_rate = 0.001;
    double momentum = 0.9;
    std::vector<Layer> velocity; // same shapes as the model's layers
};

/// Build a classifier with uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) init.
Classifier make_classifier(Architecture arch, std::size_t input_dim, std::size_t class_count,
                           std::size_t hidden_width, std::uint64_t init_seed);

/// Zero-initialized velocity buffers matching the model.
OptimizerState make_optimizer(const Classifier& model, double learning_rate, double momentum);

/// Logits (rows x class_count). The MLP applies one ReLU hidden layer before
/// the head.
Matrix forward(const Classifier& model, const Matrix& x);

struct LossAndGrad {
    double loss = 0.0;
    Matrix grad_logits; // (softmax - onehot) / rows
};

/// Mean negative log softmax likelihood, max-subtraction stabilized.
LossAndGrad cross_entropy(const Matrix& logits, const std::vector<int>& labels);

/// Per-row negative log softmax likelihood (for per-sample scoring).
std::vector<double> per_sample_loss(const Matrix& logits, const std::vector<int>& labels);

/// Analytic parameter gradients of forward() composed with grad_logits.
Gradients backward(const Classifier& model, const Matrix& x, const Matrix& grad_logits);

/// In-place momentum update of model and optimizer state.
void sgd_momentum_step(Classifier& model, OptimizerState& opt, const Gradients& grads);

struct Evaluation {
    double accuracy = 0.0; // argmax ties go to the lower class index
    double loss = 0.0;
};

Evaluation evaluate(const Classifier& model, const Matrix& x, const std::vector<int>& labels);

/// Flat JSON {layer name -> {"shape": [...], "values": [row-major]}}. Weight
/// matrices are exported output-unit-major, i.e. shape [units, fan_in].
std::string weights_to_json(const Classifier& model);

} // namespace saln
