#include "saln/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "saln/errors.hpp"
#include "saln/rng.hpp"

namespace saln {

namespace {

Layer init_layer(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    Layer layer;
    layer.weight = Matrix(fan_in, fan_out);
    for (std::size_t i = 0; i < fan_in; ++i)
        for (std::size_t j = 0; j < fan_out; ++j) layer.weight(i, j) = uniform_range(rng, -bound, bound);
    layer.bias.resize(fan_out);
    for (std::size_t j = 0; j < fan_out; ++j) layer.bias[j] = uniform_range(rng, -bound, bound);
    return layer;
}

Matrix affine(const Matrix& x, const Layer& layer) {
    if (x.cols() != layer.weight.rows())
        throw DimensionMismatch("forward: input width does not match layer fan-in");
    Matrix out = matmul(x, layer.weight);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double* row = out.row(i);
        for (std::size_t j = 0; j < out.cols(); ++j) row[j] += layer.bias[j];
    }
    return out;
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> sums(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) sums[j] += row[j];
    }
    return sums;
}

// Row-wise log-sum-exp with max subtraction; also emits each row's max.
void row_logsumexp(const Matrix& logits, std::vector<double>& lse, std::vector<double>& rowmax) {
    const std::size_t rows = logits.rows();
    const std::size_t c = logits.cols();
    lse.resize(rows);
    rowmax.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = logits.row(i);
        double m = row[0];
        for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j) acc += std::exp(row[j] - m);
        rowmax[i] = m;
        lse[i] = m + std::log(acc);
    }
}

void check_labels(const std::vector<int>& labels, std::size_t rows, std::size_t class_count) {
    if (labels.size() != rows) throw LengthMismatch("labels do not match the row count");
    for (int label : labels)
        if (label < 0 || static_cast<std::size_t>(label) >= class_count)
            throw LabelOutOfRange("label outside [0, class_count)");
}

} // namespace

Classifier make_classifier(Architecture arch, std::size_t input_dim, std::size_t class_count,
                           std::size_t hidden_width, std::uint64_t init_seed) {
    if (input_dim == 0 || class_count == 0) throw InvalidParams("make_classifier: zero dimension");
    if (arch == Architecture::mlp && hidden_width == 0)
        throw InvalidParams("make_classifier: mlp needs hidden_width >= 1");

    Classifier model;
    model.architecture = arch;
    model.input_dim = input_dim;
    model.class_count = class_count;
    model.hidden_width = (arch == Architecture::mlp) ? hidden_width : 0;

    std::mt19937_64 rng(init_seed);
    if (arch == Architecture::linear) {
        model.layers.push_back(init_layer(input_dim, class_count, rng));
    } else {
        model.layers.push_back(init_layer(input_dim, hidden_width, rng));
        model.layers.push_back(init_layer(hidden_width, class_count, rng));
    }
    return model;
}

OptimizerState make_optimizer(const Classifier& model, double learning_rate, double momentum) {
    OptimizerState opt;
    opt.learning_rate = learning_rate;
    opt.momentum = momentum;
    for (const Layer& layer : model.layers) {
        Layer v;
        v.weight = Matrix(layer.weight.rows(), layer.weight.cols());
        v.bias.assign(layer.bias.size(), 0.0);
        opt.velocity.push_back(std::move(v));
    }
    return opt;
}

Matrix forward(const Classifier& model, const Matrix& x) {
    if (!x.all_finite()) throw NonFiniteInput("forward: NaN/Inf input");
    if (model.architecture == Architecture::linear) return affine(x, model.layers[0]);

    Matrix hidden = affine(x, model.layers[0]);
    for (double& v : hidden.values()) v = std::max(v, 0.0);
    return affine(hidden, model.layers[1]);
}

LossAndGrad cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    const std::size_t rows = logits.rows();
    const std::size_t c = logits.cols();
    if (rows == 0) throw EmptyDataset("cross_entropy: no rows");
    check_labels(labels, rows, c);

    std::vector<double> lse, rowmax;
    row_logsumexp(logits, lse, rowmax);

    LossAndGrad out;
    out.grad_logits = Matrix(rows, c);
    double total = 0.0;
    const double inv_rows = 1.0 / static_cast<double>(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = logits.row(i);
        double* grow = out.grad_logits.row(i);
        for (std::size_t j = 0; j < c; ++j)
            grow[j] = std::exp(row[j] - lse[i]) * inv_rows; // softmax / rows
        grow[labels[i]] -= inv_rows;
        total += lse[i] - row[labels[i]];
    }
    out.loss = total * inv_rows;
    return out;
}

std::vector<double> per_sample_loss(const Matrix& logits, const std::vector<int>& labels) {
    const std::size_t rows = logits.rows();
    check_labels(labels, rows, logits.cols());

    std::vector<double> lse, rowmax;
    row_logsumexp(logits, lse, rowmax);

    std::vector<double> losses(rows);
    for (std::size_t i = 0; i < rows; ++i) losses[i] = lse[i] - logits(i, labels[i]);
    return losses;
}

Gradients backward(const Classifier& model, const Matrix& x, const Matrix& grad_logits) {
    if (x.rows() != grad_logits.rows())
        throw DimensionMismatch("backward: x and grad_logits row counts differ");
    if (grad_logits.cols() != model.class_count)
        throw DimensionMismatch("backward: grad_logits width is not the class count");

    Gradients grads;
    grads.layers.resize(model.layers.size());

    if (model.architecture == Architecture::linear) {
        grads.layers[0].weight = matmul_at_b(x, grad_logits);
        grads.layers[0].bias = column_sums(grad_logits);
        return grads;
    }

    // Recompute the hidden activations; batches are small enough that this
    // beats carrying a cache through the public interface.
    Matrix pre = affine(x, model.layers[0]);
    Matrix hidden = pre;
    for (double& v : hidden.values()) v = std::max(v, 0.0);

    grads.layers[1].weight = matmul_at_b(hidden, grad_logits);
    grads.layers[1].bias = column_sums(grad_logits);

    Matrix grad_hidden = matmul_a_bt(grad_logits, model.layers[1].weight);
    for (std::size_t i = 0; i < grad_hidden.rows(); ++i) {
        double* grow = grad_hidden.row(i);
        const double* prow = pre.row(i);
        for (std::size_t j = 0; j < grad_hidden.cols(); ++j)
            if (prow[j] <= 0.0) grow[j] = 0.0;
    }
    grads.layers[0].weight = matmul_at_b(x, grad_hidden);
    grads.layers[0].bias = column_sums(grad_hidden);
    return grads;
}

void sgd_momentum_step(Classifier& model, OptimizerState& opt, const Gradients& grads) {
    if (grads.layers.size() != model.layers.size() || opt.velocity.size() != model.layers.size())
        throw DimensionMismatch("sgd_momentum_step: layer counts differ");

    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        Layer& layer = model.layers[l];
        Layer& vel = opt.velocity[l];
        const Layer& g = grads.layers[l];
        if (!layer.weight.same_shape(g.weight) || layer.bias.size() != g.bias.size())
            throw DimensionMismatch("sgd_momentum_step: gradient shape mismatch");

        double* w = layer.weight.data();
        double* v = vel.weight.data();
        const double* gw = g.weight.data();
        for (std::size_t i = 0; i < layer.weight.size(); ++i) {
            v[i] = opt.momentum * v[i] + gw[i];
            w[i] -= opt.learning_rate * v[i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            vel.bias[i] = opt.momentum * vel.bias[i] + g.bias[i];
            layer.bias[i] -= opt.learning_rate * vel.bias[i];
        }
    }
}

Evaluation evaluate(const Classifier& model, const Matrix& x, const std::vector<int>& labels) {
    if (x.rows() == 0) throw EmptyDataset("evaluate: empty evaluation set");
    const Matrix logits = forward(model, x);
    check_labels(labels, logits.rows(), logits.cols());

    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* row = logits.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (row[j] > row[best]) best = j; // strict: ties keep the lower class
        if (best == static_cast<std::size_t>(labels[i])) ++correct;
    }

    std::vector<double> lse, rowmax;
    row_logsumexp(logits, lse, rowmax);
    double total = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) total += lse[i] - logits(i, labels[i]);

    Evaluation ev;
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(logits.rows());
    ev.loss = total / static_cast<double>(logits.rows());
    return ev;
}

std::string weights_to_json(const Classifier& model) {
    nlohmann::json doc;
    const auto layer_names = (model.architecture == Architecture::linear)
                                 ? std::vector<std::string>{"fc"}
                                 : std::vector<std::string>{"hidden", "fc"};
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const Layer& layer = model.layers[l];
        const std::size_t fan_in = layer.weight.rows();
        const std::size_t units = layer.weight.cols();

        std::vector<double> unit_major(units * fan_in);
        for (std::size_t u = 0; u < units; ++u)
            for (std::size_t i = 0; i < fan_in; ++i) unit_major[u * fan_in + i] = layer.weight(i, u);

        doc[layer_names[l] + ".weight"] = {{"shape", {units, fan_in}}, {"values", unit_major}};
        doc[layer_names[l] + ".bias"] = {{"shape", {units}}, {"values", layer.bias}};
    }
    return doc.dump(2);
}

} // namespace saln
