#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "omix/matrix.hpp"
#include "omix/rng.hpp"

namespace omix::nn {

enum class Activation { identity, relu, sigmoid, softmax };

// One trainable tensor plus its gradient slot; the training loop and the
// finite-difference checks both address parameters through these views.
struct ParamBlock {
    std::string name;
    double* values = nullptr;
    double* grads = nullptr;
    std::size_t size = 0;
};

struct DenseLayer {
    Matrix w;  // out x in
    std::vector<double> b;
    Activation act = Activation::identity;
    double dropout = 0.0;

    Matrix gw;
    std::vector<double> gb;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out, Activation a, double drop = 0.0);

    std::size_t in_dim() const { return w.cols; }
    std::size_t out_dim() const { return w.rows; }

    // uniform in +-sqrt(6/(fan_in+fan_out))
    void init_weights(Rng& rng);
    void zero_grads();
    void collect_params(const std::string& prefix, std::vector<ParamBlock>& out);
};

// Per-call state the backward pass needs; input is kept by value so the
// caller may discard its batch views.
struct LayerCache {
    Matrix input;
    Matrix z;         // pre-activation
    Matrix out;       // post-activation, post-dropout
    Matrix drop_mask; // empty when dropout was not applied
};

// forward one layer; train_mode enables dropout (inverted: kept units are
// scaled by 1/(1-p) so eval needs no rescale). rng may be null in eval mode.
void dense_forward(const DenseLayer& layer, const Matrix& input, bool train_mode,
                   Rng* rng, Matrix& out, LayerCache* cache);

// dout = dL/d(layer output); accumulates gw/gb and writes dL/d(input)
void dense_backward(DenseLayer& layer, const LayerCache& cache, const Matrix& dout,
                    Matrix& dinput);

struct DenseStack {
    std::vector<DenseLayer> layers;

    Matrix forward(const Matrix& x, bool train_mode, Rng* rng,
                   std::vector<LayerCache>* caches) const;
    // returns dL/d(stack input), accumulating layer grads
    Matrix backward(const Matrix& dout, const std::vector<LayerCache>& caches);

    void init_weights(Rng& rng);
    void zero_grads();
    void collect_params(const std::string& prefix, std::vector<ParamBlock>& out);
};

// Adagrad with L2 weight decay folded into the gradient before accumulation.
// Accumulator layout is fixed by the order of the param blocks it was
// initialized with.
struct Adagrad {
    double learning_rate = 0.01;
    double weight_decay = 0.0;
    double epsilon = 1e-10;
    std::vector<std::vector<double>> accumulators;

    Adagrad() = default;
    Adagrad(double lr, double wd) : learning_rate(lr), weight_decay(wd) {}

    void init(const std::vector<ParamBlock>& params);
    // acc += g^2; w -= lr * g / (sqrt(acc) + eps); throws on non-finite grads
    void step(const std::vector<ParamBlock>& params);
};

// numerically stable row softmax (max subtraction)
void softmax(std::span<const double> in, std::span<double> out);
void softmax_rows(const Matrix& in, Matrix& out);

double sigmoid(double x);

}  // namespace omix::nn
