#include "omix/nn.hpp"

#include <algorithm>
#include <cmath>

#include "omix/error.hpp"
#include "omix/kernels.hpp"

namespace omix::nn {

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation a, double drop)
    : w(out, in), b(out, 0.0), act(a), dropout(drop), gw(out, in), gb(out, 0.0) {}

void DenseLayer::init_weights(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    std::fill(b.begin(), b.end(), 0.0);
}

void DenseLayer::zero_grads() {
    gw.fill(0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
}

void DenseLayer::collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
    out.push_back({prefix + ".w", w.data.data(), gw.data.data(), w.data.size()});
    out.push_back({prefix + ".b", b.data(), gb.data(), b.size()});
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void softmax(std::span<const double> in, std::span<double> out) {
    require(!in.empty(), "softmax: empty vector");
    double mx = in[0];
    for (double v : in) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < in.size(); ++i) out[i] /= sum;
}

void softmax_rows(const Matrix& in, Matrix& out) {
    out.resize(in.rows, in.cols);
    for (std::size_t r = 0; r < in.rows; ++r) softmax(in.row(r), out.row(r));
}

void dense_forward(const DenseLayer& layer, const Matrix& input, bool train_mode,
                   Rng* rng, Matrix& out, LayerCache* cache) {
    require(input.cols == layer.in_dim(),
            "dense_forward: input " + input.shape_str() + " does not match weights " +
                layer.w.shape_str());

    Matrix z;
    kernels::matmul_nt(input, layer.w, z);
    for (std::size_t r = 0; r < z.rows; ++r) {
        double* zr = z.row_ptr(r);
        for (std::size_t c = 0; c < z.cols; ++c) zr[c] += layer.b[c];
    }

    out.resize(z.rows, z.cols);
    switch (layer.act) {
        case Activation::identity:
            out.data = z.data;
            break;
        case Activation::relu:
            for (std::size_t i = 0; i < z.data.size(); ++i)
                out.data[i] = z.data[i] > 0.0 ? z.data[i] : 0.0;
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < z.data.size(); ++i)
                out.data[i] = sigmoid(z.data[i]);
            break;
        case Activation::softmax:
            softmax_rows(z, out);
            break;
    }

    Matrix mask;
    const bool drop = train_mode && layer.dropout > 0.0;
    if (drop) {
        require(rng != nullptr, "dense_forward: dropout requires an rng in train mode");
        const double keep_scale = 1.0 / (1.0 - layer.dropout);
        mask.resize(out.rows, out.cols);
        for (std::size_t i = 0; i < mask.data.size(); ++i)
            mask.data[i] = rng->bernoulli(layer.dropout) ? 0.0 : keep_scale;
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.data[i];
    }

    if (cache) {
        cache->input = input;
        cache->z = std::move(z);
        cache->out = out;
        cache->drop_mask = std::move(mask);
    }
}

void dense_backward(DenseLayer& layer, const LayerCache& cache, const Matrix& dout,
                    Matrix& dinput) {
    require(dout.rows == cache.z.rows && dout.cols == cache.z.cols,
            "dense_backward: gradient " + dout.shape_str() + " does not match cache " +
                cache.z.shape_str());

    // undo dropout, then the activation, to get dL/dz
    Matrix da = dout;
    if (cache.drop_mask.data.size() == da.data.size() && !cache.drop_mask.data.empty())
        for (std::size_t i = 0; i < da.data.size(); ++i)
            da.data[i] *= cache.drop_mask.data[i];

    Matrix dz(da.rows, da.cols);
    switch (layer.act) {
        case Activation::identity:
            dz.data = da.data;
            break;
        case Activation::relu:
            for (std::size_t i = 0; i < da.data.size(); ++i)
                dz.data[i] = cache.z.data[i] > 0.0 ? da.data[i] : 0.0;
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < da.data.size(); ++i) {
                const double s = sigmoid(cache.z.data[i]);
                dz.data[i] = da.data[i] * s * (1.0 - s);
            }
            break;
        case Activation::softmax: {
            // per row: dz_i = p_i * (da_i - sum_j da_j p_j); recompute p from z
            Matrix p;
            softmax_rows(cache.z, p);
            // dropout after softmax would double-scale through p; the cached
            // post-activation out already includes the mask so recompute from z
            for (std::size_t r = 0; r < da.rows; ++r) {
                const double* pr = p.row_ptr(r);
                const double* dar = da.row_ptr(r);
                double dot = 0.0;
                for (std::size_t c = 0; c < da.cols; ++c) dot += dar[c] * pr[c];
                double* dzr = dz.row_ptr(r);
                for (std::size_t c = 0; c < da.cols; ++c)
                    dzr[c] = pr[c] * (dar[c] - dot);
            }
            break;
        }
    }

    // gw += dz^T * input ; gb += column sums of dz ; dinput = dz * w
    Matrix gw_local;
    kernels::matmul_tn(dz, cache.input, gw_local);
    for (std::size_t i = 0; i < layer.gw.data.size(); ++i)
        layer.gw.data[i] += gw_local.data[i];
    for (std::size_t r = 0; r < dz.rows; ++r) {
        const double* dzr = dz.row_ptr(r);
        for (std::size_t c = 0; c < dz.cols; ++c) layer.gb[c] += dzr[c];
    }
    kernels::matmul_nn(dz, layer.w, dinput);
}

Matrix DenseStack::forward(const Matrix& x, bool train_mode, Rng* rng,
                           std::vector<LayerCache>* caches) const {
    if (caches) caches->resize(layers.size());
    Matrix cur = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Matrix next;
        dense_forward(layers[i], cur, train_mode, rng, next,
                      caches ? &(*caches)[i] : nullptr);
        cur = std::move(next);
    }
    return cur;
}

Matrix DenseStack::backward(const Matrix& dout, const std::vector<LayerCache>& caches) {
    require(caches.size() == layers.size(),
            "DenseStack::backward: cache count " + std::to_string(caches.size()) +
                " does not match layer count " + std::to_string(layers.size()));
    Matrix d = dout;
    for (std::size_t i = layers.size(); i-- > 0;) {
        Matrix dprev;
        dense_backward(layers[i], caches[i], d, dprev);
        d = std::move(dprev);
    }
    return d;
}

void DenseStack::init_weights(Rng& rng) {
    for (auto& l : layers) l.init_weights(rng);
}

void DenseStack::zero_grads() {
    for (auto& l : layers) l.zero_grads();
}

void DenseStack::collect_params(const std::string& prefix, std::vector<ParamBlock>& out) {
    for (std::size_t i = 0; i < layers.size(); ++i)
        layers[i].collect_params(prefix + ".layer" + std::to_string(i), out);
}

void Adagrad::init(const std::vector<ParamBlock>& params) {
    accumulators.clear();
    accumulators.reserve(params.size());
    for (const auto& p : params) accumulators.emplace_back(p.size, 0.0);
}

void Adagrad::step(const std::vector<ParamBlock>& params) {
    require(params.size() == accumulators.size(),
            "Adagrad::step: param block count changed since init");
    for (std::size_t b = 0; b < params.size(); ++b) {
        const ParamBlock& p = params[b];
        std::vector<double>& acc = accumulators[b];
        require(p.size == acc.size(), "Adagrad::step: block '" + p.name + "' resized");
        for (std::size_t i = 0; i < p.size; ++i) {
            double g = p.grads[i];
            if (!std::isfinite(g))
                fail("Adagrad::step: non-finite gradient in '" + p.name + "' at index " +
                     std::to_string(i));
            g += weight_decay * p.values[i];
            acc[i] += g * g;
            p.values[i] -= learning_rate * g / (std::sqrt(acc[i]) + epsilon);
        }
    }
}

}  // namespace omix::nn
