#include <cmath>

#include "omix/architectures.hpp"
#include "omix/error.hpp"
#include "omix/kernels.hpp"
#include "omix/losses.hpp"

namespace omix::arch {

namespace {
// keeps the direction exact while guarding the zero vector
constexpr double kNormEps = 1e-24;
}

MomaModel::MomaModel(const ModelSpec& s, const std::vector<std::size_t>& dims,
                     Rng& rng) {
    spec = s;
    require(dims.size() >= 2, "moma needs at least two omics, attention is pairwise");
    const auto hidden = static_cast<std::size_t>(spec.hp.layer_dim);
    const auto k = static_cast<std::size_t>(spec.hp.module_count);
    for (std::size_t d : dims) {
        nn::DenseStack e;  // two fully connected layers ending in 2-d module vectors
        e.layers.emplace_back(d, hidden, nn::Activation::relu, spec.hp.dropout_rate);
        e.layers.emplace_back(hidden, 2 * k, nn::Activation::identity);
        module_encoders.push_back(std::move(e));
    }
    const std::size_t attended = 2 * k * (dims.size() - 1);
    for (std::size_t u = 0; u < dims.size(); ++u) {
        nn::DenseStack h;
        h.layers.emplace_back(attended, hidden, nn::Activation::relu,
                              spec.hp.dropout_rate);
        h.layers.emplace_back(hidden, 2, nn::Activation::identity);
        heads.push_back(std::move(h));
    }
    meta_weights.assign(dims.size(), 0.0);
    for (auto& e : module_encoders) e.init_weights(rng);
    for (auto& h : heads) h.init_weights(rng);
}

void MomaModel::normalize_modules(std::span<const double> raw, std::span<double> out) {
    for (std::size_t i = 0; i + 1 < raw.size(); i += 2) {
        const double x = raw[i], y = raw[i + 1];
        const double s = std::sqrt(x * x + y * y + kNormEps);
        out[i] = x / s;
        out[i + 1] = y / s;
    }
}

namespace {

struct AttentionScratch {
    Matrix mu, mv, sim, att, t, dt, datt, dsim, scratch2;
};

// T = row_softmax(Mu * Mv^T) * Mv for one sample's module matrices
void attention_forward(const Matrix& mu, const Matrix& mv, AttentionScratch& ws,
                       Matrix& t_out) {
    kernels::matmul_nt(mu, mv, ws.sim);
    nn::softmax_rows(ws.sim, ws.att);
    kernels::matmul_nn(ws.att, mv, t_out);
}

// given dT, accumulate dMu and dMv (attention recomputed from the modules)
void attention_backward(const Matrix& mu, const Matrix& mv, const Matrix& dt,
                        AttentionScratch& ws, Matrix& dmu, Matrix& dmv) {
    kernels::matmul_nt(mu, mv, ws.sim);
    nn::softmax_rows(ws.sim, ws.att);

    // T = A * Mv
    kernels::matmul_nt(dt, mv, ws.datt);         // dA = dT * Mv^T
    kernels::matmul_tn(ws.att, dt, ws.scratch2); // dMv += A^T * dT
    for (std::size_t i = 0; i < dmv.data.size(); ++i)
        dmv.data[i] += ws.scratch2.data[i];

    // softmax rows: dS_ij = A_ij * (dA_ij - sum_m dA_im A_im)
    ws.dsim.resize(ws.sim.rows, ws.sim.cols);
    for (std::size_t r = 0; r < ws.att.rows; ++r) {
        const double* ar = ws.att.row_ptr(r);
        const double* dar = ws.datt.row_ptr(r);
        double dot = 0.0;
        for (std::size_t c = 0; c < ws.att.cols; ++c) dot += dar[c] * ar[c];
        double* dsr = ws.dsim.row_ptr(r);
        for (std::size_t c = 0; c < ws.att.cols; ++c) dsr[c] = ar[c] * (dar[c] - dot);
    }

    // S = Mu * Mv^T
    kernels::matmul_nn(ws.dsim, mv, ws.scratch2);  // dMu += dS * Mv
    for (std::size_t i = 0; i < dmu.data.size(); ++i)
        dmu.data[i] += ws.scratch2.data[i];
    kernels::matmul_tn(ws.dsim, mu, ws.scratch2);  // dMv += dS^T * Mu
    for (std::size_t i = 0; i < dmv.data.size(); ++i)
        dmv.data[i] += ws.scratch2.data[i];
}

}  // namespace

Matrix MomaModel::omics_probabilities(const std::vector<Matrix>& blocks) const {
    auto* self = const_cast<MomaModel*>(this);
    const std::size_t n = blocks[0].rows;
    Matrix probs(n, module_encoders.size());
    self->forward_heads(blocks, false, nullptr, &probs, nullptr, nullptr);
    return probs;
}

// Shared forward used by training (logits + caches) and inference (probs).
// When probs is non-null the positive-class softmax probability per omics is
// written there.
void MomaModel::forward_heads(const std::vector<Matrix>& blocks, bool train_mode,
                              Rng* rng, Matrix* probs, ForwardState* state,
                              std::vector<Matrix>* logits_out) {
    const std::size_t m = module_encoders.size();
    const std::size_t n = blocks[0].rows;
    const auto k = static_cast<std::size_t>(spec.hp.module_count);

    if (state) {
        state->encoder_caches.resize(m);
        state->head_caches.resize(m);
    }
    std::vector<Matrix> raw(m);
    for (std::size_t b = 0; b < m; ++b)
        raw[b] = module_encoders[b].forward(
            blocks[b], train_mode, rng, state ? &state->encoder_caches[b] : nullptr);

    // per-sample normalized module matrices (K x 2)
    std::vector<std::vector<Matrix>> modules(m, std::vector<Matrix>(n));
    for (std::size_t b = 0; b < m; ++b)
        for (std::size_t s = 0; s < n; ++s) {
            modules[b][s].resize(k, 2);
            normalize_modules(raw[b].row(s), {modules[b][s].data.data(), 2 * k});
        }

    AttentionScratch ws;
    const std::size_t attended = 2 * k * (m - 1);
    std::vector<Matrix> features(m);
    for (std::size_t u = 0; u < m; ++u) features[u].resize(n, attended);
    Matrix t_out;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t u = 0; u < m; ++u) {
            std::size_t off = 0;
            for (std::size_t v = 0; v < m; ++v) {
                if (v == u) continue;
                attention_forward(modules[u][s], modules[v][s], ws, t_out);
                std::copy(t_out.data.begin(), t_out.data.end(),
                          features[u].row_ptr(s) + off);
                off += 2 * k;
            }
        }

    if (state) {
        state->raw = std::move(raw);
        state->modules = std::move(modules);
        state->features = features;
    }
    if (logits_out) logits_out->resize(m);
    for (std::size_t u = 0; u < m; ++u) {
        Matrix logits = heads[u].forward(features[u], train_mode, rng,
                                         state ? &state->head_caches[u] : nullptr);
        if (probs) {
            Matrix p;
            nn::softmax_rows(logits, p);
            for (std::size_t s = 0; s < n; ++s) probs->at(s, u) = p.at(s, 1);
        }
        if (logits_out) (*logits_out)[u] = std::move(logits);
    }
}

std::vector<double> MomaModel::predict_blocks(const std::vector<Matrix>& blocks) const {
    const Matrix probs = omics_probabilities(blocks);
    std::vector<double> out(probs.rows);
    for (std::size_t s = 0; s < probs.rows; ++s) {
        double z = meta_bias;
        for (std::size_t u = 0; u < probs.cols; ++u)
            z += meta_weights[u] * probs.at(s, u);
        out[s] = nn::sigmoid(z);
    }
    return out;
}

std::vector<nn::ParamBlock> MomaModel::phase_params(int) {
    std::vector<nn::ParamBlock> out;
    for (std::size_t b = 0; b < module_encoders.size(); ++b)
        module_encoders[b].collect_params("module_encoder" + std::to_string(b), out);
    for (std::size_t u = 0; u < heads.size(); ++u)
        heads[u].collect_params("head" + std::to_string(u), out);
    return out;
}

double MomaModel::phase_loss(int, const std::vector<Matrix>& blocks,
                             std::span<const int> labels, Rng* rng, bool train_mode,
                             bool with_grads) {
    const std::size_t m = module_encoders.size();
    const std::size_t n = blocks[0].rows;
    const auto k = static_cast<std::size_t>(spec.hp.module_count);

    ForwardState state;
    std::vector<Matrix> logits;
    forward_heads(blocks, train_mode, rng, nullptr, with_grads ? &state : nullptr,
                  &logits);

    double total = 0.0;
    std::vector<Matrix> dlogits(m);
    for (std::size_t u = 0; u < m; ++u)
        total += losses::softmax_ce_loss(logits[u], labels,
                                         with_grads ? &dlogits[u] : nullptr);
    if (!with_grads) return total;

    // head backward to attended-feature gradients
    std::vector<Matrix> dfeatures(m);
    for (std::size_t u = 0; u < m; ++u)
        dfeatures[u] = heads[u].backward(dlogits[u], state.head_caches[u]);

    // attention backward per sample, accumulated on the normalized modules
    std::vector<std::vector<Matrix>> dmodules(m, std::vector<Matrix>(n));
    for (std::size_t b = 0; b < m; ++b)
        for (std::size_t s = 0; s < n; ++s) dmodules[b][s].resize(k, 2);

    AttentionScratch ws;
    Matrix dt(k, 2);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t u = 0; u < m; ++u) {
            std::size_t off = 0;
            for (std::size_t v = 0; v < m; ++v) {
                if (v == u) continue;
                std::copy(dfeatures[u].row_ptr(s) + off,
                          dfeatures[u].row_ptr(s) + off + 2 * k, dt.data.begin());
                attention_backward(state.modules[u][s], state.modules[v][s], dt, ws,
                                   dmodules[u][s], dmodules[v][s]);
                off += 2 * k;
            }
        }

    // through the normalization onto the raw encoder outputs
    for (std::size_t b = 0; b < m; ++b) {
        Matrix draw(n, 2 * k);
        for (std::size_t s = 0; s < n; ++s) {
            const double* rawrow = state.raw[b].row_ptr(s);
            const double* dm = dmodules[b][s].data.data();
            double* dr = draw.row_ptr(s);
            for (std::size_t i = 0; i < k; ++i) {
                const double x = rawrow[2 * i], y = rawrow[2 * i + 1];
                const double s2 = x * x + y * y + kNormEps;
                const double sn = std::sqrt(s2);
                const double dot = x * dm[2 * i] + y * dm[2 * i + 1];
                dr[2 * i] = dm[2 * i] / sn - x * dot / (s2 * sn);
                dr[2 * i + 1] = dm[2 * i + 1] / sn - y * dot / (s2 * sn);
            }
        }
        module_encoders[b].backward(draw, state.encoder_caches[b]);
    }
    return total;
}

void MomaModel::fit_meta(const std::vector<Matrix>& blocks,
                         std::span<const int> labels) {
    const Matrix probs = omics_probabilities(blocks);
    const std::size_t n = probs.rows;
    const std::size_t m = probs.cols;
    std::fill(meta_weights.begin(), meta_weights.end(), 0.0);
    meta_bias = 0.0;

    // deterministic full-batch Adagrad on the convex logistic objective
    std::vector<double> acc(m + 1, 0.0);
    const double lr = 0.5;
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<double> gw(m, 0.0);
        double gb = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            double z = meta_bias;
            for (std::size_t u = 0; u < m; ++u) z += meta_weights[u] * probs.at(s, u);
            const double d = (nn::sigmoid(z) - (labels[s] ? 1.0 : 0.0)) /
                             static_cast<double>(n);
            for (std::size_t u = 0; u < m; ++u) gw[u] += d * probs.at(s, u);
            gb += d;
        }
        for (std::size_t u = 0; u < m; ++u) {
            acc[u] += gw[u] * gw[u];
            meta_weights[u] -= lr * gw[u] / (std::sqrt(acc[u]) + 1e-10);
        }
        acc[m] += gb * gb;
        meta_bias -= lr * gb / (std::sqrt(acc[m]) + 1e-10);
    }
}

}  // namespace omix::arch
