#include <cmath>

#include "omix/architectures.hpp"
#include "omix/error.hpp"
#include "omix/losses.hpp"

namespace omix::arch {

OmiEmbedModel::OmiEmbedModel(const ModelSpec& s, const std::vector<std::size_t>& dims,
                             Rng& rng) {
    spec = s;
    const auto latent = static_cast<std::size_t>(spec.hp.layer_dim);
    for (std::size_t d : dims) {
        nn::DenseStack e;
        e.layers.emplace_back(d, latent, nn::Activation::relu, spec.hp.dropout_rate);
        encoders.push_back(std::move(e));
    }
    mu_layer.layers.emplace_back(latent * dims.size(), latent, nn::Activation::identity);
    logvar_layer.layers.emplace_back(latent * dims.size(), latent,
                                     nn::Activation::identity);
    for (std::size_t d : dims) {
        nn::DenseStack dec;
        dec.layers.emplace_back(latent, latent, nn::Activation::relu);
        dec.layers.emplace_back(latent, d, nn::Activation::sigmoid);
        decoders.push_back(std::move(dec));
    }
    head.layers.emplace_back(latent, 2, nn::Activation::identity);

    for (auto& e : encoders) e.init_weights(rng);
    mu_layer.init_weights(rng);
    logvar_layer.init_weights(rng);
    for (auto& d : decoders) d.init_weights(rng);
    head.init_weights(rng);
}

namespace {

Matrix concat(const std::vector<Matrix>& ms) {
    std::vector<const Matrix*> parts;
    parts.reserve(ms.size());
    for (const auto& m : ms) parts.push_back(&m);
    return hcat(parts);
}

}  // namespace

std::vector<double> OmiEmbedModel::predict_blocks(
    const std::vector<Matrix>& blocks) const {
    std::vector<Matrix> latents;
    latents.reserve(encoders.size());
    for (std::size_t k = 0; k < encoders.size(); ++k)
        latents.push_back(encoders[k].forward(blocks[k], false, nullptr, nullptr));
    // inference uses z = mu (zero latent noise)
    const Matrix mu = mu_layer.forward(concat(latents), false, nullptr, nullptr);
    const Matrix logits = head.forward(mu, false, nullptr, nullptr);
    Matrix p;
    nn::softmax_rows(logits, p);
    std::vector<double> out(p.rows);
    for (std::size_t r = 0; r < p.rows; ++r) out[r] = p.at(r, 1);
    return out;
}

std::vector<nn::ParamBlock> OmiEmbedModel::phase_params(int phase) {
    std::vector<nn::ParamBlock> out;
    const bool vae = phase == 0 || phase == 2;
    const bool cls = phase == 1 || phase == 2;
    if (vae) {
        for (std::size_t k = 0; k < encoders.size(); ++k)
            encoders[k].collect_params("encoder" + std::to_string(k), out);
        mu_layer.collect_params("mu", out);
        logvar_layer.collect_params("logvar", out);
        for (std::size_t k = 0; k < decoders.size(); ++k)
            decoders[k].collect_params("decoder" + std::to_string(k), out);
    }
    if (cls) head.collect_params("head", out);
    return out;
}

double OmiEmbedModel::phase_loss(int phase, const std::vector<Matrix>& blocks,
                                 std::span<const int> labels, Rng* rng,
                                 bool train_mode, bool with_grads) {
    const std::size_t m = encoders.size();
    const std::size_t n = blocks[0].rows;
    const auto latent = static_cast<std::size_t>(spec.hp.layer_dim);
    const bool vae_grads = with_grads && (phase == 0 || phase == 2);
    const bool cls_active = phase == 1 || phase == 2;
    const bool embed_active = phase == 0 || phase == 2;
    const double embed_weight = phase == 0 ? 1.0 : spec.hp.gamma;

    // encode
    std::vector<std::vector<nn::LayerCache>> enc_caches(m);
    std::vector<Matrix> latents(m);
    for (std::size_t k = 0; k < m; ++k)
        latents[k] = encoders[k].forward(blocks[k], train_mode, rng,
                                         vae_grads ? &enc_caches[k] : nullptr);
    const Matrix hcat_all = concat(latents);

    std::vector<nn::LayerCache> mu_caches, lv_caches;
    const Matrix mu = mu_layer.forward(hcat_all, train_mode, rng,
                                       vae_grads ? &mu_caches : nullptr);
    const Matrix logvar = logvar_layer.forward(hcat_all, train_mode, rng,
                                               vae_grads ? &lv_caches : nullptr);

    // reparameterize: z = mu + exp(logvar/2) * eps
    Matrix eps(n, latent);
    if (train_mode) {
        require(rng != nullptr, "omi_embed: training forward needs an rng");
        for (double& v : eps.data) v = rng->normal();
    }
    Matrix z(n, latent);
    for (std::size_t i = 0; i < z.data.size(); ++i)
        z.data[i] = mu.data[i] + std::exp(0.5 * logvar.data[i]) * eps.data[i];

    double embed = 0.0;
    double ce = 0.0;
    Matrix dz(n, latent);
    Matrix dmu(n, latent), dlogvar(n, latent);

    if (embed_active) {
        // decode and score the reconstruction term
        std::vector<std::vector<nn::LayerCache>> dec_caches(m);
        std::vector<Matrix> recons(m);
        for (std::size_t k = 0; k < m; ++k)
            recons[k] = decoders[k].forward(z, train_mode, rng,
                                            vae_grads ? &dec_caches[k] : nullptr);

        std::vector<const Matrix*> inputs;
        std::vector<Matrix*> recon_ptrs;
        for (std::size_t k = 0; k < m; ++k) {
            inputs.push_back(&blocks[k]);
            recon_ptrs.push_back(&recons[k]);
        }
        std::vector<Matrix> recon_grads(m);
        std::vector<Matrix*> recon_grad_ptrs;
        for (std::size_t k = 0; k < m; ++k) {
            recon_grads[k].resize(n, blocks[k].cols);
            recon_grad_ptrs.push_back(&recon_grads[k]);
        }
        embed = losses::vae_embed_loss(inputs, recon_ptrs, mu, logvar,
                                       vae_grads ? &recon_grad_ptrs : nullptr,
                                       vae_grads ? &dmu : nullptr,
                                       vae_grads ? &dlogvar : nullptr, embed_weight);
        if (vae_grads)
            for (std::size_t k = 0; k < m; ++k) {
                const Matrix dzk = decoders[k].backward(recon_grads[k], dec_caches[k]);
                for (std::size_t i = 0; i < dz.data.size(); ++i)
                    dz.data[i] += dzk.data[i];
            }
    }

    if (cls_active) {
        std::vector<nn::LayerCache> head_caches;
        const Matrix logits = head.forward(z, train_mode, rng,
                                           with_grads ? &head_caches : nullptr);
        Matrix dlogits;
        ce = losses::softmax_ce_loss(logits, labels, with_grads ? &dlogits : nullptr);
        if (with_grads) {
            const Matrix dz_head = head.backward(dlogits, head_caches);
            if (vae_grads)
                for (std::size_t i = 0; i < dz.data.size(); ++i)
                    dz.data[i] += dz_head.data[i];
        }
    }

    const double total = phase == 0   ? embed
                         : phase == 1 ? ce
                                      : losses::vae_total_loss(embed, ce, spec.hp.gamma);
    if (!vae_grads) return total;

    // z = mu + sigma * eps: route dz into mu and logvar, then join the KL grads
    for (std::size_t i = 0; i < dz.data.size(); ++i) {
        dmu.data[i] += dz.data[i];
        dlogvar.data[i] +=
            dz.data[i] * eps.data[i] * 0.5 * std::exp(0.5 * logvar.data[i]);
    }
    Matrix dh_mu = mu_layer.backward(dmu, mu_caches);
    const Matrix dh_lv = logvar_layer.backward(dlogvar, lv_caches);
    for (std::size_t i = 0; i < dh_mu.data.size(); ++i) dh_mu.data[i] += dh_lv.data[i];

    for (std::size_t k = 0; k < m; ++k) {
        Matrix dlat(n, latent);
        for (std::size_t r = 0; r < n; ++r)
            std::copy(dh_mu.row_ptr(r) + k * latent, dh_mu.row_ptr(r) + (k + 1) * latent,
                      dlat.row_ptr(r));
        encoders[k].backward(dlat, enc_caches[k]);
    }
    return total;
}

}  // namespace omix::arch
