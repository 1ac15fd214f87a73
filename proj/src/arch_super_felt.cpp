#include "omix/architectures.hpp"
#include "omix/error.hpp"
#include "omix/losses.hpp"

namespace omix::arch {

SuperFeltModel::SuperFeltModel(const ModelSpec& s, const std::vector<std::size_t>& dims,
                               Rng& rng) {
    spec = s;
    const auto latent = static_cast<std::size_t>(spec.hp.layer_dim);
    for (std::size_t d : dims) {
        nn::DenseStack e;
        e.layers.emplace_back(d, latent, nn::Activation::relu, spec.hp.dropout_rate);
        encoders.push_back(std::move(e));
    }
    classifier.layers.emplace_back(latent * dims.size(), 1, nn::Activation::sigmoid);
    for (auto& e : encoders) e.init_weights(rng);
    classifier.init_weights(rng);
}

std::vector<double> SuperFeltModel::predict_blocks(
    const std::vector<Matrix>& blocks) const {
    std::vector<const Matrix*> parts;
    std::vector<Matrix> latents;
    latents.reserve(encoders.size());
    for (std::size_t k = 0; k < encoders.size(); ++k)
        latents.push_back(encoders[k].forward(blocks[k], false, nullptr, nullptr));
    for (const auto& l : latents) parts.push_back(&l);
    const Matrix p = classifier.forward(hcat(parts), false, nullptr, nullptr);
    return {p.data.begin(), p.data.end()};
}

std::vector<nn::ParamBlock> SuperFeltModel::phase_params(int phase) {
    std::vector<nn::ParamBlock> out;
    if (phase < static_cast<int>(encoders.size()))
        encoders[static_cast<std::size_t>(phase)].collect_params(
            "encoder" + std::to_string(phase), out);
    else
        classifier.collect_params("classifier", out);
    return out;
}

double SuperFeltModel::phase_loss(int phase, const std::vector<Matrix>& blocks,
                                  std::span<const int> labels, Rng* rng,
                                  bool train_mode, bool with_grads) {
    const auto m = encoders.size();
    if (phase < static_cast<int>(m)) {
        // supervised encoding: triplet loss on this omics' own latent space
        const auto k = static_cast<std::size_t>(phase);
        std::vector<nn::LayerCache> caches;
        const Matrix h = encoders[k].forward(blocks[k], train_mode, rng,
                                             with_grads ? &caches : nullptr);
        const auto triplets = losses::mine_all_triplets(labels);
        if (triplets.empty()) return 0.0;
        Matrix dh;
        const double loss = losses::triplet_loss(h, triplets, spec.hp.margin,
                                                 with_grads ? &dh : nullptr);
        if (with_grads) encoders[k].backward(dh, caches);
        return loss;
    }

    // classification phase: encoders are frozen and run in eval mode
    std::vector<const Matrix*> parts;
    std::vector<Matrix> latents;
    latents.reserve(m);
    for (std::size_t k = 0; k < m; ++k)
        latents.push_back(encoders[k].forward(blocks[k], false, nullptr, nullptr));
    for (const auto& l : latents) parts.push_back(&l);
    std::vector<nn::LayerCache> caches;
    const Matrix p = classifier.forward(hcat(parts), train_mode, rng,
                                        with_grads ? &caches : nullptr);
    std::vector<double> grad(with_grads ? p.data.size() : 0);
    const double loss = losses::bce_loss(p.data, labels, grad);
    if (with_grads) {
        Matrix dp(p.rows, 1);
        dp.data = grad;
        classifier.backward(dp, caches);
    }
    return loss;
}

}  // namespace omix::arch
