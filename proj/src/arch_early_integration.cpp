#include "omix/architectures.hpp"
#include "omix/error.hpp"
#include "omix/losses.hpp"

namespace omix::arch {

namespace {
Matrix concat_blocks(const std::vector<Matrix>& blocks) {
    std::vector<const Matrix*> parts;
    parts.reserve(blocks.size());
    for (const auto& b : blocks) parts.push_back(&b);
    return hcat(parts);
}
}  // namespace

EarlyIntegrationModel::EarlyIntegrationModel(const ModelSpec& s,
                                             const std::vector<std::size_t>& dims,
                                             Rng& rng) {
    spec = s;
    std::size_t total = 0;
    for (auto d : dims) total += d;
    const auto latent = static_cast<std::size_t>(spec.hp.layer_dim);
    net.layers.emplace_back(total, latent, nn::Activation::relu, spec.hp.dropout_rate);
    net.layers.emplace_back(latent, 1, nn::Activation::sigmoid);
    net.init_weights(rng);
}

std::vector<double> EarlyIntegrationModel::predict_blocks(
    const std::vector<Matrix>& blocks) const {
    const Matrix x = concat_blocks(blocks);
    const Matrix p = net.forward(x, false, nullptr, nullptr);
    return {p.data.begin(), p.data.end()};
}

std::vector<nn::ParamBlock> EarlyIntegrationModel::phase_params(int) {
    std::vector<nn::ParamBlock> out;
    net.collect_params("net", out);
    return out;
}

double EarlyIntegrationModel::phase_loss(int, const std::vector<Matrix>& blocks,
                                         std::span<const int> labels, Rng* rng,
                                         bool train_mode, bool with_grads) {
    const Matrix x = concat_blocks(blocks);
    std::vector<nn::LayerCache> caches;
    const Matrix p = net.forward(x, train_mode, rng, with_grads ? &caches : nullptr);

    std::vector<double> grad(with_grads ? p.data.size() : 0);
    const double loss = losses::bce_loss(p.data, labels, grad);
    if (with_grads) {
        Matrix dp(p.rows, 1);
        dp.data = grad;
        net.backward(dp, caches);
    }
    return loss;
}

}  // namespace omix::arch
