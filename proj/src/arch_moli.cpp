#include "omix/architectures.hpp"
#include "omix/error.hpp"
#include "omix/losses.hpp"

namespace omix::arch {

namespace {

Matrix concat(const std::vector<Matrix>& ms) {
    std::vector<const Matrix*> parts;
    parts.reserve(ms.size());
    for (const auto& m : ms) parts.push_back(&m);
    return hcat(parts);
}

// scatter a gradient on the concatenation back onto per-omics slices
void split_columns(const Matrix& d, const std::vector<std::size_t>& widths,
                   std::vector<Matrix>& out) {
    out.clear();
    std::size_t off = 0;
    for (std::size_t w : widths) {
        Matrix m(d.rows, w);
        for (std::size_t r = 0; r < d.rows; ++r)
            std::copy(d.row_ptr(r) + off, d.row_ptr(r) + off + w, m.row_ptr(r));
        out.push_back(std::move(m));
        off += w;
    }
}

}  // namespace

MoliModel::MoliModel(const ModelSpec& s, const std::vector<std::size_t>& dims,
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

std::vector<double> MoliModel::predict_blocks(const std::vector<Matrix>& blocks) const {
    std::vector<Matrix> latents;
    latents.reserve(encoders.size());
    for (std::size_t k = 0; k < encoders.size(); ++k)
        latents.push_back(encoders[k].forward(blocks[k], false, nullptr, nullptr));
    const Matrix p = classifier.forward(concat(latents), false, nullptr, nullptr);
    return {p.data.begin(), p.data.end()};
}

std::vector<nn::ParamBlock> MoliModel::phase_params(int) {
    std::vector<nn::ParamBlock> out;
    for (std::size_t k = 0; k < encoders.size(); ++k)
        encoders[k].collect_params("encoder" + std::to_string(k), out);
    classifier.collect_params("classifier", out);
    return out;
}

double MoliModel::phase_loss(int, const std::vector<Matrix>& blocks,
                             std::span<const int> labels, Rng* rng, bool train_mode,
                             bool with_grads) {
    const std::size_t m = encoders.size();
    std::vector<std::vector<nn::LayerCache>> enc_caches(m);
    std::vector<Matrix> latents(m);
    for (std::size_t k = 0; k < m; ++k)
        latents[k] = encoders[k].forward(blocks[k], train_mode, rng,
                                         with_grads ? &enc_caches[k] : nullptr);
    const Matrix h = concat(latents);

    std::vector<nn::LayerCache> cls_caches;
    const Matrix p = classifier.forward(h, train_mode, rng,
                                        with_grads ? &cls_caches : nullptr);

    std::vector<double> dpred(with_grads ? p.data.size() : 0);
    const double cls = losses::bce_loss(p.data, labels, dpred);

    // triplets over the concatenated latents; a single-class batch skips the term
    double trip = 0.0;
    Matrix dh_trip;
    losses::TripletBatch triplets;
    if (spec.hp.gamma != 0.0) {
        triplets = losses::mine_all_triplets(labels);
        if (!triplets.empty())
            trip = losses::triplet_loss(h, triplets, spec.hp.margin,
                                        with_grads ? &dh_trip : nullptr);
    }
    const double total = losses::combined_loss(cls, trip, spec.hp.gamma);
    if (!with_grads) return total;

    Matrix dp(p.rows, 1);
    dp.data = dpred;
    Matrix dh = classifier.backward(dp, cls_caches);
    if (!triplets.empty())
        for (std::size_t i = 0; i < dh.data.size(); ++i)
            dh.data[i] += spec.hp.gamma * dh_trip.data[i];

    std::vector<std::size_t> widths(m, static_cast<std::size_t>(spec.hp.layer_dim));
    std::vector<Matrix> dlat;
    split_columns(dh, widths, dlat);
    for (std::size_t k = 0; k < m; ++k) encoders[k].backward(dlat[k], enc_caches[k]);
    return total;
}

}  // namespace omix::arch
