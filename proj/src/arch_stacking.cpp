#include <algorithm>

#include "omix/architectures.hpp"
#include "omix/error.hpp"
#include "omix/losses.hpp"

namespace omix::arch {

std::vector<std::vector<int>> StackingModel::subsets_for(StackingVariant variant,
                                                         int num_omics) {
    std::vector<std::vector<int>> subsets;
    // one head per omics, in dataset order
    for (int i = 0; i < num_omics; ++i) subsets.push_back({i});
    if (variant == StackingVariant::complete) {
        // every non-empty subset, ordered by size then lexicographically
        for (int size = 2; size <= num_omics; ++size) {
            std::vector<int> pick(static_cast<std::size_t>(size));
            // iterative combination enumeration
            for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
            while (true) {
                subsets.push_back(pick);
                int i = size - 1;
                while (i >= 0 &&
                       pick[static_cast<std::size_t>(i)] == num_omics - size + i)
                    --i;
                if (i < 0) break;
                ++pick[static_cast<std::size_t>(i)];
                for (int j = i + 1; j < size; ++j)
                    pick[static_cast<std::size_t>(j)] =
                        pick[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
    } else if (variant != StackingVariant::no_integration) {
        // standard / no_triplet: the single full-concatenation head
        std::vector<int> all(static_cast<std::size_t>(num_omics));
        for (int i = 0; i < num_omics; ++i) all[static_cast<std::size_t>(i)] = i;
        subsets.push_back(std::move(all));
    }
    return subsets;
}

StackingModel::StackingModel(const ModelSpec& s, const std::vector<std::size_t>& dims,
                             Rng& rng) {
    spec = s;
    if (spec.variant == StackingVariant::no_triplet) spec.hp.gamma = 0.0;
    const auto latent = static_cast<std::size_t>(spec.hp.layer_dim);
    for (std::size_t d : dims) {
        nn::DenseStack e;
        e.layers.emplace_back(d, latent, nn::Activation::relu, spec.hp.dropout_rate);
        encoders.push_back(std::move(e));
    }
    head_subsets = subsets_for(spec.variant, static_cast<int>(dims.size()));
    for (const auto& subset : head_subsets) {
        nn::DenseStack h;
        h.layers.emplace_back(latent * subset.size(), 1, nn::Activation::sigmoid);
        heads.push_back(std::move(h));
    }
    meta.layers.emplace_back(heads.size(), 1, nn::Activation::sigmoid);
    for (auto& e : encoders) e.init_weights(rng);
    for (auto& h : heads) h.init_weights(rng);
    meta.init_weights(rng);
}

namespace {

Matrix gather_subset(const std::vector<Matrix>& latents, const std::vector<int>& subset) {
    std::vector<const Matrix*> parts;
    parts.reserve(subset.size());
    for (int k : subset) parts.push_back(&latents[static_cast<std::size_t>(k)]);
    return hcat(parts);
}

}  // namespace

std::vector<double> StackingModel::predict_blocks(
    const std::vector<Matrix>& blocks) const {
    std::vector<Matrix> latents;
    latents.reserve(encoders.size());
    for (std::size_t k = 0; k < encoders.size(); ++k)
        latents.push_back(encoders[k].forward(blocks[k], false, nullptr, nullptr));
    Matrix q(blocks[0].rows, heads.size());
    for (std::size_t j = 0; j < heads.size(); ++j) {
        const Matrix out =
            heads[j].forward(gather_subset(latents, head_subsets[j]), false, nullptr,
                             nullptr);
        for (std::size_t r = 0; r < q.rows; ++r) q.at(r, j) = out.at(r, 0);
    }
    const Matrix p = meta.forward(q, false, nullptr, nullptr);
    return {p.data.begin(), p.data.end()};
}

std::vector<nn::ParamBlock> StackingModel::phase_params(int) {
    std::vector<nn::ParamBlock> out;
    for (std::size_t k = 0; k < encoders.size(); ++k)
        encoders[k].collect_params("encoder" + std::to_string(k), out);
    for (std::size_t j = 0; j < heads.size(); ++j)
        heads[j].collect_params("head" + std::to_string(j), out);
    meta.collect_params("meta", out);
    return out;
}

double StackingModel::phase_loss(int, const std::vector<Matrix>& blocks,
                                 std::span<const int> labels, Rng* rng,
                                 bool train_mode, bool with_grads) {
    const std::size_t m = encoders.size();
    const std::size_t n = blocks[0].rows;
    std::vector<std::vector<nn::LayerCache>> enc_caches(m);
    std::vector<Matrix> latents(m);
    for (std::size_t k = 0; k < m; ++k)
        latents[k] = encoders[k].forward(blocks[k], train_mode, rng,
                                         with_grads ? &enc_caches[k] : nullptr);

    std::vector<std::vector<nn::LayerCache>> head_caches(heads.size());
    Matrix q(n, heads.size());
    for (std::size_t j = 0; j < heads.size(); ++j) {
        const Matrix out =
            heads[j].forward(gather_subset(latents, head_subsets[j]), train_mode, rng,
                             with_grads ? &head_caches[j] : nullptr);
        for (std::size_t r = 0; r < n; ++r) q.at(r, j) = out.at(r, 0);
    }

    std::vector<nn::LayerCache> meta_caches;
    const Matrix p = meta.forward(q, train_mode, rng,
                                  with_grads ? &meta_caches : nullptr);
    std::vector<double> dpred(with_grads ? p.data.size() : 0);
    const double cls = losses::bce_loss(p.data, labels, dpred);

    // triplet regularization always acts on the full concatenation
    std::vector<const Matrix*> all_parts;
    for (const auto& l : latents) all_parts.push_back(&l);
    const Matrix h_all = hcat(all_parts);
    double trip = 0.0;
    Matrix dh_trip;
    losses::TripletBatch triplets;
    if (spec.hp.gamma != 0.0) {
        triplets = losses::mine_all_triplets(labels);
        if (!triplets.empty())
            trip = losses::triplet_loss(h_all, triplets, spec.hp.margin,
                                        with_grads ? &dh_trip : nullptr);
    }
    const double total = losses::combined_loss(cls, trip, spec.hp.gamma);
    if (!with_grads) return total;

    Matrix dp(p.rows, 1);
    dp.data = dpred;
    const Matrix dq = meta.backward(dp, meta_caches);

    const auto latent = static_cast<std::size_t>(spec.hp.layer_dim);
    std::vector<Matrix> dlat(m);
    for (std::size_t k = 0; k < m; ++k) dlat[k].resize(n, latent);
    if (!triplets.empty())
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < latent; ++c)
                    dlat[k].at(r, c) +=
                        spec.hp.gamma * dh_trip.at(r, k * latent + c);

    for (std::size_t j = 0; j < heads.size(); ++j) {
        Matrix dout(n, 1);
        for (std::size_t r = 0; r < n; ++r) dout.at(r, 0) = dq.at(r, j);
        const Matrix dsub = heads[j].backward(dout, head_caches[j]);
        std::size_t off = 0;
        for (int k : head_subsets[j]) {
            auto& dk = dlat[static_cast<std::size_t>(k)];
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < latent; ++c)
                    dk.at(r, c) += dsub.at(r, off + c);
            off += latent;
        }
    }
    for (std::size_t k = 0; k < m; ++k) encoders[k].backward(dlat[k], enc_caches[k]);
    return total;
}

}  // namespace omix::arch
