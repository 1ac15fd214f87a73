#include <algorithm>
#include <numeric>

#include "omix/architectures.hpp"
#include "omix/error.hpp"

namespace omix::arch {

std::string method_name(MethodKind kind, StackingVariant variant) {
    switch (kind) {
        case MethodKind::early_integration: return "early_integration";
        case MethodKind::moli: return "moli";
        case MethodKind::super_felt: return "super_felt";
        case MethodKind::moma: return "moma";
        case MethodKind::omi_embed: return "omi_embed";
        case MethodKind::omics_stacking:
            switch (variant) {
                case StackingVariant::standard: return "omics_stacking";
                case StackingVariant::complete: return "omics_stacking_complete";
                case StackingVariant::no_integration:
                    return "omics_stacking_no_integration";
                case StackingVariant::no_triplet: return "omics_stacking_no_triplet";
            }
    }
    fail("method_name: unknown method kind");
}

std::vector<std::string> valid_method_names() {
    return {"early_integration",
            "moli",
            "super_felt",
            "omics_stacking",
            "omics_stacking_complete",
            "omics_stacking_no_integration",
            "omics_stacking_no_triplet",
            "moma",
            "omi_embed"};
}

ModelSpec parse_method(const std::string& name) {
    ModelSpec spec;
    if (name == "early_integration") {
        spec.kind = MethodKind::early_integration;
    } else if (name == "moli") {
        spec.kind = MethodKind::moli;
    } else if (name == "super_felt") {
        spec.kind = MethodKind::super_felt;
    } else if (name == "moma") {
        spec.kind = MethodKind::moma;
    } else if (name == "omi_embed") {
        spec.kind = MethodKind::omi_embed;
    } else if (name == "omics_stacking") {
        spec.kind = MethodKind::omics_stacking;
        spec.variant = StackingVariant::standard;
    } else if (name == "omics_stacking_complete") {
        spec.kind = MethodKind::omics_stacking;
        spec.variant = StackingVariant::complete;
    } else if (name == "omics_stacking_no_integration") {
        spec.kind = MethodKind::omics_stacking;
        spec.variant = StackingVariant::no_integration;
    } else if (name == "omics_stacking_no_triplet") {
        spec.kind = MethodKind::omics_stacking;
        spec.variant = StackingVariant::no_triplet;
    } else {
        std::string valid;
        for (const auto& m : valid_method_names()) valid += (valid.empty() ? "" : ", ") + m;
        fail("unknown method '" + name + "'; valid methods: " + valid);
    }
    return spec;
}

std::vector<double> Model::predict(const data::OmicsDataset& ds,
                                   std::span<const int> rows) const {
    if (rows.empty()) return {};
    const auto blocks = data::apply_preprocess(preprocess, ds, rows);
    return predict_blocks(blocks);
}

std::vector<double> Model::predict_all(const data::OmicsDataset& ds) const {
    std::vector<int> rows(ds.num_samples());
    std::iota(rows.begin(), rows.end(), 0);
    return predict(ds, rows);
}

void Model::zero_phase_grads(int phase) {
    for (auto& p : phase_params(phase)) std::fill(p.grads, p.grads + p.size, 0.0);
}

namespace {

std::vector<std::vector<int>> make_batches(std::size_t n, int batch_size, Rng& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    std::vector<std::vector<int>> batches;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
        batches.emplace_back(idx.begin() + static_cast<long>(start),
                             idx.begin() + static_cast<long>(end));
    }
    return batches;
}

}  // namespace

void train_phases(Model& model, const std::vector<Matrix>& blocks,
                  std::span<const int> labels, Rng& rng) {
    const HyperParams& hp = model.spec.hp;
    for (int phase = 0; phase < model.num_phases(); ++phase) {
        auto params = model.phase_params(phase);
        nn::Adagrad opt(hp.learning_rate, hp.weight_decay);
        opt.init(params);
        for (int epoch = 0; epoch < hp.epochs; ++epoch) {
            for (const auto& batch : make_batches(labels.size(), hp.batch_size, rng)) {
                std::vector<Matrix> batch_blocks;
                batch_blocks.reserve(blocks.size());
                for (const auto& b : blocks) batch_blocks.push_back(take_rows(b, batch));
                std::vector<int> batch_labels;
                batch_labels.reserve(batch.size());
                for (int i : batch) batch_labels.push_back(labels[static_cast<std::size_t>(i)]);

                model.zero_phase_grads(phase);
                model.phase_loss(phase, batch_blocks, batch_labels, &rng, true, true);
                opt.step(params);
            }
        }
    }
}

double final_phase_loss(Model& model, const std::vector<Matrix>& blocks,
                        std::span<const int> labels) {
    return model.phase_loss(model.num_phases() - 1, blocks, labels, nullptr, false,
                            false);
}

std::unique_ptr<Model> train_model(const ModelSpec& spec, const data::OmicsDataset& ds,
                                   std::span<const int> train_rows, std::uint64_t seed) {
    int pos = 0, neg = 0;
    for (int r : train_rows) (ds.labels[static_cast<std::size_t>(r)] ? pos : neg)++;
    require(pos >= 2 && neg >= 2, "train_model: training data needs at least two "
                                  "samples per class (got " +
                                      std::to_string(pos) + " responders, " +
                                      std::to_string(neg) + " non-responders)");

    ModelSpec full = spec;
    full.omics_names = ds.block_names();
    if (full.kind == MethodKind::omics_stacking &&
        full.variant == StackingVariant::no_triplet)
        full.hp.gamma = 0.0;

    const auto scaling = full.kind == MethodKind::omi_embed
                             ? data::ScalingKind::minmax
                             : data::ScalingKind::standardize;
    auto prep = data::fit_preprocess(ds, train_rows, scaling);
    const auto blocks = data::apply_preprocess(prep, ds, train_rows);
    std::vector<int> labels;
    labels.reserve(train_rows.size());
    for (int r : train_rows) labels.push_back(ds.labels[static_cast<std::size_t>(r)]);

    std::vector<std::size_t> dims;
    dims.reserve(blocks.size());
    for (const auto& b : blocks) dims.push_back(b.cols);

    Rng rng(seed);
    std::unique_ptr<Model> model;
    switch (full.kind) {
        case MethodKind::early_integration:
            model = std::make_unique<EarlyIntegrationModel>(full, dims, rng);
            break;
        case MethodKind::moli:
            model = std::make_unique<MoliModel>(full, dims, rng);
            break;
        case MethodKind::super_felt:
            model = std::make_unique<SuperFeltModel>(full, dims, rng);
            break;
        case MethodKind::omics_stacking:
            model = std::make_unique<StackingModel>(full, dims, rng);
            break;
        case MethodKind::moma:
            model = std::make_unique<MomaModel>(full, dims, rng);
            break;
        case MethodKind::omi_embed:
            model = std::make_unique<OmiEmbedModel>(full, dims, rng);
            break;
    }
    model->preprocess = std::move(prep);

    train_phases(*model, blocks, labels, rng);
    if (auto* moma = dynamic_cast<MomaModel*>(model.get())) moma->fit_meta(blocks, labels);
    return model;
}

}  // namespace omix::arch
