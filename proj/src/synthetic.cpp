#include <cmath>
#include <cstdio>

#include "omix/data.hpp"
#include "omix/error.hpp"

namespace omix::data {

OmicsDataset generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
    require(spec.samples >= 4, "generate_synthetic: need at least 4 samples");
    require(spec.features_per_block >= 1, "generate_synthetic: need features");
    const int n_pos = static_cast<int>(
        std::lround(spec.class_balance * static_cast<double>(spec.samples)));
    require(n_pos >= 2 && spec.samples - n_pos >= 2,
            "generate_synthetic: class balance leaves fewer than 2 samples per class");

    OmicsDataset ds;
    ds.name = "synthetic";
    ds.labels.assign(static_cast<std::size_t>(spec.samples), 0);
    for (int i = 0; i < n_pos; ++i) ds.labels[static_cast<std::size_t>(i)] = 1;
    rng.shuffle(ds.labels);
    for (int i = 0; i < spec.samples; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%04d", i);
        ds.sample_ids.emplace_back(buf);
    }

    const int informative =
        std::min(spec.informative_per_block, spec.features_per_block);
    const double s = spec.signal_strength;

    auto feature_name = [](const char* prefix, int i) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%s%04d", prefix, i);
        return std::string(buf);
    };

    // continuous expression block: informative features get a +-s/2 class shift
    {
        OmicsBlock b;
        b.name = "expression";
        b.kind = BlockKind::continuous;
        b.variance_threshold = 0.05;
        b.values.resize(ds.num_samples(), static_cast<std::size_t>(spec.features_per_block));
        for (int f = 0; f < spec.features_per_block; ++f)
            b.feature_names.push_back(feature_name("expr", f));
        for (std::size_t r = 0; r < ds.num_samples(); ++r) {
            const double shift = ds.labels[r] ? s / 2.0 : -s / 2.0;
            for (int f = 0; f < spec.features_per_block; ++f)
                b.values.at(r, static_cast<std::size_t>(f)) =
                    rng.normal() + (f < informative ? shift : 0.0);
        }
        ds.blocks.push_back(std::move(b));
    }

    // binary blocks: informative features flip their Bernoulli rate by class
    const double delta = std::min(0.45, 0.2 * s);
    const char* names[2] = {"mutation", "cnv"};
    const double base_rate[2] = {0.3, 0.25};
    const char* prefixes[2] = {"mut", "cnv"};
    for (int bi = 0; bi < 2; ++bi) {
        OmicsBlock b;
        b.name = names[bi];
        b.kind = BlockKind::binary;
        b.variance_threshold = 0.0;
        b.values.resize(ds.num_samples(), static_cast<std::size_t>(spec.features_per_block));
        for (int f = 0; f < spec.features_per_block; ++f)
            b.feature_names.push_back(feature_name(prefixes[bi], f));
        for (std::size_t r = 0; r < ds.num_samples(); ++r) {
            for (int f = 0; f < spec.features_per_block; ++f) {
                double p = base_rate[bi];
                if (f < informative) p = ds.labels[r] ? 0.5 + delta : 0.5 - delta;
                b.values.at(r, static_cast<std::size_t>(f)) = rng.bernoulli(p) ? 1.0 : 0.0;
            }
        }
        ds.blocks.push_back(std::move(b));
    }
    return ds;
}

}  // namespace omix::data
