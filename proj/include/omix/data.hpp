#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omix/matrix.hpp"
#include "omix/rng.hpp"

namespace omix::data {

enum class BlockKind { continuous, binary };

struct OmicsBlock {
    std::string name;
    BlockKind kind = BlockKind::continuous;
    Matrix values;  // samples x features
    std::vector<std::string> feature_names;
    double variance_threshold = 0.0;
};

// Named omics blocks over a shared sample axis plus binary response labels
// (1 = responder). Blocks keep manifest order; every consumer that
// concatenates does so in this order.
struct OmicsDataset {
    std::string name;
    std::vector<OmicsBlock> blocks;
    std::vector<int> labels;
    std::vector<std::string> sample_ids;
    int dropped_samples = 0;  // ids missing from at least one block at load

    std::size_t num_samples() const { return labels.size(); }
    std::vector<std::string> block_names() const;
};

// Manifest: JSON listing the labels file and the omics block files.
// Block/label files are delimited text (comma or tab, sniffed from the
// header): first row feature names, first column sample id.
OmicsDataset load_dataset(const std::string& manifest_path);

void write_dataset(const OmicsDataset& ds, const std::string& out_dir,
                   const std::string& manifest_name = "manifest.json");

// keep-mask over features: population variance strictly above threshold,
// computed from the given training rows only
std::vector<std::uint8_t> variance_filter(const Matrix& block,
                                          std::span<const int> train_rows,
                                          double threshold);

enum class ScalingKind { none, standardize, minmax };

struct BlockPreprocess {
    std::string name;
    BlockKind kind = BlockKind::continuous;
    std::vector<std::string> input_features;  // full feature list expected at apply
    std::vector<std::uint8_t> keep;
    ScalingKind scaling = ScalingKind::none;
    std::vector<double> center;  // per kept feature
    std::vector<double> scale;   // per kept feature
};

// Frozen preprocessing: variance masks plus scaling statistics, fit on
// training rows only. Applying is const and repeatable.
struct PreprocessState {
    std::vector<BlockPreprocess> blocks;
};

// continuous_scaling picks how continuous blocks are squashed (standardize
// for most methods; minmax for reconstruction targets that must live in
// [0,1]). Binary blocks are never scaled.
PreprocessState fit_preprocess(const OmicsDataset& ds, std::span<const int> train_rows,
                               ScalingKind continuous_scaling);

// Applies masks and scaling to the selected rows of `ds`. Features are
// aligned by name against the fitted state; missing or extra features raise
// an error listing them.
std::vector<Matrix> apply_preprocess(const PreprocessState& state,
                                     const OmicsDataset& ds,
                                     std::span<const int> rows);

// k disjoint stratified folds; per-fold class counts deviate from exact
// proportionality by at most one. fold_of[i] in [0, k).
std::vector<int> stratified_kfold(std::span<const int> labels, int k, Rng& rng);

struct SyntheticSpec {
    int samples = 300;
    int features_per_block = 100;
    int informative_per_block = 10;
    double class_balance = 0.5;    // fraction of positives, exact count
    double signal_strength = 0.0;  // 0 = label-independent features
};

// Three blocks (continuous expression + two binary) with a planted
// informative feature subset at the requested strength.
OmicsDataset generate_synthetic(const SyntheticSpec& spec, Rng& rng);

}  // namespace omix::data
