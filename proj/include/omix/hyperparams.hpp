#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "omix/rng.hpp"

namespace omix {

// One draw from the shared hyperparameter grid. module_count only matters
// for the module-based method but is drawn for every candidate so candidate
// streams are method-independent.
struct HyperParams {
    int batch_size = 16;
    double dropout_rate = 0.1;
    int epochs = 10;
    double gamma = 0.0;       // triplet weight; doubles as the VAE balance weight
    int layer_dim = 64;
    double learning_rate = 0.01;
    double margin = 0.5;
    double weight_decay = 0.0001;
    int module_count = 16;

    bool operator==(const HyperParams&) const = default;
};

struct HpGrid {
    std::vector<int> batch_size{8, 16, 32};
    std::vector<double> dropout_rate{0.1, 0.3, 0.5, 0.7};
    int epochs_min = 2, epochs_max = 20;
    std::vector<double> gamma{0.0, 0.1, 0.3, 0.5};
    std::vector<int> layer_dim{32, 64, 128, 256, 512, 1024};
    std::vector<double> learning_rate{0.001, 0.01};
    std::vector<double> margin{0.2, 0.5, 1.0};
    std::vector<double> weight_decay{0.0001, 0.001, 0.01, 0.05, 0.1};
    std::vector<int> module_count{4, 8, 16, 32, 64, 128};

    // number of distinct combinations over the eight shared rows
    // (module_count is an extra knob of one method, not part of the grid)
    std::uint64_t cardinality() const;

    bool contains(const HyperParams& hp) const;
};

// n independent uniform draws per row, with replacement
std::vector<HyperParams> sample_hyperparams(const HpGrid& grid, Rng& rng, int n);

std::vector<std::string> hyperparam_column_names();
std::vector<std::string> hyperparam_values_as_strings(const HyperParams& hp);

}  // namespace omix
