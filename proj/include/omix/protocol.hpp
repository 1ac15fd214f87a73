#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "omix/architectures.hpp"
#include "omix/data.hpp"
#include "omix/hyperparams.hpp"

namespace omix::protocol {

// Nested stratified CV indices. All index vectors hold global dataset rows;
// inner folds partition each outer training set and never touch its test
// rows.
struct FoldPlan {
    struct OuterFold {
        std::vector<int> train_val;
        std::vector<int> test;
        std::vector<std::vector<int>> inner_train;
        std::vector<std::vector<int>> inner_val;
    };
    std::vector<OuterFold> outer;
};

FoldPlan make_fold_plan(std::span<const int> labels, int outer_k, int inner_k,
                        std::uint64_t seed);

// throws if any outer test row appears in a train/validation set of its fold,
// or if folds fail to partition the data
void check_no_leakage(const FoldPlan& plan, std::size_t num_samples);

// Candidate selection over an evaluation oracle, argmax of mean validation
// AUROC with first-seen tie-breaking. With early_stop, a candidate is
// abandoned once even perfect remaining folds could not beat the best
// completed mean; the bound is exact, so pruning never changes the winner.
// evaluations (optional) counts oracle calls.
int select_best_candidate(int n_candidates, int inner_folds,
                          const std::function<double(int candidate, int fold)>& eval,
                          bool early_stop, int* evaluations = nullptr);

struct SplitScores {
    double auroc = 0.0;
    double auprc = 0.0;
};

struct CellResult {
    std::string dataset;
    std::string method;
    int fold = 0;
    SplitScores test;
    std::optional<SplitScores> external;
    HyperParams selected;
    double wall_seconds = 0.0;
    std::string error;  // nonempty when this cell failed

    bool failed() const { return !error.empty(); }
};

// per (dataset, method, outer-fold) scores; cells keep a fixed
// dataset-major, method-then-fold order
struct ResultMatrix {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    int folds = 0;
    std::vector<CellResult> cells;

    const CellResult& cell(std::size_t d, std::size_t m, int f) const;
    bool any_failed() const;

    // identical metrics, hyperparameters and structure (wall time ignored;
    // it is the one environment-dependent column)
    bool same_results(const ResultMatrix& other) const;
};

struct BenchDataset {
    const data::OmicsDataset* train = nullptr;
    const data::OmicsDataset* external = nullptr;  // optional
};

struct BenchmarkConfig {
    int outer_folds = 5;
    int inner_folds = 5;
    int hp_draws = 200;
    bool early_stop = true;
    int workers = 0;  // 0 = all hardware threads
    std::uint64_t master_seed = 42;
    HpGrid grid;
    std::function<void(const std::string&)> log;  // progress sink, may be empty
    // called after each finished cell under a single-writer lock
    std::function<void(const ResultMatrix&, int done, int total)> checkpoint;
};

// The comparison engine: per cell, draw candidates, select by inner CV,
// retrain on the full outer training set, score the outer test rows and the
// external set when present. One failing cell does not abort the others.
ResultMatrix run_benchmark(const std::vector<BenchDataset>& datasets,
                           const std::vector<arch::ModelSpec>& methods,
                           const BenchmarkConfig& config);

void write_results_csv(const ResultMatrix& results, std::ostream& out);

// Parsed results table as the report command consumes it.
struct ResultRow {
    std::string dataset;
    std::string method;
    int fold = 0;
    std::string split;  // test | external
    double auroc = 0.0;
    double auprc = 0.0;
};

std::vector<ResultRow> read_results_csv(std::istream& in);

}  // namespace omix::protocol
