#include "omix/protocol.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "omix/error.hpp"
#include "omix/metrics.hpp"

namespace omix {

std::uint64_t HpGrid::cardinality() const {
    const std::uint64_t epochs =
        static_cast<std::uint64_t>(epochs_max - epochs_min + 1);
    return batch_size.size() * dropout_rate.size() * epochs * gamma.size() *
           layer_dim.size() * learning_rate.size() * margin.size() *
           weight_decay.size();
}

bool HpGrid::contains(const HyperParams& hp) const {
    auto in = [](const auto& row, auto v) {
        return std::find(row.begin(), row.end(), v) != row.end();
    };
    return in(batch_size, hp.batch_size) && in(dropout_rate, hp.dropout_rate) &&
           hp.epochs >= epochs_min && hp.epochs <= epochs_max &&
           in(gamma, hp.gamma) && in(layer_dim, hp.layer_dim) &&
           in(learning_rate, hp.learning_rate) && in(margin, hp.margin) &&
           in(weight_decay, hp.weight_decay) && in(module_count, hp.module_count);
}

std::vector<HyperParams> sample_hyperparams(const HpGrid& grid, Rng& rng, int n) {
    require(n >= 1, "sample_hyperparams: need at least one draw");
    auto pick = [&](const auto& row) {
        return row[static_cast<std::size_t>(rng.uniform_index(row.size()))];
    };
    std::vector<HyperParams> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        HyperParams hp;
        hp.batch_size = pick(grid.batch_size);
        hp.dropout_rate = pick(grid.dropout_rate);
        hp.epochs = grid.epochs_min +
                    static_cast<int>(rng.uniform_index(
                        static_cast<std::uint64_t>(grid.epochs_max - grid.epochs_min + 1)));
        hp.gamma = pick(grid.gamma);
        hp.layer_dim = pick(grid.layer_dim);
        hp.learning_rate = pick(grid.learning_rate);
        hp.margin = pick(grid.margin);
        hp.weight_decay = pick(grid.weight_decay);
        hp.module_count = pick(grid.module_count);
        out.push_back(hp);
    }
    return out;
}

std::vector<std::string> hyperparam_column_names() {
    return {"batch_size", "dropout_rate", "epochs",       "gamma",
            "layer_dim",  "learning_rate", "margin",       "weight_decay",
            "module_count"};
}

namespace {
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

std::vector<std::string> hyperparam_values_as_strings(const HyperParams& hp) {
    return {std::to_string(hp.batch_size), fmt_double(hp.dropout_rate),
            std::to_string(hp.epochs),     fmt_double(hp.gamma),
            std::to_string(hp.layer_dim),  fmt_double(hp.learning_rate),
            fmt_double(hp.margin),         fmt_double(hp.weight_decay),
            std::to_string(hp.module_count)};
}

}  // namespace omix

namespace omix::protocol {

FoldPlan make_fold_plan(std::span<const int> labels, int outer_k, int inner_k,
                        std::uint64_t seed) {
    require(outer_k >= 2 && inner_k >= 2, "make_fold_plan: fold counts must be >= 2");
    Rng outer_rng(SeedChain(seed).mix_in("outer").seed());
    const auto outer_fold_of = data::stratified_kfold(labels, outer_k, outer_rng);

    FoldPlan plan;
    plan.outer.resize(static_cast<std::size_t>(outer_k));
    for (int f = 0; f < outer_k; ++f) {
        auto& of = plan.outer[static_cast<std::size_t>(f)];
        for (std::size_t i = 0; i < labels.size(); ++i)
            (outer_fold_of[i] == f ? of.test : of.train_val).push_back(static_cast<int>(i));

        std::vector<int> tv_labels;
        tv_labels.reserve(of.train_val.size());
        for (int i : of.train_val) tv_labels.push_back(labels[static_cast<std::size_t>(i)]);
        Rng inner_rng(SeedChain(seed).mix_in("inner").mix_in(static_cast<std::uint64_t>(f)).seed());
        const auto inner_fold_of = data::stratified_kfold(tv_labels, inner_k, inner_rng);

        of.inner_train.resize(static_cast<std::size_t>(inner_k));
        of.inner_val.resize(static_cast<std::size_t>(inner_k));
        for (std::size_t i = 0; i < of.train_val.size(); ++i)
            for (int g = 0; g < inner_k; ++g)
                (inner_fold_of[i] == g ? of.inner_val : of.inner_train)[static_cast<std::size_t>(g)]
                    .push_back(of.train_val[i]);
    }
    return plan;
}

void check_no_leakage(const FoldPlan& plan, std::size_t num_samples) {
    std::vector<int> seen(num_samples, 0);
    for (std::size_t f = 0; f < plan.outer.size(); ++f) {
        const auto& of = plan.outer[f];
        std::vector<char> is_test(num_samples, 0);
        for (int i : of.test) {
            is_test[static_cast<std::size_t>(i)] = 1;
            ++seen[static_cast<std::size_t>(i)];
        }
        for (int i : of.train_val)
            require(!is_test[static_cast<std::size_t>(i)],
                    "leakage: row " + std::to_string(i) + " is both test and train_val "
                    "in outer fold " + std::to_string(f));
        require(of.test.size() + of.train_val.size() == num_samples,
                "fold plan: outer fold " + std::to_string(f) + " does not cover the data");

        std::vector<char> in_tv(num_samples, 0);
        for (int i : of.train_val) in_tv[static_cast<std::size_t>(i)] = 1;
        for (std::size_t g = 0; g < of.inner_val.size(); ++g) {
            std::vector<char> is_val(num_samples, 0);
            for (int i : of.inner_val[g]) {
                require(in_tv[static_cast<std::size_t>(i)],
                        "leakage: inner validation row " + std::to_string(i) +
                            " is outside the outer training set");
                require(!is_test[static_cast<std::size_t>(i)],
                        "leakage: outer test row " + std::to_string(i) +
                            " appears in inner fold " + std::to_string(g));
                is_val[static_cast<std::size_t>(i)] = 1;
            }
            for (int i : of.inner_train[g]) {
                require(!is_test[static_cast<std::size_t>(i)],
                        "leakage: outer test row " + std::to_string(i) +
                            " appears in inner training of fold " + std::to_string(g));
                require(!is_val[static_cast<std::size_t>(i)],
                        "leakage: row " + std::to_string(i) +
                            " is both train and validation in inner fold " +
                            std::to_string(g));
            }
            require(of.inner_train[g].size() + of.inner_val[g].size() ==
                        of.train_val.size(),
                    "fold plan: inner fold " + std::to_string(g) +
                        " does not partition the outer training set");
        }
    }
    for (std::size_t i = 0; i < num_samples; ++i)
        require(seen[i] == 1, "fold plan: row " + std::to_string(i) +
                                  " appears in " + std::to_string(seen[i]) +
                                  " outer test sets");
}

int select_best_candidate(int n_candidates, int inner_folds,
                          const std::function<double(int, int)>& eval,
                          bool early_stop, int* evaluations) {
    require(n_candidates >= 1, "select_best_candidate: no candidates");
    if (evaluations) *evaluations = 0;
    int best = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    int usable = 0;
    for (int c = 0; c < n_candidates; ++c) {
        double sum = 0.0;
        bool abandoned = false;
        bool failed = false;
        for (int f = 0; f < inner_folds; ++f) {
            double score;
            try {
                score = eval(c, f);
            } catch (const Error&) {
                failed = true;
                break;
            }
            if (evaluations) ++(*evaluations);
            sum += score;
            // optimistic bound: remaining folds scored 1.0
            const double bound =
                (sum + static_cast<double>(inner_folds - f - 1)) /
                static_cast<double>(inner_folds);
            if (early_stop && bound <= best_mean && f + 1 < inner_folds) {
                abandoned = true;
                break;
            }
        }
        if (failed || abandoned) continue;
        ++usable;
        const double mean = sum / static_cast<double>(inner_folds);
        if (mean > best_mean) {
            best_mean = mean;
            best = c;
        }
    }
    require(usable > 0 || best >= 0,
            "select_best_candidate: every candidate failed training");
    return best;
}

const CellResult& ResultMatrix::cell(std::size_t d, std::size_t m, int f) const {
    return cells[(d * methods.size() + m) * static_cast<std::size_t>(folds) +
                 static_cast<std::size_t>(f)];
}

bool ResultMatrix::any_failed() const {
    return std::any_of(cells.begin(), cells.end(),
                       [](const CellResult& c) { return c.failed(); });
}

bool ResultMatrix::same_results(const ResultMatrix& other) const {
    if (datasets != other.datasets || methods != other.methods || folds != other.folds ||
        cells.size() != other.cells.size())
        return false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& a = cells[i];
        const auto& b = other.cells[i];
        if (a.error != b.error || !(a.selected == b.selected)) return false;
        if (a.test.auroc != b.test.auroc || a.test.auprc != b.test.auprc) return false;
        if (a.external.has_value() != b.external.has_value()) return false;
        if (a.external && (a.external->auroc != b.external->auroc ||
                           a.external->auprc != b.external->auprc))
            return false;
    }
    return true;
}

namespace {

CellResult run_cell(const BenchDataset& bd, const arch::ModelSpec& method,
                    const FoldPlan& plan, int fold, const BenchmarkConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    CellResult cell;
    cell.dataset = bd.train->name;
    cell.method = arch::method_name(method.kind, method.variant);
    cell.fold = fold;
    try {
        const auto& of = plan.outer[static_cast<std::size_t>(fold)];
        const auto base = SeedChain(config.master_seed)
                              .mix_in(cell.dataset)
                              .mix_in(cell.method)
                              .mix_in(static_cast<std::uint64_t>(fold));

        Rng hp_rng(SeedChain(base).mix_in("hp_draws").seed());
        const auto candidates = sample_hyperparams(config.grid, hp_rng, config.hp_draws);

        auto eval = [&](int c, int f) {
            arch::ModelSpec spec = method;
            spec.hp = candidates[static_cast<std::size_t>(c)];
            const auto seed = SeedChain(base)
                                  .mix_in("inner_train")
                                  .mix_in(static_cast<std::uint64_t>(c))
                                  .mix_in(static_cast<std::uint64_t>(f))
                                  .seed();
            const auto& train = of.inner_train[static_cast<std::size_t>(f)];
            const auto& val = of.inner_val[static_cast<std::size_t>(f)];
            auto model = arch::train_model(spec, *bd.train, train, seed);
            const auto scores = model->predict(*bd.train, val);
            std::vector<int> val_labels;
            val_labels.reserve(val.size());
            for (int i : val) val_labels.push_back(bd.train->labels[static_cast<std::size_t>(i)]);
            return metrics::auroc(scores, val_labels);
        };
        const int best = select_best_candidate(config.hp_draws, static_cast<int>(of.inner_val.size()),
                                               eval, config.early_stop);
        cell.selected = candidates[static_cast<std::size_t>(best)];

        // retrain on the combined train and validation rows with a fresh seed
        arch::ModelSpec spec = method;
        spec.hp = cell.selected;
        const auto retrain_seed = SeedChain(base).mix_in("retrain").seed();
        auto model = arch::train_model(spec, *bd.train, of.train_val, retrain_seed);

        const auto test_scores = model->predict(*bd.train, of.test);
        std::vector<int> test_labels;
        test_labels.reserve(of.test.size());
        for (int i : of.test) test_labels.push_back(bd.train->labels[static_cast<std::size_t>(i)]);
        cell.test.auroc = metrics::auroc(test_scores, test_labels);
        cell.test.auprc = metrics::auprc(test_scores, test_labels);

        if (bd.external) {
            const auto ext_scores = model->predict_all(*bd.external);
            SplitScores ext;
            ext.auroc = metrics::auroc(ext_scores, bd.external->labels);
            ext.auprc = metrics::auprc(ext_scores, bd.external->labels);
            cell.external = ext;
        }
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cell;
}

}  // namespace

ResultMatrix run_benchmark(const std::vector<BenchDataset>& datasets,
                           const std::vector<arch::ModelSpec>& methods,
                           const BenchmarkConfig& config) {
    require(!datasets.empty(), "run_benchmark: no datasets");
    require(!methods.empty(), "run_benchmark: no methods");

    ResultMatrix rm;
    rm.folds = config.outer_folds;
    for (const auto& d : datasets) rm.datasets.push_back(d.train->name);
    for (const auto& m : methods) rm.methods.push_back(arch::method_name(m.kind, m.variant));
    rm.cells.resize(datasets.size() * methods.size() *
                    static_cast<std::size_t>(config.outer_folds));

    // one fold plan per dataset, shared by every method for a fair comparison
    std::vector<FoldPlan> plans;
    plans.reserve(datasets.size());
    for (const auto& d : datasets) {
        const auto seed =
            SeedChain(config.master_seed).mix_in("fold_plan").mix_in(d.train->name).seed();
        plans.push_back(make_fold_plan(d.train->labels, config.outer_folds,
                                       config.inner_folds, seed));
        check_no_leakage(plans.back(), d.train->num_samples());
    }

    const int total = static_cast<int>(rm.cells.size());
    const int workers = config.workers > 0 ? config.workers : omp_get_max_threads();
    int done = 0;

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (int idx = 0; idx < total; ++idx) {
        const auto d = static_cast<std::size_t>(idx) /
                       (methods.size() * static_cast<std::size_t>(config.outer_folds));
        const auto rest = static_cast<std::size_t>(idx) %
                          (methods.size() * static_cast<std::size_t>(config.outer_folds));
        const auto m = rest / static_cast<std::size_t>(config.outer_folds);
        const int fold = static_cast<int>(rest % static_cast<std::size_t>(config.outer_folds));

        CellResult cell = run_cell(datasets[d], methods[m], plans[d], fold, config);
#pragma omp critical(omix_results)
        {
            rm.cells[static_cast<std::size_t>(idx)] = std::move(cell);
            ++done;
            const auto& c = rm.cells[static_cast<std::size_t>(idx)];
            if (config.log) {
                std::ostringstream msg;
                msg << "[" << done << "/" << total << "] dataset=" << c.dataset
                    << " method=" << c.method << " fold=" << c.fold;
                if (c.failed())
                    msg << " FAILED: " << c.error;
                else
                    msg << " auroc=" << c.test.auroc << " auprc=" << c.test.auprc
                        << " time=" << c.wall_seconds << "s";
                config.log(msg.str());
            }
            if (config.checkpoint) config.checkpoint(rm, done, total);
        }
    }
    return rm;
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_results_csv(const ResultMatrix& results, std::ostream& out) {
    out << "dataset,method,fold,split,auroc,auprc";
    for (const auto& c : hyperparam_column_names()) out << ',' << c;
    out << ",wall_time_seconds\n";
    for (const auto& cell : results.cells) {
        if (cell.failed()) continue;
        const auto hp = hyperparam_values_as_strings(cell.selected);
        auto emit = [&](const char* split, const SplitScores& s) {
            out << cell.dataset << ',' << cell.method << ',' << cell.fold << ','
                << split << ',' << fmt(s.auroc) << ',' << fmt(s.auprc);
            for (const auto& v : hp) out << ',' << v;
            out << ',' << fmt(cell.wall_seconds) << '\n';
        };
        emit("test", cell.test);
        if (cell.external) emit("external", *cell.external);
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "results table: empty input");
    auto split_csv = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                out.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        out.push_back(cur);
        return out;
    };
    const auto header = split_csv(line);
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<long>(i);
        return -1L;
    };
    const long c_ds = col("dataset"), c_m = col("method"), c_f = col("fold"),
               c_s = col("split"), c_auroc = col("auroc"), c_auprc = col("auprc");
    require(c_ds >= 0 && c_m >= 0 && c_f >= 0 && c_s >= 0 && c_auroc >= 0 && c_auprc >= 0,
            "results table: header lacks required columns "
            "(dataset,method,fold,split,auroc,auprc)");

    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv(line);
        require(cells.size() == header.size(),
                "results table: line " + std::to_string(lineno) + " has " +
                    std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header.size()));
        ResultRow r;
        r.dataset = cells[static_cast<std::size_t>(c_ds)];
        r.method = cells[static_cast<std::size_t>(c_m)];
        try {
            r.fold = std::stoi(cells[static_cast<std::size_t>(c_f)]);
            r.auroc = std::stod(cells[static_cast<std::size_t>(c_auroc)]);
            r.auprc = std::stod(cells[static_cast<std::size_t>(c_auprc)]);
        } catch (const std::exception&) {
            fail("results table: unparseable number on line " + std::to_string(lineno));
        }
        r.split = cells[static_cast<std::size_t>(c_s)];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace omix::protocol
