#include "omix/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "omix/error.hpp"

namespace omix::metrics {

double auroc(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), "auroc: score/label length mismatch");
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += (l != 0);
    const std::size_t n_neg = labels.size() - n_pos;
    require(n_pos > 0 && n_neg > 0, "auroc: undefined, labels contain a single class");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over tie groups; ranks are exact multiples of 0.5
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]]) pos_rank_sum += avg_rank;
        i = j + 1;
    }
    const double u = pos_rank_sum -
                     static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), "auprc: score/label length mismatch");
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += (l != 0);
    require(n_pos > 0, "auprc: undefined, no positive labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    std::size_t tp = 0, seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t group_tp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            group_tp += (labels[order[j]] != 0);
            ++j;
        }
        tp += group_tp;
        seen = j;
        if (group_tp > 0) {
            const double precision =
                static_cast<double>(tp) / static_cast<double>(seen);
            const double delta_recall =
                static_cast<double>(group_tp) / static_cast<double>(n_pos);
            ap += precision * delta_recall;
        }
        i = j;
    }
    return ap;
}

}  // namespace omix::metrics
