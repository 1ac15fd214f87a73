#pragma once

#include <string>
#include <vector>

#include "omix/matrix.hpp"

namespace omix::stats {

// Per-dataset ranks of k methods (rank 1 = best, ties averaged) plus the
// column means the Nemenyi comparison runs on.
struct RankTable {
    std::vector<std::string> methods;
    Matrix ranks;  // datasets x methods
    std::vector<double> mean_ranks;
};

// scores: datasets x methods; higher_is_better flips the rank direction
RankTable compute_ranks(const Matrix& scores, const std::vector<std::string>& methods,
                        bool higher_is_better);

struct CDResult {
    int k = 0;
    int n = 0;
    double alpha = 0.05;
    double q_alpha = 0.0;
    double cd = 0.0;  // q_alpha * sqrt(k(k+1) / (6N))
};

// critical difference of the Nemenyi test at alpha = 0.05 (the only tabled
// level embedded); valid for 2 <= k <= 20
CDResult nemenyi_cd(int k, int n, double alpha = 0.05);

// Friedman chi-square over the rank table; reported alongside the CD but not
// gating it.
struct FriedmanResult {
    double chi2 = 0.0;
    int df = 0;
    double p_value = 1.0;
};

FriedmanResult friedman_test(const RankTable& table);

// Groups of methods whose mean ranks are statistically indistinguishable:
// maximal intervals in rank order with max - min < cd. Only groups of two or
// more are reported.
std::vector<std::vector<int>> indistinguishable_groups(
    const std::vector<double>& mean_ranks, double cd);

// Deterministic SVG: rank axis, one labeled tick per method at its mean
// rank, a CD ruler, and a connector bar per indistinguishable group.
std::string render_cd_diagram_svg(const RankTable& table, const CDResult& cd);
void render_cd_diagram(const RankTable& table, const CDResult& cd,
                       const std::string& path);

// text block with mean ranks, the CD and the significant pairs
std::string summarize(const RankTable& table, const CDResult& cd,
                      const FriedmanResult& friedman);

}  // namespace omix::stats
