#include "omix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "omix/error.hpp"

namespace omix::stats {

RankTable compute_ranks(const Matrix& scores, const std::vector<std::string>& methods,
                        bool higher_is_better) {
    require(scores.cols == methods.size(),
            "compute_ranks: " + std::to_string(scores.cols) + " columns vs " +
                std::to_string(methods.size()) + " method names");
    require(scores.rows >= 1 && scores.cols >= 2,
            "compute_ranks: need at least one dataset and two methods");
    for (double v : scores.data)
        require(std::isfinite(v), "compute_ranks: missing or non-finite cell");

    RankTable table;
    table.methods = methods;
    table.ranks.resize(scores.rows, scores.cols);
    for (std::size_t d = 0; d < scores.rows; ++d) {
        std::vector<std::size_t> order(scores.cols);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = scores.at(d, a), vb = scores.at(d, b);
            return higher_is_better ? va > vb : va < vb;
        });
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() &&
                   scores.at(d, order[j + 1]) == scores.at(d, order[i]))
                ++j;
            const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
            for (std::size_t t = i; t <= j; ++t) table.ranks.at(d, order[t]) = avg_rank;
            i = j + 1;
        }
    }
    table.mean_ranks.assign(scores.cols, 0.0);
    for (std::size_t d = 0; d < scores.rows; ++d)
        for (std::size_t m = 0; m < scores.cols; ++m)
            table.mean_ranks[m] += table.ranks.at(d, m);
    for (double& v : table.mean_ranks) v /= static_cast<double>(scores.rows);
    return table;
}

namespace {
// Critical values q_0.05 for the two-tailed Nemenyi test, k = 2..20
// (studentized range statistic divided by sqrt(2); Demsar, JMLR 7, 2006).
constexpr double kNemenyiQ05[] = {
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
    3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};
}  // namespace

CDResult nemenyi_cd(int k, int n, double alpha) {
    require(alpha == 0.05, "nemenyi_cd: only alpha = 0.05 is tabled");
    require(k >= 2 && k <= 20, "nemenyi_cd: k = " + std::to_string(k) +
                                   " outside the tabled range [2, 20]");
    require(n >= 1, "nemenyi_cd: need at least one dataset");
    CDResult r;
    r.k = k;
    r.n = n;
    r.alpha = alpha;
    r.q_alpha = kNemenyiQ05[k - 2];
    r.cd = r.q_alpha * std::sqrt(static_cast<double>(k) * (k + 1) /
                                 (6.0 * static_cast<double>(n)));
    return r;
}

namespace {

// regularized upper incomplete gamma Q(a, x) via series / continued fraction
double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // continued fraction for Q(a,x)
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

double chi2_sf(double x, int df) { return gamma_q(0.5 * df, 0.5 * x); }

}  // namespace

FriedmanResult friedman_test(const RankTable& table) {
    const auto n = static_cast<double>(table.ranks.rows);
    const auto k = static_cast<double>(table.ranks.cols);
    double sum_r2 = 0.0;
    for (double r : table.mean_ranks) sum_r2 += r * r;
    FriedmanResult f;
    f.chi2 = 12.0 * n / (k * (k + 1.0)) * (sum_r2 - k * (k + 1.0) * (k + 1.0) / 4.0);
    f.df = static_cast<int>(k) - 1;
    f.p_value = chi2_sf(f.chi2, f.df);
    return f;
}

std::vector<std::vector<int>> indistinguishable_groups(
    const std::vector<double>& mean_ranks, double cd) {
    const int k = static_cast<int>(mean_ranks.size());
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return mean_ranks[static_cast<std::size_t>(a)] <
               mean_ranks[static_cast<std::size_t>(b)];
    });

    std::vector<std::vector<int>> groups;
    int last_end = -1;
    for (int i = 0; i < k; ++i) {
        int j = i;
        while (j + 1 < k &&
               mean_ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])] -
                       mean_ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] <
                   cd)
            ++j;
        if (j > i && j > last_end) {  // maximal and non-nested
            std::vector<int> g;
            for (int t = i; t <= j; ++t)
                g.push_back(order[static_cast<std::size_t>(t)]);
            groups.push_back(std::move(g));
            last_end = j;
        }
    }
    return groups;
}

std::string summarize(const RankTable& table, const CDResult& cd,
                      const FriedmanResult& friedman) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << "mean ranks (k=" << cd.k << ", N=" << cd.n << "):\n";
    std::vector<int> order(table.methods.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return table.mean_ranks[static_cast<std::size_t>(a)] <
               table.mean_ranks[static_cast<std::size_t>(b)];
    });
    for (int m : order)
        out << "  " << table.methods[static_cast<std::size_t>(m)] << ": "
            << table.mean_ranks[static_cast<std::size_t>(m)] << "\n";
    out << "friedman chi2=" << friedman.chi2 << " df=" << friedman.df
        << " p=" << friedman.p_value << "\n";
    out << "critical difference (Nemenyi, alpha=" << cd.alpha << "): " << cd.cd << "\n";

    bool any = false;
    for (std::size_t a = 0; a < table.methods.size(); ++a)
        for (std::size_t b = a + 1; b < table.methods.size(); ++b) {
            const double gap = std::fabs(table.mean_ranks[a] - table.mean_ranks[b]);
            if (gap >= cd.cd) {
                out << "significant: " << table.methods[a] << " vs " << table.methods[b]
                    << " (gap " << gap << ")\n";
                any = true;
            }
        }
    if (!any) out << "no significant pairwise differences\n";
    return out.str();
}

}  // namespace omix::stats
