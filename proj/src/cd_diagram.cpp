#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "omix/error.hpp"
#include "omix/stats.hpp"

namespace omix::stats {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

void line(std::ostringstream& svg, double x1, double y1, double x2, double y2,
          double width) {
    svg << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
        << "\" y2=\"" << num(y2) << "\" stroke=\"black\" stroke-width=\"" << num(width)
        << "\"/>\n";
}

void text(std::ostringstream& svg, double x, double y, const std::string& anchor,
          const std::string& s) {
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(y)
        << "\" font-family=\"Helvetica,Arial,sans-serif\" font-size=\"11\" "
           "text-anchor=\""
        << anchor << "\">" << escape_xml(s) << "</text>\n";
}

}  // namespace

std::string render_cd_diagram_svg(const RankTable& table, const CDResult& cd) {
    const int k = static_cast<int>(table.methods.size());
    require(k == cd.k, "render_cd_diagram: table has " + std::to_string(k) +
                           " methods, CD was computed for k=" + std::to_string(cd.k));

    const double label_col = 170.0;
    const double axis_w = 360.0;
    const double left = label_col;
    const double axis_y = 46.0;
    const double row_h = 16.0;

    auto x_of = [&](double rank) {
        return left + (rank - 1.0) / (static_cast<double>(k) - 1.0) * axis_w;
    };

    // rank order, best first
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return table.mean_ranks[static_cast<std::size_t>(a)] <
               table.mean_ranks[static_cast<std::size_t>(b)];
    });

    const auto groups = indistinguishable_groups(table.mean_ranks, cd.cd);
    // stagger connector bars; greedy depth assignment avoids overlaps
    std::vector<int> depth(groups.size(), 0);
    std::vector<double> depth_end;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        double lo = 1e300, hi = -1e300;
        for (int m : groups[g]) {
            lo = std::min(lo, table.mean_ranks[static_cast<std::size_t>(m)]);
            hi = std::max(hi, table.mean_ranks[static_cast<std::size_t>(m)]);
        }
        std::size_t d = 0;
        while (d < depth_end.size() && depth_end[d] >= lo - 0.02) ++d;
        if (d == depth_end.size()) depth_end.push_back(hi);
        depth_end[d] = hi;
        depth[g] = static_cast<int>(d);
    }
    const double bars_bottom =
        axis_y + 8.0 + (groups.empty() ? 0.0 : static_cast<double>(depth_end.size()) * 7.0);

    const int left_count = (k + 1) / 2;
    const int right_count = k - left_count;
    const double height = bars_bottom +
                          static_cast<double>(std::max(left_count, right_count)) * row_h +
                          14.0;
    const double width = 2.0 * label_col + axis_w;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
        << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
        << num(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // CD ruler above the axis
    const double cd_y = 18.0;
    const double cd_x1 = x_of(1.0);
    const double cd_x2 = x_of(std::min(1.0 + cd.cd, static_cast<double>(k)));
    line(svg, cd_x1, cd_y, cd_x2, cd_y, 1.0);
    line(svg, cd_x1, cd_y - 3.0, cd_x1, cd_y + 3.0, 1.0);
    line(svg, cd_x2, cd_y - 3.0, cd_x2, cd_y + 3.0, 1.0);
    {
        char label[48];
        std::snprintf(label, sizeof label, "CD = %.3f", cd.cd);
        text(svg, (cd_x1 + cd_x2) / 2.0, cd_y - 6.0, "middle", label);
    }

    // axis with integer ticks
    line(svg, x_of(1.0), axis_y, x_of(static_cast<double>(k)), axis_y, 1.5);
    for (int t = 1; t <= k; ++t) {
        line(svg, x_of(t), axis_y - 4.0, x_of(t), axis_y, 1.0);
        text(svg, x_of(t), axis_y - 8.0, "middle", std::to_string(t));
    }

    // connector bars
    for (std::size_t g = 0; g < groups.size(); ++g) {
        double lo = 1e300, hi = -1e300;
        for (int m : groups[g]) {
            lo = std::min(lo, table.mean_ranks[static_cast<std::size_t>(m)]);
            hi = std::max(hi, table.mean_ranks[static_cast<std::size_t>(m)]);
        }
        const double y = axis_y + 8.0 + static_cast<double>(depth[g]) * 7.0;
        line(svg, x_of(lo) - 2.0, y, x_of(hi) + 2.0, y, 3.5);
    }

    // method stems and labels: best half on the left, rest on the right
    for (int i = 0; i < k; ++i) {
        const int m = order[static_cast<std::size_t>(i)];
        const double rank = table.mean_ranks[static_cast<std::size_t>(m)];
        const bool on_left = i < left_count;
        const int row = on_left ? i : (k - 1 - i);
        const double y_row = bars_bottom + (static_cast<double>(row) + 1.0) * row_h;
        const double x_stem = x_of(rank);
        line(svg, x_stem, axis_y, x_stem, y_row, 1.0);
        char label[160];
        std::snprintf(label, sizeof label, "%s (%.2f)",
                      table.methods[static_cast<std::size_t>(m)].c_str(), rank);
        if (on_left) {
            line(svg, left - 6.0, y_row, x_stem, y_row, 1.0);
            text(svg, left - 10.0, y_row + 4.0, "end", label);
        } else {
            line(svg, x_stem, y_row, left + axis_w + 6.0, y_row, 1.0);
            text(svg, left + axis_w + 10.0, y_row + 4.0, "start", label);
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

void render_cd_diagram(const RankTable& table, const CDResult& cd,
                       const std::string& path) {
    const std::string svg = render_cd_diagram_svg(table, cd);
    std::ofstream out(path);
    require(out.good(), "render_cd_diagram: cannot write '" + path + "'");
    out << svg;
    require(out.good(), "render_cd_diagram: write to '" + path + "' failed");
}

}  // namespace omix::stats
