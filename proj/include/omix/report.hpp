#pragma once

#include <string>
#include <vector>

#include "omix/matrix.hpp"
#include "omix/protocol.hpp"

namespace omix::report {

// fold-aggregated scores for one metric on one split
struct Aggregate {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    Matrix mean;    // datasets x methods
    Matrix stddev;  // population standard deviation over the fold values
};

Aggregate aggregate(const std::vector<protocol::ResultRow>& rows,
                    const std::string& metric, const std::string& split);

// Writes, per metric and split: the mean +- std table, the mean-rank table,
// the CD diagram, and a text summary. Needs at least two methods.
void write_report(const std::vector<protocol::ResultRow>& rows,
                  const std::string& out_dir);

// Rank/CD report for a generic dataset,method,value table.
struct GenericRow {
    std::string dataset;
    std::string method;
    double value = 0.0;
};

std::vector<GenericRow> read_generic_csv(std::istream& in);
void write_generic_report(const std::vector<GenericRow>& rows,
                          const std::string& out_dir);

}  // namespace omix::report
