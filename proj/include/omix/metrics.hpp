#pragma once

#include <span>

namespace omix::metrics {

// Mann-Whitney AUROC via average ranks: P(score+ > score-) + 0.5 P(tie).
// Throws when only one class is present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Average-precision AUPRC: descending-score sweep with tied scores grouped,
// sum of precision * delta-recall at each group holding a positive. Throws
// when there is no positive.
double auprc(std::span<const double> scores, std::span<const int> labels);

}  // namespace omix::metrics
