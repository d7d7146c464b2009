#pragma once

#include "actaff/types.hpp"

#include <vector>

namespace actaff {

// Single-label classification metrics. Per-class entries are NaN where
// undefined (no predictions for precision, no truth instances for recall);
// macro averages skip undefined entries, so a class absent from both truth
// and predictions influences nothing.
struct Metrics {
  Mat confusion; // rows: truth, columns: prediction
  int total = 0;
  Scalar micro_precision = 0; // == micro_recall == accuracy
  Scalar micro_recall = 0;
  Vec class_precision;
  Vec class_recall;
  Scalar macro_precision = 0;
  Scalar macro_recall = 0;
};

Metrics evaluate_labels(const std::vector<int>& truth,
                        const std::vector<int>& pred, int num_classes);

// Mean and standard error (sample stddev / sqrt(n)) across folds.
struct Summary {
  Scalar mean = 0;
  Scalar stderr_ = 0;
};
Summary summarize(const std::vector<Scalar>& values);

} // namespace actaff
