#include "actaff/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace actaff {

Metrics evaluate_labels(const std::vector<int>& truth,
                        const std::vector<int>& pred, int num_classes) {
  if (truth.size() != pred.size())
    throw std::invalid_argument("prediction/truth instance sets differ");
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  Metrics m;
  m.confusion = Mat::Zero(num_classes, num_classes);
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || pred[i] < 0 ||
        pred[i] >= num_classes)
      throw std::invalid_argument("label outside class range");
    m.confusion(truth[i], pred[i]) += 1.0;
  }
  m.total = static_cast<int>(truth.size());
  const Scalar correct = m.confusion.trace();
  m.micro_precision = m.total > 0 ? correct / m.total : 0.0;
  m.micro_recall = m.micro_precision;

  m.class_precision = Vec::Constant(num_classes, nan);
  m.class_recall = Vec::Constant(num_classes, nan);
  Scalar psum = 0, rsum = 0;
  int pdef = 0, rdef = 0;
  for (int k = 0; k < num_classes; ++k) {
    const Scalar col = m.confusion.col(k).sum();
    const Scalar row = m.confusion.row(k).sum();
    if (col > 0) {
      m.class_precision[k] = m.confusion(k, k) / col;
      psum += m.class_precision[k];
      ++pdef;
    }
    if (row > 0) {
      m.class_recall[k] = m.confusion(k, k) / row;
      rsum += m.class_recall[k];
      ++rdef;
    }
  }
  m.macro_precision = pdef > 0 ? psum / pdef : 0.0;
  m.macro_recall = rdef > 0 ? rsum / rdef : 0.0;
  return m;
}

Summary summarize(const std::vector<Scalar>& values) {
  Summary s;
  const int n = static_cast<int>(values.size());
  if (n == 0) return s;
  Scalar sum = 0;
  for (Scalar v : values) sum += v;
  s.mean = sum / n;
  if (n > 1) {
    Scalar ss = 0;
    for (Scalar v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<Scalar>(n));
  }
  return s;
}

} // namespace actaff
