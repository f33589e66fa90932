#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace cacheleak {

class DegenerateLabels : public std::invalid_argument {
 public:
  DegenerateLabels() : std::invalid_argument("ROC needs at least one positive and one negative sample") {}
};

struct LabeledScore {
  double score = 0.0;
  bool positive = false;
};

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // fpr non-decreasing
  double auc = 0.0;
};

/// Rule: predict positive iff score >= threshold. Points at every distinct
/// score from high to low, plus the (0,0) start. Trapezoidal AUC.
/// Throws DegenerateLabels.
RocCurve roc(std::vector<LabeledScore> samples);

/// Same for "lower is positive" observables such as TTFT deltas.
RocCurve roc_lower_is_positive(std::vector<LabeledScore> samples);

/// threshold,tpr,fpr
void write_roc_csv(std::ostream& out, const RocCurve& curve);

/// Best TPR among points with fpr <= max_fpr.
double tpr_at_fpr(const RocCurve& curve, double max_fpr);

}  // namespace cacheleak
