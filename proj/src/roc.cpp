#include "cacheleak/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cacheleak/csv.hpp"

namespace cacheleak {

RocCurve roc(std::vector<LabeledScore> samples) {
  std::size_t pos = 0;
  for (const auto& s : samples) pos += s.positive ? 1 : 0;
  const std::size_t neg = samples.size() - pos;
  if (pos == 0 || neg == 0) throw DegenerateLabels();

  std::sort(samples.begin(), samples.end(), [](const LabeledScore& a, const LabeledScore& b) {
    return a.score > b.score;
  });
  RocCurve c;
  c.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < samples.size();) {
    const double t = samples[i].score;
    while (i < samples.size() && samples[i].score == t) {
      ++(samples[i].positive ? tp : fp);
      ++i;
    }
    RocPoint p{t, static_cast<double>(tp) / static_cast<double>(pos), static_cast<double>(fp) / static_cast<double>(neg)};
    const auto& prev = c.points.back();
    c.auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
    c.points.push_back(p);
  }
  return c;
}

RocCurve roc_lower_is_positive(std::vector<LabeledScore> samples) {
  for (auto& s : samples) s.score = -s.score;
  auto c = roc(std::move(samples));
  for (auto& p : c.points) p.threshold = -p.threshold;
  return c;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,tpr,fpr\n";
  for (const auto& p : curve.points) {
    const std::string t = std::isinf(p.threshold) ? (p.threshold > 0 ? "inf" : "-inf") : fmt_num(p.threshold);
    out << t << ',' << fmt_num(p.tpr) << ',' << fmt_num(p.fpr) << '\n';
  }
}

double tpr_at_fpr(const RocCurve& curve, double max_fpr) {
  double best = 0.0;
  for (const auto& p : curve.points)
    if (p.fpr <= max_fpr) best = std::max(best, p.tpr);
  return best;
}

}  // namespace cacheleak
