#include "cacheleak/latency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace cacheleak {

LatencyParams LatencyParams::llama7b() {
  LatencyParams p;
  p.t_miss_per_token = Millis{(2.0 * 7e9) / 312e12 * 1e3};
  p.t_hit_per_token = Millis{(2.0 * 4096 * 32 * 2) / 1.5e12 * 1e3};
  p.t_base = Millis{0.0};
  p.noise_sigma = Millis{0.0};
  return p;
}

void LatencyParams::validate() const {
  for (auto d : {t_miss_per_token, t_hit_per_token, t_base, t_decode_per_token, noise_sigma, semantic_hit_latency,
                 semantic_miss_latency})
    if (d.count() < 0.0) throw std::invalid_argument("latency params: durations must be non-negative");
  if (!(t_hit_per_token < t_miss_per_token))
    throw std::invalid_argument("latency params: t_hit_per_token must be below t_miss_per_token");
}

Millis NoiseSource::draw(Millis sigma, Millis floor) {
  if (sigma.count() <= 0.0) return Millis{0.0};
  double eps = 0.0;
  for (int attempt = 0; attempt < 64; ++attempt) {
    eps = sigma.count() * normal_(rng_);
    if (eps >= -floor.count()) return Millis{eps};
  }
  return Millis{std::max(eps, -floor.count())};
}

Millis prefill_ttft(const LatencyParams& p, std::size_t hit_tokens, std::size_t miss_tokens, NoiseSource& noise) {
  const Millis det = p.t_base + static_cast<double>(hit_tokens) * p.t_hit_per_token +
                     static_cast<double>(miss_tokens) * p.t_miss_per_token;
  return det + noise.draw(p.noise_sigma, p.t_base);
}

Millis semantic_ttft(const LatencyParams& p, bool hit, NoiseSource& noise) {
  const Millis det = hit ? p.semantic_hit_latency : p.semantic_miss_latency;
  return det + noise.draw(p.noise_sigma, det);
}

Millis document_ttft(const LatencyParams& p, std::size_t doc_tokens, bool hit, NoiseSource& noise) {
  return hit ? prefill_ttft(p, doc_tokens, 0, noise) : prefill_ttft(p, 0, doc_tokens, noise);
}

Millis calibrated_noise_sigma(Millis per_token_gap, double target_tpr, double target_fpr) {
  if (!(target_tpr > 0.5 && target_tpr < 1.0 && target_fpr > 0.0 && target_fpr < 0.5))
    throw std::invalid_argument("calibration targets must satisfy 0.5 < tpr < 1 and 0 < fpr < 0.5");
  const boost::math::normal_distribution<double> std_normal;
  const double separation = boost::math::quantile(std_normal, target_tpr) +
                            boost::math::quantile(std_normal, 1.0 - target_fpr);
  return per_token_gap / (separation * std::sqrt(2.0));
}

}  // namespace cacheleak
