#pragma once

#include <chrono>
#include <cstdint>
#include <random>

namespace cacheleak {

using Millis = std::chrono::duration<double, std::milli>;

/// Prefill cost model plus the semantic-cache front end. Defaults describe a
/// GPTQ-quantised 70B model: a missed token costs about 0.45 ms of prefill, a hit
/// about 0.22 us of KV loading.
struct LatencyParams {
  Millis t_miss_per_token{0.45};
  Millis t_hit_per_token{0.22e-3};
  Millis t_base{2.0};
  Millis t_decode_per_token{9.0};
  Millis noise_sigma{0.05};
  Millis semantic_hit_latency{140.0};
  Millis semantic_miss_latency{2500.0};
  std::uint64_t rng_seed = 0x5eed;

  /// 7B model on an A100: 2*7e9 FLOP / 312 TFLOP/s per missed token,
  /// 2*4096*32*2 bytes / 1.5 TB/s per hit token, no fixed overhead, no noise.
  static LatencyParams llama7b();

  Millis per_token_gap() const { return t_miss_per_token - t_hit_per_token; }
  /// Throws std::invalid_argument on negative durations or t_hit >= t_miss.
  void validate() const;
};

/// Per-session Gaussian noise stream.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : rng_(seed) {}
  /// Normal(0, sigma) resampled until >= -floor (clamped after 64 tries).
  Millis draw(Millis sigma, Millis floor);
  std::mt19937_64& engine() noexcept { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// t_base + hit*t_hit + miss*t_miss + noise, never negative.
Millis prefill_ttft(const LatencyParams& p, std::size_t hit_tokens, std::size_t miss_tokens, NoiseSource& noise);
Millis semantic_ttft(const LatencyParams& p, bool hit, NoiseSource& noise);
/// Whole-document prefill: every token hits or every token misses.
Millis document_ttft(const LatencyParams& p, std::size_t doc_tokens, bool hit, NoiseSource& noise);

/// Noise sigma at which a differenced single-token threshold classifier
/// (delta noise sigma*sqrt(2)) has separation z(tpr) + z(1-fpr) for the given
/// per-token gap. Used to calibrate the lab to a target operating point.
Millis calibrated_noise_sigma(Millis per_token_gap, double target_tpr, double target_fpr);

}  // namespace cacheleak
