#pragma once

#include <span>
#include <string>
#include <vector>

#include "ecgbench/core/lead.hpp"

namespace ecgbench {

/// A twelve-lead recording. Samples are millivolts, stored lead-major.
/// Instances are validated on construction and immutable afterwards.
class EcgRecord {
 public:
  static constexpr int kDefaultSamplingRate = 100;

  EcgRecord() = default;
  /// `samples` must hold exactly 12 equally long rows in canonical lead order.
  EcgRecord(std::string id, int sampling_rate, std::vector<std::vector<float>> samples);

  const std::string& id() const { return id_; }
  int sampling_rate() const { return sampling_rate_; }
  std::size_t sample_count() const { return samples_.empty() ? 0 : samples_.front().size(); }
  double duration_s() const {
    return static_cast<double>(sample_count()) / static_cast<double>(sampling_rate_);
  }

  std::span<const float> lead(Lead l) const { return samples_[index_of(l)]; }
  const std::vector<std::vector<float>>& samples() const { return samples_; }

  double ms_per_sample() const { return 1000.0 / sampling_rate_; }
  double to_ms(double samples) const { return samples * ms_per_sample(); }
  long to_samples(double ms) const;

 private:
  std::string id_;
  int sampling_rate_ = kDefaultSamplingRate;
  std::vector<std::vector<float>> samples_;
};

}  // namespace ecgbench
