#include "ecgbench/core/record.hpp"

#include <algorithm>
#include <cmath>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/wave.hpp"

namespace ecgbench {

EcgRecord::EcgRecord(std::string id, int sampling_rate, std::vector<std::vector<float>> samples)
    : id_(std::move(id)), sampling_rate_(sampling_rate), samples_(std::move(samples)) {
  if (sampling_rate_ <= 0) {
    throw FormatError("record '" + id_ + "': sampling rate must be positive");
  }
  if (samples_.size() != kLeadCount) {
    throw FormatError("record '" + id_ + "': expected 12 leads, got " +
                      std::to_string(samples_.size()));
  }
  const std::size_t n = samples_.front().size();
  for (std::size_t i = 0; i < kLeadCount; ++i) {
    if (samples_[i].size() != n) {
      throw FormatError("record '" + id_ + "': lead " + std::string(lead_name(kAllLeads[i])) +
                        " has " + std::to_string(samples_[i].size()) + " samples, expected " +
                        std::to_string(n));
    }
  }
}

long EcgRecord::to_samples(double ms) const {
  return std::lround(ms * sampling_rate_ / 1000.0);
}

// wave.hpp helpers live here; they are too small for their own unit.

std::string_view wave_class_name(WaveClass c) {
  switch (c) {
    case WaveClass::P: return "P";
    case WaveClass::QRS: return "QRS";
    case WaveClass::T: return "T";
  }
  return "?";
}

std::optional<WaveClass> parse_wave_class(std::string_view name) {
  if (name == "P") return WaveClass::P;
  if (name == "QRS") return WaveClass::QRS;
  if (name == "T") return WaveClass::T;
  return std::nullopt;
}

std::string lead_ref_name(const LeadRef& ref) {
  return ref.is_consensus() ? std::string("CONSENSUS") : std::string(lead_name(*ref.lead));
}

bool is_well_formed(const WaveSegment& s) { return s.onset <= s.peak && s.peak <= s.offset; }

void sort_segments(std::vector<WaveSegment>& segs) {
  std::stable_sort(segs.begin(), segs.end(), [](const WaveSegment& a, const WaveSegment& b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    return a.wave_class < b.wave_class;
  });
}

std::vector<WaveSegment> of_class(const std::vector<WaveSegment>& segs, WaveClass c) {
  std::vector<WaveSegment> out;
  for (const auto& s : segs) {
    if (s.wave_class == c) out.push_back(s);
  }
  return out;
}

}  // namespace ecgbench
