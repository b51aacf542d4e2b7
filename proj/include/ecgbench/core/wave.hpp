#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ecgbench/core/lead.hpp"

namespace ecgbench {

enum class WaveClass : std::uint8_t { P = 0, QRS = 1, T = 2 };

inline constexpr std::size_t kWaveClassCount = 3;

std::string_view wave_class_name(WaveClass c);
std::optional<WaveClass> parse_wave_class(std::string_view name);

/// Either a concrete lead or the cross-lead consensus.
struct LeadRef {
  std::optional<Lead> lead;  // empty means consensus

  static LeadRef consensus() { return {}; }
  static LeadRef of(Lead l) { return {l}; }
  bool is_consensus() const { return !lead.has_value(); }
  friend bool operator==(const LeadRef&, const LeadRef&) = default;
};

std::string lead_ref_name(const LeadRef& ref);

/// One delineated wave. All positions are sample indices, onset <= peak <= offset.
struct WaveSegment {
  WaveClass wave_class = WaveClass::P;
  LeadRef lead;
  long onset = 0;
  long offset = 0;
  long peak = 0;

  long length() const { return offset - onset; }
  long midpoint() const { return (onset + offset) / 2; }
  bool contains(long sample) const { return onset <= sample && sample <= offset; }
  friend bool operator==(const WaveSegment&, const WaveSegment&) = default;
};

bool is_well_formed(const WaveSegment& s);

/// Sort by onset; ties by class so mixed lists are stable.
void sort_segments(std::vector<WaveSegment>& segs);

std::vector<WaveSegment> of_class(const std::vector<WaveSegment>& segs, WaveClass c);

}  // namespace ecgbench
