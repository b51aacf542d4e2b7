#include <algorithm>
#include <limits>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/features/features.hpp"

namespace ecgbench {

std::vector<Beat> group_beats(const DelineationSet& delineation) {
  const auto qrs = of_class(delineation.consensus, WaveClass::QRS);
  if (qrs.empty()) throw EmptyDelineation("no consensus QRS complexes found");
  const auto ps = of_class(delineation.consensus, WaveClass::P);
  const auto ts = of_class(delineation.consensus, WaveClass::T);

  std::vector<Beat> beats;
  for (std::size_t i = 0; i < qrs.size(); ++i) {
    Beat b;
    b.index = static_cast<int>(i);
    b.qrs = qrs[i];
    const long prev_off = i > 0 ? qrs[i - 1].offset : std::numeric_limits<long>::min();
    const long next_on = i + 1 < qrs.size() ? qrs[i + 1].onset : std::numeric_limits<long>::max();
    for (const auto& p : ps) {
      if (p.peak > prev_off && p.peak < qrs[i].onset) b.p = p;  // keeps the nearest
    }
    for (const auto& t : ts) {
      if (t.peak > qrs[i].offset && t.peak < next_on) {
        b.t = t;
        break;
      }
    }
    beats.push_back(b);
  }
  return beats;
}

std::vector<WaveSegment> orphan_p_waves(const DelineationSet& delineation,
                                        const std::vector<Beat>& beats) {
  std::vector<WaveSegment> out;
  if (beats.empty()) return out;
  const long last_qrs = beats.back().qrs.onset;
  for (const auto& p : of_class(delineation.consensus, WaveClass::P)) {
    const bool attached = std::any_of(beats.begin(), beats.end(),
                                      [&](const Beat& b) { return b.p && *b.p == p; });
    if (!attached && p.peak < last_qrs) out.push_back(p);
  }
  return out;
}

}  // namespace ecgbench
