#include <algorithm>
#include <cstdio>
#include <tuple>

#include "ecgbench/delineation/delineation.hpp"

namespace ecgbench {

namespace {

BoundaryScore match(const std::vector<long>& pred, const std::vector<long>& ref, double tol_samples) {
  // candidate pairs ordered nearest first, ties by earlier reference boundary
  std::vector<std::tuple<long, long, std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < ref.size(); ++r) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      const long d = std::abs(pred[p] - ref[r]);
      if (static_cast<double>(d) <= tol_samples + 1e-9) pairs.emplace_back(d, ref[r], r, p);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> ref_used(ref.size(), false), pred_used(pred.size(), false);
  BoundaryScore s;
  for (const auto& [d, pos, r, p] : pairs) {
    if (ref_used[r] || pred_used[p]) continue;
    ref_used[r] = pred_used[p] = true;
    ++s.tp;
  }
  s.fn = ref.size() - s.tp;
  s.fp = pred.size() - s.tp;
  return s;
}

}  // namespace

SegmentationScore score_segmentation(const DelineationSet& predicted,
                                     const DelineationSet& reference, int sampling_rate,
                                     double tolerance_ms) {
  SegmentationScore score;
  score.tolerance_ms = tolerance_ms;
  const double tol = tolerance_ms * sampling_rate / 1000.0;
  for (std::size_t c = 0; c < kWaveClassCount; ++c) {
    const auto cls = static_cast<WaveClass>(c);
    for (int b = 0; b < 2; ++b) {
      std::vector<long> pred, ref;
      for (const auto& s : predicted.consensus) {
        if (s.wave_class == cls) pred.push_back(b == 0 ? s.onset : s.offset);
      }
      for (const auto& s : reference.consensus) {
        if (s.wave_class == cls) ref.push_back(b == 0 ? s.onset : s.offset);
      }
      score.scores[c][b] = match(pred, ref, tol);
    }
  }
  return score;
}

std::string format_score_table(const SegmentationScore& score) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "tolerance %.0f ms\n%-5s %-7s %6s %6s %6s %8s %9s\n",
                score.tolerance_ms, "wave", "bound", "TP", "FN", "FP", "recall", "precision");
  out += line;
  for (std::size_t c = 0; c < kWaveClassCount; ++c) {
    for (int b = 0; b < 2; ++b) {
      const auto& s = score.scores[c][b];
      std::snprintf(line, sizeof line, "%-5s %-7s %6zu %6zu %6zu %8.4f %9.4f\n",
                    std::string(wave_class_name(static_cast<WaveClass>(c))).c_str(),
                    b == 0 ? "onset" : "offset", s.tp, s.fn, s.fp, s.recall(), s.precision());
      out += line;
    }
  }
  return out;
}

}  // namespace ecgbench
