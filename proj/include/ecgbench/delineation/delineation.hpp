#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/core/record.hpp"
#include "ecgbench/core/scenarios.hpp"
#include "ecgbench/core/synth.hpp"
#include "ecgbench/core/wave.hpp"

namespace ecgbench {

using PerLeadSegments = std::array<std::vector<WaveSegment>, kLeadCount>;

enum class Provenance { ProbabilityMap, ExternalAnnotation, SyntheticTruth };

std::string_view provenance_name(Provenance p);

struct DelineationSet {
  PerLeadSegments per_lead;
  std::vector<WaveSegment> consensus;
  Provenance provenance = Provenance::ProbabilityMap;
};

// ---------------------------------------------------------------------------
// Probability maps

inline constexpr std::size_t kMapClasses = 4;  // P, QRS, T, background
inline constexpr std::size_t kBackground = 3;

/// Class probabilities laid out [lead][time][class].
class DelineationMap {
 public:
  DelineationMap() = default;
  explicit DelineationMap(std::size_t samples);
  DelineationMap(std::size_t samples, std::vector<float> data);

  std::size_t sample_count() const { return samples_; }
  float at(Lead lead, std::size_t t, std::size_t cls) const {
    return data_[(index_of(lead) * samples_ + t) * kMapClasses + cls];
  }
  float& at(Lead lead, std::size_t t, std::size_t cls) {
    return data_[(index_of(lead) * samples_ + t) * kMapClasses + cls];
  }
  /// Sets one sample to `confidence` on `cls`, the remainder spread evenly.
  void set_class(Lead lead, std::size_t t, std::size_t cls, double confidence);
  const std::vector<float>& data() const { return data_; }

  /// Throws DimensionError when a row does not sum to one within 1e-6.
  void validate() const;

 private:
  std::size_t samples_ = 0;
  std::vector<float> data_;
};

/// Map whose argmax reproduces `segments` exactly (per-lead entries only).
DelineationMap map_from_segments(const EcgRecord& record, const std::vector<WaveSegment>& segments,
                                 double confidence = 1.0);

/// Stand-in for the neural delineator on a synthetic record: drops the P waves it
/// would miss and injects spurious T candidates as configured.
DelineationMap stand_in_map(const SynthesisResult& synth, const MapOptions& options);

std::string format_probability_map(const DelineationMap& map, const EcgRecord& record);
DelineationMap parse_probability_map(const std::string& bytes);
DelineationMap read_probability_map(const std::filesystem::path& path);
void write_probability_map(const DelineationMap& map, const EcgRecord& record,
                           const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Decoding and post-processing

inline constexpr double kMinRunMs = 20.0;

PerLeadSegments decode_probability_map(const DelineationMap& map, const EcgRecord& record);

enum class Polarity { Positive, Negative, BiphasicPosNeg, BiphasicNegPos };

std::string_view polarity_name(Polarity p);

struct PWaveTemplate {
  double mean_duration_ms = 0.0;
  double mean_amplitude_mv = 0.0;
  Polarity polarity = Polarity::Positive;
  Lead lead = Lead::II;
};

/// Polarity of the samples in [onset, offset] relative to `iso`.
Polarity deflection_polarity(std::span<const float> x, long onset, long offset, double iso);

/// Undefined when the lead has no P segments.
std::optional<PWaveTemplate> p_wave_template(const EcgRecord& record, Lead lead,
                                             const std::vector<WaveSegment>& segs);

inline constexpr double kMinRecoveredPMs = 60.0;
inline constexpr double kRecoveredPAmplitudeRatio = 0.05;

PerLeadSegments recover_p_waves(const EcgRecord& record, const PerLeadSegments& segs);

/// `expected_fraction` overrides the per-lead running median peak fraction.
PerLeadSegments enforce_t_constraints(const PerLeadSegments& segs,
                                      std::optional<double> expected_fraction = std::nullopt);

inline constexpr double kConsensusWindowMs = 80.0;
inline constexpr std::size_t kConsensusMinLeads = 4;

DelineationSet build_consensus(const PerLeadSegments& segs, int sampling_rate,
                               Provenance provenance = Provenance::ProbabilityMap);

/// decode -> recover P -> constrain T -> consensus.
DelineationSet delineate(const DelineationMap& map, const EcgRecord& record);

/// Per-lead and consensus truth from the synthesizer.
DelineationSet truth_delineation(const std::vector<WaveSegment>& truth);

// ---------------------------------------------------------------------------
// Scoring

enum class Boundary { Onset, Offset };

struct BoundaryScore {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  double recall() const { return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn); }
  double precision() const { return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp); }
};

struct SegmentationScore {
  /// [class][boundary]
  std::array<std::array<BoundaryScore, 2>, kWaveClassCount> scores{};
  double tolerance_ms = 150.0;

  const BoundaryScore& at(WaveClass c, Boundary b) const {
    return scores[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)];
  }
};

inline constexpr double kDefaultToleranceMs = 150.0;

/// Scores consensus segments; both sets must come from the same record.
SegmentationScore score_segmentation(const DelineationSet& predicted,
                                     const DelineationSet& reference, int sampling_rate,
                                     double tolerance_ms = kDefaultToleranceMs);

std::string format_score_table(const SegmentationScore& score);

// ---------------------------------------------------------------------------
// Annotation interchange: JSON array of {lead, class, onset, offset, peak}

std::string format_annotations(const DelineationSet& set);
/// Consensus is rebuilt from per-lead entries when the file carries none.
DelineationSet parse_annotations(const std::string& text, int sampling_rate);
DelineationSet read_annotations(const std::filesystem::path& path, int sampling_rate);

}  // namespace ecgbench
