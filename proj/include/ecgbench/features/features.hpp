#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/core/record.hpp"
#include "ecgbench/core/wave.hpp"
#include "ecgbench/delineation/delineation.hpp"

namespace ecgbench {

enum class DeflectionLabel { Q, R, S, RPrime };

std::string_view deflection_label_name(DeflectionLabel l);

struct SubDeflection {
  DeflectionLabel label = DeflectionLabel::R;
  long onset = 0;
  long peak = 0;
  long offset = 0;
  double amp_mv = 0.0;  // signed, relative to the isoelectric line
};

enum class Morphology { qR, rS, RSR, QS, RMonophasic, Other };

std::string_view morphology_name(Morphology m);

struct Beat {
  int index = 0;
  std::optional<WaveSegment> p;
  WaveSegment qrs;
  std::optional<WaveSegment> t;
};

struct LeadMeasures {
  double iso_mv = 0.0;
  std::optional<double> p_amp_mv;  // signed extreme
  double r_amp_mv = 0.0;           // tallest positive excursion in the QRS
  double s_amp_mv = 0.0;           // deepest negative excursion, as a magnitude
  double q_amp_mv = 0.0;           // depth of the labelled Q, 0 without one
  double q_dur_ms = 0.0;
  double r_dur_ms = 0.0;
  double s_dur_ms = 0.0;
  std::optional<double> t_amp_mv;
  double st_j_mv = 0.0;
  double st_mv = 0.0;  // J point + 60 ms
  double qrs_area_mv_s = 0.0;
  std::vector<SubDeflection> deflections;
  Morphology morphology = Morphology::Other;
  bool notched_r = false;
  bool pathological_q = false;
};

struct BeatMeasures {
  int index = 0;
  std::optional<double> p_dur_ms;
  double qrs_dur_ms = 0.0;
  std::optional<double> t_dur_ms;
  std::optional<double> pr_ms;
  std::optional<double> rr_ms;
  std::optional<double> qt_ms;
  std::optional<double> rr_ratio;  // rr / record median rr
  std::optional<double> axis_deg;
  std::array<LeadMeasures, kLeadCount> leads;
};

struct BeatMeasurements {
  std::string record_id;
  int sampling_rate = 0;
  double duration_s = 0.0;
  std::vector<Beat> beats;
  std::vector<BeatMeasures> per_beat;
  std::vector<WaveSegment> orphan_p;
  int orphan_p_count = 0;
  std::optional<double> atrial_rate_bpm;
  std::optional<double> ventricular_rate_bpm;
  std::optional<double> pr_range_ms;
  std::optional<double> axis_deg;  // median of per-beat axes
};

inline constexpr double kStMeasureOffsetMs = 60.0;
inline constexpr double kMinDeflectionMv = 0.05;
inline constexpr double kNotchDipMv = 0.05;
inline constexpr double kPathologicalQMs = 40.0;
inline constexpr double kPathologicalQRatio = 0.25;
inline constexpr double kAxisAreaFloor = 1e-4;  // mV*s

/// Throws EmptyDelineation when the consensus has no QRS.
std::vector<Beat> group_beats(const DelineationSet& delineation);

/// Consensus P segments attached to no beat that precede some QRS.
std::vector<WaveSegment> orphan_p_waves(const DelineationSet& delineation,
                                        const std::vector<Beat>& beats);

/// Splits the QRS on one lead into labelled deflections relative to `iso`.
std::vector<SubDeflection> qrs_deflections(std::span<const float> x, const WaveSegment& qrs,
                                           double iso);

struct MorphologyResult {
  Morphology morphology = Morphology::Other;
  bool notched_r = false;
  bool pathological_q = false;
};

MorphologyResult classify_deflections(const std::vector<SubDeflection>& defl,
                                      std::span<const float> x, double iso, double ms_per_sample);

MorphologyResult classify_morphology(const EcgRecord& record, const Beat& beat, Lead lead);

/// Degrees in (-180, 180]; throws UndefinedAxis when both areas are below the floor.
double frontal_axis(double area_lead_i, double area_lead_avf);

BeatMeasurements measure(const EcgRecord& record, const std::vector<Beat>& beats,
                         const std::vector<WaveSegment>& orphan_p = {});

/// group_beats + orphan detection + measure.
BeatMeasurements measure_record(const EcgRecord& record, const DelineationSet& delineation);

}  // namespace ecgbench
