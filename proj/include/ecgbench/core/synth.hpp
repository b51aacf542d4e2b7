#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/core/record.hpp"
#include "ecgbench/core/wave.hpp"

namespace ecgbench {

/// One depolarisation lobe of the QRS, described as a dipole. Limb leads see
/// amp * cos(frontal - lead angle); precordial leads see the horizontal-plane
/// projection scaled by a fixed per-lead factor. Timing is a fraction of the
/// QRS duration. Rendered as a triangle (or an M shape when notch > 0).
struct QrsLobe {
  double start_frac = 0.0;
  double dur_frac = 1.0;
  double amp_mv = 1.0;
  double frontal_deg = 60.0;
  double horizontal_deg = -30.0;
  double notch = 0.0;  // relative depth of the central dip
};

/// Explicit signed deflection for a single lead, replacing the projection.
struct Deflection {
  double start_frac = 0.0;
  double dur_frac = 1.0;
  double amp_mv = 1.0;
  double notch = 0.0;
};

struct LeadOverride {
  std::optional<std::vector<Deflection>> qrs;
  double qrs_scale = 1.0;
  std::optional<double> p_amp_mv;
  std::optional<double> t_amp_mv;
  std::optional<double> st_shift_mv;
};

enum class EctopicKind { AtrialPremature, VentricularPremature };

struct Ectopic {
  int beat = 0;
  EctopicKind kind = EctopicKind::AtrialPremature;
};

struct SyntheticSpec {
  std::string id = "synthetic";
  int sampling_rate = 500;
  double duration_s = 10.0;

  double heart_rate = 72.0;
  double pr_ms = 160.0;
  double p_dur_ms = 100.0;
  double qrs_ms = 90.0;
  double qt_ms = 380.0;
  double t_dur_ms = 160.0;

  double p_amp = 0.15;
  double r_amp = 1.2;
  double t_amp = 0.3;
  double axis_deg = 60.0;
  double horizontal_deg = -30.0;
  double p_axis_deg = 60.0;
  double p_horizontal_deg = 45.0;
  double t_axis_deg = 45.0;
  double t_horizontal_deg = 30.0;
  double st_shift_mv = 0.0;

  /// Empty means the default septal / main / terminal lobes derived from
  /// axis_deg, horizontal_deg and r_amp.
  std::vector<QrsLobe> qrs_lobes;
  std::map<Lead, LeadOverride> lead_overrides;

  std::vector<Ectopic> ectopic_schedule;
  std::vector<int> dropped_qrs_schedule;
  /// PR lengthening per conducted beat since the last dropped beat.
  double pr_increment_ms = 0.0;
  /// When set, P waves follow their own rate independent of the QRS rhythm.
  std::optional<double> atrial_rate_bpm;

  double first_qrs_ms = 0.0;  // 0 picks pr_ms + 120 ms
  double rr_jitter = 0.0;     // fractional, uniform +/-
  double noise_mv = 0.0;
  std::uint64_t seed = 0;
};

enum class BeatKind { Normal, AtrialPremature, VentricularPremature, Dropped };

std::string_view beat_kind_name(BeatKind kind);

/// Ground truth for one emitted cardiac cycle (consensus positions).
struct TruthBeat {
  BeatKind kind = BeatKind::Normal;
  std::optional<WaveSegment> p;
  std::optional<WaveSegment> qrs;
  std::optional<WaveSegment> t;
};

/// Values the analysis pipeline is expected to recover from the record.
struct SynthesisSummary {
  double pr_ms = 0.0;
  double qrs_ms = 0.0;
  double qt_ms = 0.0;
  double rr_ms = 0.0;
  double axis_deg = 0.0;
  std::array<double, kLeadCount> st_dev_mv{};
  int beats = 0;
  int nonconducted_p = 0;
};

struct SynthesisResult {
  EcgRecord record;
  /// Per-lead segments for every emitted wave followed by the consensus copies.
  std::vector<WaveSegment> truth;
  std::vector<TruthBeat> beats;
  /// Consensus P segments that are not followed by their own QRS.
  std::vector<WaveSegment> nonconducted_p;
  SynthesisSummary expected;
};

/// Deterministic for a fixed spec (including seed). Throws SpecError on
/// invalid durations or schedules beyond the strip.
SynthesisResult synthesize(const SyntheticSpec& spec);

/// Default lobes for a normal activation sequence.
std::vector<QrsLobe> default_qrs_lobes(const SyntheticSpec& spec);

/// Axis implied by the lobe set: direction of the summed frontal areas.
double lobe_axis_deg(const std::vector<QrsLobe>& lobes);

double precordial_factor(Lead lead);

}  // namespace ecgbench
