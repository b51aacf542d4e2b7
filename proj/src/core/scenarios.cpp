#include "ecgbench/core/scenarios.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/rng.hpp"

namespace ecgbench {

namespace {

using Shape = std::vector<Deflection>;

// QRS shapes as fractions of the complex; amplitudes in mV.
Shape mono_r(double a, double notch = 0.0) { return {{0.0, 1.0, a, notch}}; }
Shape q_r(double q, double r, double q_frac = 0.2) {
  return {{0.0, q_frac, -q, 0.0}, {q_frac, 1.0 - q_frac, r, 0.0}};
}
Shape r_s(double r, double s, double r_frac = 0.3) {
  return {{0.0, r_frac, r, 0.0}, {r_frac, 1.0 - r_frac, -s, 0.0}};
}
Shape rsr(double r, double s, double r2) {
  return {{0.0, 0.3, r, 0.0}, {0.3, 0.3, -s, 0.0}, {0.6, 0.4, r2, 0.0}};
}
Shape qs(double a) { return {{0.0, 1.0, -a, 0.0}}; }

struct Ctx {
  SyntheticSpec& s;
  MapOptions& map;
  Rng& rng;

  double u(double lo, double hi) { return rng.uniform(lo, hi); }
  int pick(int lo, int hi) { return lo + static_cast<int>(rng.index(hi - lo + 1)); }
  void shape(Lead l, Shape sh) { s.lead_overrides[l].qrs = std::move(sh); }
  void shape(std::initializer_list<Lead> ls, const Shape& sh) {
    for (Lead l : ls) shape(l, sh);
  }
  void wide(double lo = 130.0, double hi = 150.0) {
    s.qrs_ms = u(lo, hi);
    s.qt_ms = std::max(s.qt_ms, s.qrs_ms + s.t_dur_ms + 100.0);
  }
};

using Modifier = std::function<void(Ctx&)>;

struct Entry {
  std::string diagnosis;
  std::string path_id;
  std::vector<std::pair<std::string, bool>> programmed;
  Modifier apply;
  bool spurious_t = true;  // allow stray T candidates in the stand-in map
};

// --- reusable rhythm modifiers ---------------------------------------------------

void normal(Ctx&) {}

void long_pr(Ctx& c) { c.s.pr_ms = c.u(230.0, 280.0); }

void dropped_beat(Ctx& c) { c.s.dropped_qrs_schedule = {c.pick(2, 5)}; }

void dissociated(Ctx& c, double vent_lo, double vent_hi, double atrial_lo, double atrial_hi) {
  c.s.heart_rate = c.u(vent_lo, vent_hi);
  c.s.atrial_rate_bpm = c.u(atrial_lo, atrial_hi);
  c.s.pr_ms = 160.0;
  c.s.first_qrs_ms = c.u(250.0, 400.0);
}

// Progressive PR lengthening ending in a dropped beat, every fourth cycle.
void wenckebach(Ctx& c) {
  c.s.heart_rate = c.u(55.0, 65.0);
  c.s.pr_ms = c.u(150.0, 170.0);
  c.s.pr_increment_ms = c.u(50.0, 70.0);
  c.s.dropped_qrs_schedule = {3, 7};
}

void complete_block(Ctx& c) { dissociated(c, 36.0, 44.0, 90.0, 105.0); }

void pac(Ctx& c) { c.s.ectopic_schedule = {{c.pick(3, 6), EctopicKind::AtrialPremature}}; }
void pvc(Ctx& c) { c.s.ectopic_schedule = {{c.pick(3, 6), EctopicKind::VentricularPremature}}; }

// --- QRS morphology modifiers ----------------------------------------------------

void left_axis_plain(Ctx& c) { c.s.axis_deg = c.u(-75.0, -55.0); }
void right_axis_plain(Ctx& c) { c.s.axis_deg = c.u(105.0, 150.0); }

// qR in I and aVL with a dominant negative aVF: axis near -55..-65 degrees.
void lafb_limb(Ctx& c, bool inferior_rs) {
  const double r = c.u(0.75, 0.9);
  c.shape(Lead::I, q_r(0.15, r));
  c.shape(Lead::aVL, q_r(0.12, c.u(0.9, 1.1)));
  if (inferior_rs) {
    c.shape({Lead::II, Lead::III, Lead::aVF}, r_s(0.15, c.u(1.4, 1.6)));
  } else {
    c.shape({Lead::II, Lead::III}, r_s(0.15, 1.2));
    c.shape(Lead::aVF, qs(c.u(0.95, 1.1)));
  }
}

// rS in I and aVL with a qR inferiorly: axis near +115 degrees.
void lpfb_limb(Ctx& c, bool inferior_qr) {
  c.shape(Lead::I, r_s(0.15, c.u(0.75, 0.9)));
  c.shape(Lead::aVL, r_s(0.12, c.u(0.8, 1.0)));
  if (inferior_qr) {
    c.shape({Lead::II, Lead::III, Lead::aVF}, q_r(0.1, c.u(1.2, 1.4)));
  } else {
    c.shape({Lead::II, Lead::III}, q_r(0.1, 1.2));
    c.shape(Lead::aVF, mono_r(c.u(1.3, 1.5)));
  }
}

void lateral_mono_r(Ctx& c, double notch) {
  for (Lead l : {Lead::I, Lead::aVL, Lead::V5, Lead::V6}) c.shape(l, mono_r(c.u(0.9, 1.3), notch));
}

void lbbb_right(Ctx& c) {
  c.shape(Lead::V1, r_s(0.1, c.u(1.2, 1.6), 0.15));
  c.shape(Lead::V2, qs(c.u(1.5, 2.0)));
}

void rbbb_v1(Ctx& c) { c.shape(Lead::V1, rsr(0.3, 0.4, c.u(0.8, 1.1))); }

void rbbb_lateral(Ctx& c) {
  for (Lead l : {Lead::I, Lead::V5, Lead::V6}) c.shape(l, r_s(c.u(0.8, 1.1), 0.4, 0.55));
}

// Chest leads held well below every voltage criterion.
void quiet_voltage(Ctx& c) {
  c.shape(Lead::V1, r_s(0.2, 0.9));
  c.shape(Lead::V3, r_s(0.5, 0.6, 0.5));
  c.shape(Lead::V5, r_s(1.3, 0.2, 0.8));
  c.shape(Lead::V6, r_s(1.1, 0.2, 0.8));
  c.shape(Lead::aVL, r_s(0.5, 0.3, 0.5));
}

void sokolow(Ctx& c) {
  quiet_voltage(c);
  c.shape(Lead::V1, r_s(0.2, c.u(1.7, 2.1)));
  c.shape(Lead::V5, r_s(c.u(2.3, 2.7), 0.2, 0.8));
}

void cornell(Ctx& c) {
  quiet_voltage(c);
  c.shape(Lead::aVL, r_s(c.u(0.8, 1.0), 0.2, 0.7));
  c.shape(Lead::V3, r_s(0.3, c.u(2.4, 2.8)));
}

void ravl(Ctx& c) {
  quiet_voltage(c);
  c.shape(Lead::aVL, r_s(c.u(1.35, 1.6), 0.2, 0.7));
  c.shape(Lead::V3, r_s(0.5, 0.6, 0.5));
}

void rvh_v1(Ctx& c) { c.shape(Lead::V1, r_s(c.u(0.9, 1.3), 0.3, 0.6)); }
void deep_s_lateral(Ctx& c) {
  c.shape(Lead::V5, r_s(0.3, c.u(0.9, 1.2)));
  c.shape(Lead::V6, r_s(0.3, c.u(0.9, 1.2)));
}

// --- infarction / ischaemia --------------------------------------------------------

std::initializer_list<Lead> group_leads(const std::string& g) {
  static const std::initializer_list<Lead> anterior = {Lead::V1, Lead::V2, Lead::V3, Lead::V4};
  static const std::initializer_list<Lead> inferior = {Lead::II, Lead::III, Lead::aVF};
  static const std::initializer_list<Lead> lateral = {Lead::I, Lead::aVL, Lead::V5, Lead::V6};
  return g == "anterior" ? anterior : g == "inferior" ? inferior : lateral;
}

void path_q(Ctx& c, const std::string& g) {
  for (Lead l : group_leads(g)) c.shape(l, q_r(c.u(0.35, 0.5), c.u(0.6, 0.9), 0.5));
}

void st_shift(Ctx& c, const std::string& g, double lo, double hi) {
  const double v = c.u(lo, hi);
  for (Lead l : group_leads(g)) c.s.lead_overrides[l].st_shift_mv = v;
}

void t_invert(Ctx& c, const std::string& g) {
  const double v = -c.u(0.2, 0.35);
  for (Lead l : group_leads(g)) c.s.lead_overrides[l].t_amp_mv = v;
}

// --- table ----------------------------------------------------------------------------

using P = std::vector<std::pair<std::string, bool>>;

std::vector<Entry> build_table() {
  std::vector<Entry> t;
  auto add = [&](std::string dx, std::string path, P prog, Modifier m, bool spurious = true) {
    t.push_back({std::move(dx), std::move(path), std::move(prog), std::move(m), spurious});
  };

  // AV conduction
  add("1AVB", "YY", {{"prolonged_pr", true}, {"nonconducted_p", true}},
      [](Ctx& c) { long_pr(c); dropped_beat(c); });
  add("1AVB", "YN", {{"prolonged_pr", true}, {"nonconducted_p", false}}, long_pr);
  add("1AVB", "N", {{"prolonged_pr", false}}, normal);

  add("2AVB", "YY", {{"nonconducted_p", true}, {"av_dissociation", true}}, complete_block, false);
  add("2AVB", "YN", {{"nonconducted_p", true}, {"av_dissociation", false}}, dropped_beat);
  add("2AVB", "N", {{"nonconducted_p", false}}, normal);

  const P third = {{"nonconducted_p", true}, {"av_dissociation", true}, {"atrial_faster", true}};
  add("3AVB", "YYYY", [&] { P p = third; p.push_back({"prolonged_qrs", true}); return p; }(),
      [](Ctx& c) { complete_block(c); c.wide(140.0, 160.0); }, false);
  add("3AVB", "YYYN", [&] { P p = third; p.push_back({"prolonged_qrs", false}); return p; }(),
      complete_block, false);
  add("3AVB", "YYN", {{"nonconducted_p", true}, {"av_dissociation", true}, {"atrial_faster", false}},
      wenckebach);
  add("3AVB", "YN", {{"nonconducted_p", true}, {"av_dissociation", false}}, dropped_beat);
  add("3AVB", "N", {{"nonconducted_p", false}}, normal);

  // Bundle branch blocks
  add("CLBBB", "YYYY",
      {{"prolonged_qrs", true}, {"dominant_s_v1v2", true}, {"monophasic_r_lateral_no_q", true},
       {"notched_r_lateral", true}},
      [](Ctx& c) { c.wide(); lbbb_right(c); lateral_mono_r(c, 0.35); });
  add("CLBBB", "YYYN",
      {{"prolonged_qrs", true}, {"dominant_s_v1v2", true}, {"monophasic_r_lateral_no_q", true},
       {"notched_r_lateral", false}},
      [](Ctx& c) { c.wide(); lbbb_right(c); lateral_mono_r(c, 0.0); });
  add("CLBBB", "YYN",
      {{"prolonged_qrs", true}, {"dominant_s_v1v2", true}, {"monophasic_r_lateral_no_q", false}},
      [](Ctx& c) { c.wide(); lbbb_right(c); });
  add("CLBBB", "YN", {{"prolonged_qrs", true}, {"dominant_s_v1v2", false}},
      [](Ctx& c) { c.wide(); rbbb_v1(c); });
  add("CLBBB", "N", {{"prolonged_qrs", false}}, normal);

  add("CRBBB", "YYY", {{"prolonged_qrs", true}, {"rsr_v1v2", true}, {"wide_s_lateral", true}},
      [](Ctx& c) { c.wide(); rbbb_v1(c); rbbb_lateral(c); });
  add("CRBBB", "YYN", {{"prolonged_qrs", true}, {"rsr_v1v2", true}, {"wide_s_lateral", false}},
      [](Ctx& c) { c.wide(); rbbb_v1(c); lateral_mono_r(c, 0.0); });
  add("CRBBB", "YN", {{"prolonged_qrs", true}, {"rsr_v1v2", false}},
      [](Ctx& c) { c.wide(); lbbb_right(c); });
  add("CRBBB", "N", {{"prolonged_qrs", false}}, normal);

  // Fascicular blocks
  const P lafb = {{"left_axis_deviation", true}, {"qr_lateral", true}, {"rs_inferior", true}};
  add("LAFB", "YYYY", [&] { P p = lafb; p.push_back({"prolonged_qrs", true}); return p; }(),
      [](Ctx& c) { c.wide(); lafb_limb(c, true); });
  add("LAFB", "YYYN", [&] { P p = lafb; p.push_back({"prolonged_qrs", false}); return p; }(),
      [](Ctx& c) { lafb_limb(c, true); });
  add("LAFB", "YYN",
      {{"left_axis_deviation", true}, {"qr_lateral", true}, {"rs_inferior", false}},
      [](Ctx& c) { lafb_limb(c, false); });
  add("LAFB", "YN", {{"left_axis_deviation", true}, {"qr_lateral", false}}, left_axis_plain);
  add("LAFB", "N", {{"left_axis_deviation", false}}, normal);

  const P lpfb = {{"right_axis_deviation", true}, {"rs_lateral", true}, {"qr_inferior", true}};
  add("LPFB", "YYYY", [&] { P p = lpfb; p.push_back({"prolonged_qrs", true}); return p; }(),
      [](Ctx& c) { c.wide(); lpfb_limb(c, true); });
  add("LPFB", "YYYN", [&] { P p = lpfb; p.push_back({"prolonged_qrs", false}); return p; }(),
      [](Ctx& c) { lpfb_limb(c, true); });
  add("LPFB", "YYN",
      {{"right_axis_deviation", true}, {"rs_lateral", true}, {"qr_inferior", false}},
      [](Ctx& c) { lpfb_limb(c, false); });
  add("LPFB", "YN", {{"right_axis_deviation", true}, {"rs_lateral", false}}, right_axis_plain);
  add("LPFB", "N", {{"right_axis_deviation", false}}, normal);

  // Hypertrophy
  add("LVH", "YY", {{"lvh_sokolow", true}, {"prolonged_qrs", true}},
      [](Ctx& c) { c.wide(); sokolow(c); });
  add("LVH", "YN", {{"lvh_sokolow", true}, {"prolonged_qrs", false}}, sokolow);
  add("LVH", "NYY", {{"lvh_sokolow", false}, {"lvh_cornell", true}, {"prolonged_qrs", true}},
      [](Ctx& c) { c.wide(); cornell(c); });
  add("LVH", "NYN", {{"lvh_sokolow", false}, {"lvh_cornell", true}, {"prolonged_qrs", false}},
      cornell);
  add("LVH", "NNYY",
      {{"lvh_sokolow", false}, {"lvh_cornell", false}, {"lvh_ravl", true}, {"prolonged_qrs", true}},
      [](Ctx& c) { c.wide(); ravl(c); });
  add("LVH", "NNYN",
      {{"lvh_sokolow", false}, {"lvh_cornell", false}, {"lvh_ravl", true}, {"prolonged_qrs", false}},
      ravl);
  add("LVH", "NNN", {{"lvh_sokolow", false}, {"lvh_cornell", false}, {"lvh_ravl", false}},
      quiet_voltage);

  add("RVH", "YY", {{"dominant_r_v1", true}, {"prolonged_qrs", true}},
      [](Ctx& c) { c.wide(); rvh_v1(c); });
  add("RVH", "YN", {{"dominant_r_v1", true}, {"prolonged_qrs", false}}, rvh_v1);
  add("RVH", "NYY", {{"dominant_r_v1", false}, {"right_axis_deviation", true}, {"deep_s_v5v6", true}},
      [](Ctx& c) { right_axis_plain(c); deep_s_lateral(c); });
  add("RVH", "NYN",
      {{"dominant_r_v1", false}, {"right_axis_deviation", true}, {"deep_s_v5v6", false}},
      right_axis_plain);
  add("RVH", "NN", {{"dominant_r_v1", false}, {"right_axis_deviation", false}}, normal);

  // Ectopy
  add("PAC", "YY", {{"premature_beat", true}, {"premature_narrow_with_p", true}}, pac);
  add("PAC", "YN", {{"premature_beat", true}, {"premature_narrow_with_p", false}}, pvc);
  add("PAC", "N", {{"premature_beat", false}}, normal);
  add("PVC", "YY", {{"premature_beat", true}, {"premature_wide_no_p", true}}, pvc);
  add("PVC", "YN", {{"premature_beat", true}, {"premature_wide_no_p", false}}, pac);
  add("PVC", "N", {{"premature_beat", false}}, normal);

  // Infarction and ischaemia, one diagram per territory
  for (const auto& [dx, g] : std::vector<std::pair<std::string, std::string>>{
           {"AMI", "anterior"}, {"IMI", "inferior"}, {"LMI", "lateral"}}) {
    const std::string q = "pathological_q_" + g;
    const std::string ste = "st_elevation_" + g;
    const double lo = g == "anterior" ? 0.28 : 0.18;
    add(dx, "Y", {{q, true}}, [g](Ctx& c) { path_q(c, g); });
    add(dx, "NY", {{q, false}, {ste, true}}, [g, lo](Ctx& c) { st_shift(c, g, lo, lo + 0.15); });
    add(dx, "NN", {{q, false}, {ste, false}}, normal);
  }
  for (const auto& [dx, g] : std::vector<std::pair<std::string, std::string>>{
           {"ISCAN", "anterior"}, {"ISCIN", "inferior"}, {"ISCLA", "lateral"}}) {
    const std::string std_ = "st_depression_" + g;
    const std::string ti = "t_inversion_" + g;
    add(dx, "Y", {{std_, true}}, [g](Ctx& c) { st_shift(c, g, -0.3, -0.18); });
    add(dx, "NY", {{std_, false}, {ti, true}}, [g](Ctx& c) { t_invert(c, g); });
    add(dx, "NN", {{std_, false}, {ti, false}}, normal);
  }
  return t;
}

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = build_table();
  return t;
}

std::string entry_name(const Entry& e) { return e.diagnosis + "/" + e.path_id; }

SyntheticSpec base_spec(Rng& rng) {
  SyntheticSpec s;
  s.sampling_rate = 500;
  s.duration_s = 10.0;
  s.heart_rate = rng.uniform(62.0, 80.0);
  s.pr_ms = rng.uniform(145.0, 180.0);
  s.p_dur_ms = rng.uniform(90.0, 110.0);
  s.qrs_ms = rng.uniform(80.0, 98.0);
  s.qt_ms = rng.uniform(370.0, 400.0);
  s.t_dur_ms = 160.0;
  s.p_amp = rng.uniform(0.12, 0.2);
  s.r_amp = rng.uniform(1.0, 1.3);
  s.t_amp = rng.uniform(0.25, 0.4);
  s.axis_deg = rng.uniform(30.0, 70.0);
  return s;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : table()) out.push_back(entry_name(e));
    return out;
  }();
  return names;
}

Scenario make_scenario(const std::string& name, std::uint64_t seed) {
  const auto& t = table();
  auto it = std::find_if(t.begin(), t.end(), [&](const Entry& e) { return entry_name(e) == name; });
  if (it == t.end()) throw SpecError("unknown scenario '" + name + "'");

  Rng rng(derive_seed(seed, name));
  Scenario sc;
  sc.name = name;
  sc.diagnosis = it->diagnosis;
  sc.path_id = it->path_id;
  for (const auto& [f, v] : it->programmed) sc.programmed[f] = v;
  sc.spec = base_spec(rng);
  Ctx ctx{sc.spec, sc.map, rng};
  it->apply(ctx);

  char suffix[17];
  std::snprintf(suffix, sizeof suffix, "%08llx",
                static_cast<unsigned long long>(seed & 0xffffffffULL));
  sc.spec.id = it->diagnosis + "_" + it->path_id + "_" + suffix;
  sc.spec.seed = derive_seed(seed, "spec:" + name);
  sc.map.seed = derive_seed(seed, "map:" + name);
  if (it->spurious_t && rng.coin()) sc.map.spurious_t_beats = {static_cast<int>(rng.index(4))};
  return sc;
}

std::vector<Scenario> scenario_suite(std::size_t count, std::uint64_t seed) {
  const auto& names = scenario_names();
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& name = names[i % names.size()];
    out.push_back(make_scenario(name, derive_seed(seed, name + "#" + std::to_string(i))));
  }
  return out;
}

}  // namespace ecgbench
