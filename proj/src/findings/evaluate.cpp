#include <algorithm>
#include <cmath>

#include "ecgbench/findings/findings.hpp"

namespace ecgbench {

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool holds(const ExprPtr& e, const EvalContext& ctx) {
  if (!e) return true;
  const Value v = evaluate(e, ctx);
  return v && *v != 0.0;
}

std::optional<std::pair<long, long>> wave_span(const Beat& b, const std::string& source,
                                               long st_fallback) {
  if (source == "P") {
    if (b.p) return std::pair{b.p->onset, b.p->offset};
  } else if (source == "QRS") {
    return std::pair{b.qrs.onset, b.qrs.offset};
  } else if (source == "T") {
    if (b.t) return std::pair{b.t->onset, b.t->offset};
  } else if (source == "PR") {
    if (b.p) return std::pair{b.p->onset, b.qrs.onset};
  } else if (source == "QT") {
    if (b.t) return std::pair{b.qrs.onset, b.t->offset};
  } else if (source == "ST") {
    return std::pair{b.qrs.offset, b.t ? b.t->onset : b.qrs.offset + st_fallback};
  } else if (source == "beat") {
    return std::pair{b.p ? b.p->onset : b.qrs.onset, b.t ? b.t->offset : b.qrs.offset};
  }
  return std::nullopt;
}

}  // namespace

double unit_bin_width(const std::string& unit) {
  if (unit == "ms") return 20.0;
  if (unit == "mV") return 0.1;
  if (unit == "deg") return 15.0;
  if (unit == "bpm") return 10.0;
  return 1.0;
}

std::vector<Finding> evaluate_findings(const BeatMeasurements& m, const Catalog& catalog) {
  std::vector<Finding> out;
  const double fs = m.sampling_rate;
  const long st_fallback = std::lround(0.08 * fs);
  const double duration = m.duration_s;
  auto to_span = [&](long on, long off) {
    return TimeSpan{std::clamp(on / fs, 0.0, duration), std::clamp(off / fs, 0.0, duration)};
  };

  for (const auto& c : catalog.criteria) {
    Finding f;
    f.finding_id = c.finding_id;
    const EvalContext record_ctx{&m, std::nullopt, std::nullopt};
    const Value v = evaluate(c.predicate, record_ctx);
    f.undefined = !v.has_value();
    f.present = v && *v != 0.0;
    if (f.present) {
      if (c.lead) {
        for (Lead l : c.lead->candidates) {
          if (holds(c.lead->where, EvalContext{&m, std::nullopt, l})) f.grounding.leads.push_back(l);
        }
      }
      if (c.wave) {
        if (c.wave->source == "orphan_P") {
          for (const auto& p : m.orphan_p) f.grounding.segments.push_back(to_span(p.onset, p.offset));
        } else {
          for (std::size_t b = 0; b < m.beats.size(); ++b) {
            if (!holds(c.wave->where, EvalContext{&m, b, std::nullopt})) continue;
            if (auto s = wave_span(m.beats[b], c.wave->source, st_fallback)) {
              f.grounding.segments.push_back(to_span(s->first, s->second));
            }
          }
        }
      }
      if (c.measurement) {
        std::vector<double> vals;
        for (std::size_t b = 0; b < m.per_beat.size(); ++b) {
          const EvalContext ctx{&m, b, std::nullopt};
          if (!holds(c.measurement->where, ctx)) continue;
          if (auto x = evaluate(c.measurement->expr, ctx)) vals.push_back(*x);
        }
        if (!vals.empty()) f.grounding.value = MeasuredValue{median_of(vals), c.measurement->unit};
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

const Finding* find_finding(const std::vector<Finding>& findings, const std::string& id) {
  for (const auto& f : findings) {
    if (f.finding_id == id) return &f;
  }
  return nullptr;
}

std::vector<Finding> findings_by_category(const std::vector<Finding>& findings,
                                          const Catalog& catalog, const std::string& category) {
  std::vector<Finding> out;
  for (const auto& f : findings) {
    const auto* c = catalog.find(f.finding_id);
    if (c && c->category == category) out.push_back(f);
  }
  return out;
}

}  // namespace ecgbench
