#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "ecgbench/benchgen/benchgen.hpp"
#include "ecgbench/core/rng.hpp"

namespace ecgbench {

std::size_t path_quota(std::size_t target, std::size_t paths) {
  if (paths == 0) return 0;
  return (target + paths - 1) / paths;
}

std::vector<Candidate> candidates_from(const std::vector<AnalysisResult>& analyses) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    for (const auto& d : analyses[i].diagnoses) {
      out.push_back({i, analyses[i].record_id, d.diagnosis_id, d.decision, d.path.path_id()});
    }
  }
  return out;
}

SampleResult stratified_sample(const std::vector<Candidate>& candidates, const DiagramSet& diagrams,
                               const SamplingPlan& plan, std::uint64_t seed,
                               const LabelFilter* labels) {
  SampleResult res;
  Rng rng(derive_seed(seed, "stratified-sample"));

  // (diagnosis, polarity, path) -> candidate indices in input order
  std::map<std::tuple<std::string, Leaf, std::string>, std::vector<std::size_t>> pools;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (labels) {
      auto rec = labels->find(c.record_id);
      if (rec != labels->end()) {
        auto lab = rec->second.find(c.diagnosis_id);
        if (lab != rec->second.end() && lab->second != (c.polarity == Leaf::Positive)) {
          ++res.label_rejected;
          continue;
        }
      }
    }
    pools[{c.diagnosis_id, c.polarity, c.path_id}].push_back(i);
  }

  for (const auto& d : diagrams.diagrams) {
    if (!plan.diagnoses.empty() &&
        std::find(plan.diagnoses.begin(), plan.diagnoses.end(), d.diagnosis_id) ==
            plan.diagnoses.end()) {
      continue;
    }
    const auto paths = enumerate_paths(d);
    for (Leaf polarity : {Leaf::Positive, Leaf::Negative}) {
      std::vector<std::string> ids;
      for (const auto& p : paths) {
        if (p.leaf == polarity) ids.push_back(p.path_id());
      }
      const std::size_t quota = path_quota(plan.target, ids.size());
      for (const auto& pid : ids) {
        PathAllocation a{d.diagnosis_id, polarity, pid, quota, 0, 0};
        auto it = pools.find({d.diagnosis_id, polarity, pid});
        std::vector<std::size_t> pool = it == pools.end() ? std::vector<std::size_t>{} : it->second;
        a.available = pool.size();
        rng.shuffle(std::span<std::size_t>(pool));
        pool.resize(std::min(pool.size(), quota));
        std::sort(pool.begin(), pool.end());
        for (std::size_t i : pool) res.selected.push_back(candidates[i]);
        a.selected = pool.size();
        res.allocations.push_back(a);
      }
    }
  }
  return res;
}

DatasetStats dataset_stats(const std::vector<BenchmarkCase>& cases) {
  DatasetStats s;
  std::set<std::string> records;
  std::size_t reasoning = 0;
  for (const auto& c : cases) {
    records.insert(c.record_id);
    (c.polarity == Leaf::Positive ? s.positive_cases : s.negative_cases)++;
    s.qa_pairs += c.turns.size();
    reasoning += static_cast<std::size_t>(c.n_reasoning_turns);
  }
  s.unique_records = records.size();
  if (!cases.empty()) s.avg_reasoning_turns = static_cast<double>(reasoning) / cases.size();
  return s;
}

std::string stats_to_json(const DatasetStats& stats, const SampleResult& sample) {
  nlohmann::ordered_json o;
  o["unique_records"] = stats.unique_records;
  o["positive_cases"] = stats.positive_cases;
  o["negative_cases"] = stats.negative_cases;
  o["qa_pairs"] = stats.qa_pairs;
  o["avg_reasoning_turns"] = stats.avg_reasoning_turns;
  o["label_rejected"] = sample.label_rejected;
  auto paths = nlohmann::ordered_json::array();
  for (const auto& a : sample.allocations) {
    paths.push_back({{"diagnosis", a.diagnosis_id},
                     {"polarity", a.polarity == Leaf::Positive ? "+" : "-"},
                     {"path_id", a.path_id},
                     {"quota", a.quota},
                     {"available", a.available},
                     {"selected", a.selected},
                     {"shortfall", a.shortfall()}});
  }
  o["paths"] = std::move(paths);
  return o.dump(2) + "\n";
}

std::string format_path_table(const SampleResult& sample) {
  // One row per diagnosis: per-path selected counts for each polarity.
  std::vector<std::string> order;
  std::map<std::string, std::array<std::vector<const PathAllocation*>, 2>> rows;
  for (const auto& a : sample.allocations) {
    if (!rows.count(a.diagnosis_id)) order.push_back(a.diagnosis_id);
    rows[a.diagnosis_id][a.polarity == Leaf::Positive ? 0 : 1].push_back(&a);
  }
  auto cell = [](const std::vector<const PathAllocation*>& v) {
    std::string s;
    std::size_t total = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += " | ";
      s += std::to_string(v[i]->selected);
      total += v[i]->selected;
    }
    return std::to_string(v.size()) + " paths: " + s + " (" + std::to_string(total) + ")";
  };
  std::string out = "diagnosis  positive                                  negative\n";
  for (const auto& dx : order) {
    char head[16];
    std::snprintf(head, sizeof head, "%-10s ", dx.c_str());
    std::string pos = cell(rows[dx][0]);
    if (pos.size() < 42) pos.resize(42, ' ');
    out += head + pos + cell(rows[dx][1]) + "\n";
  }
  return out;
}

}  // namespace ecgbench
