#include "ecgbench/diagnosis/diagram.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/core/record_io.hpp"

namespace ecgbench {

using json = nlohmann::json;

std::string_view leaf_name(Leaf l) { return l == Leaf::Positive ? "POSITIVE" : "NEGATIVE"; }

namespace {

bool is_leaf(const std::string& target) {
  return target == kPositiveLeaf || target == kNegativeLeaf;
}

void check_acyclic(const LogicDiagram& d) {
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<std::string, int> state;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    if (is_leaf(id)) return;
    auto& s = state[id];
    if (s == 1) throw CycleError("diagram " + d.diagnosis_id + ": cycle through node '" + id + "'");
    if (s == 2) return;
    s = 1;
    const auto* n = d.node(id);
    visit(n->yes);
    visit(n->no);
    state[id] = 2;
  };
  visit(d.root);
}

}  // namespace

const DiagramNode* LogicDiagram::node(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<std::string> LogicDiagram::findings() const {
  std::vector<std::string> out;
  for (const auto& n : nodes) {
    if (std::find(out.begin(), out.end(), n.finding_id) == out.end()) out.push_back(n.finding_id);
  }
  return out;
}

std::string ReasoningPath::path_id() const {
  std::string s;
  for (const auto& st : steps) s += st.outcome ? 'Y' : 'N';
  return s;
}

const LogicDiagram* DiagramSet::find(const std::string& id) const {
  for (const auto& d : diagrams) {
    if (d.diagnosis_id == id) return &d;
  }
  return nullptr;
}

const LogicDiagram& DiagramSet::at(const std::string& id) const {
  if (const auto* d = find(id)) return *d;
  throw SchemaError("unknown diagnosis '" + id + "'");
}

DiagramSet parse_diagrams(const std::string& json_text, const Catalog& catalog) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("/: not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("diagrams") || !doc["diagrams"].is_array()) {
    throw SchemaError("/diagrams: required array");
  }
  DiagramSet set;
  std::set<std::string> ids;
  const auto& arr = doc["diagrams"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ptr = "/diagrams/" + std::to_string(i);
    const auto& o = arr[i];
    LogicDiagram d;
    try {
      d.diagnosis_id = o.at("id").get<std::string>();
      d.name = o.at("name").get<std::string>();
      d.root = o.at("root").get<std::string>();
      d.reconstruction = o.value("reconstruction", true);
      for (const auto& n : o.at("nodes")) {
        d.nodes.push_back({n.at("id").get<std::string>(), n.at("finding").get<std::string>(),
                           n.at("yes").get<std::string>(), n.at("no").get<std::string>()});
      }
    } catch (const json::exception& e) {
      throw SchemaError(ptr + ": " + e.what());
    }
    if (!ids.insert(d.diagnosis_id).second) {
      throw SchemaError(ptr + "/id: duplicate diagnosis '" + d.diagnosis_id + "'");
    }
    std::set<std::string> node_ids;
    for (const auto& n : d.nodes) {
      if (is_leaf(n.id) || !node_ids.insert(n.id).second) {
        throw SchemaError(ptr + ": bad or duplicate node id '" + n.id + "'");
      }
    }
    if (!d.node(d.root)) throw SchemaError(ptr + "/root: unknown node '" + d.root + "'");
    for (const auto& n : d.nodes) {
      for (const auto* t : {&n.yes, &n.no}) {
        if (!is_leaf(*t) && !d.node(*t)) {
          throw SchemaError(ptr + ": node '" + n.id + "' points at unknown node '" + *t + "'");
        }
      }
      if (!catalog.find(n.finding_id)) {
        throw DanglingFindingError("diagram " + d.diagnosis_id + " node '" + n.id +
                                   "' references unknown finding '" + n.finding_id + "'");
      }
    }
    check_acyclic(d);
    set.diagrams.push_back(std::move(d));
  }
  if (doc.contains("compounds")) {
    for (const auto& c : doc["compounds"]) {
      CompoundDiagnosis cd;
      cd.id = c.at("id").get<std::string>();
      cd.name = c.value("name", cd.id);
      cd.all_of = c.at("all_of").get<std::vector<std::string>>();
      for (const auto& part : cd.all_of) {
        if (!set.find(part)) {
          throw SchemaError("compound " + cd.id + " references unknown diagnosis '" + part + "'");
        }
      }
      set.compounds.push_back(std::move(cd));
    }
  }
  return set;
}

DiagramSet load_diagrams(const std::filesystem::path& path, const Catalog& catalog) {
  return parse_diagrams(read_file(path), catalog);
}

const DiagramSet& default_diagrams() {
  static const DiagramSet set =
      load_diagrams(default_config_dir() / "diagrams.json", default_catalog());
  return set;
}

DiagnosisResult run_diagram(const LogicDiagram& diagram, const std::vector<Finding>& findings) {
  DiagnosisResult r;
  r.diagnosis_id = diagram.diagnosis_id;
  r.path.diagnosis_id = diagram.diagnosis_id;
  std::string at = diagram.root;
  while (!is_leaf(at)) {
    const auto* n = diagram.node(at);
    const auto* f = find_finding(findings, n->finding_id);
    if (!f) throw MissingFindingError("finding '" + n->finding_id + "' was not evaluated");
    r.path.steps.push_back({n->finding_id, f->present});
    r.evidence.push_back(*f);
    at = f->present ? n->yes : n->no;
  }
  r.path.leaf = at == kPositiveLeaf ? Leaf::Positive : Leaf::Negative;
  r.decision = r.path.leaf;
  return r;
}

std::vector<DiagnosisResult> run_all(const DiagramSet& set, const std::vector<Finding>& findings) {
  std::vector<DiagnosisResult> out;
  for (const auto& d : set.diagrams) out.push_back(run_diagram(d, findings));
  return out;
}

std::vector<CompoundResult> derive_compounds(const DiagramSet& set,
                                             const std::vector<DiagnosisResult>& results) {
  std::vector<CompoundResult> out;
  for (const auto& c : set.compounds) {
    bool all = true;
    for (const auto& part : c.all_of) {
      auto it = std::find_if(results.begin(), results.end(),
                             [&](const DiagnosisResult& r) { return r.diagnosis_id == part; });
      all = all && it != results.end() && it->decision == Leaf::Positive;
    }
    out.push_back({c.id, all});
  }
  return out;
}

std::vector<ReasoningPath> enumerate_paths(const LogicDiagram& diagram) {
  std::vector<ReasoningPath> out;
  ReasoningPath cur;
  cur.diagnosis_id = diagram.diagnosis_id;
  std::function<void(const std::string&)> walk = [&](const std::string& at) {
    if (is_leaf(at)) {
      cur.leaf = at == kPositiveLeaf ? Leaf::Positive : Leaf::Negative;
      out.push_back(cur);
      return;
    }
    const auto* n = diagram.node(at);
    for (bool outcome : {true, false}) {
      cur.steps.push_back({n->finding_id, outcome});
      walk(outcome ? n->yes : n->no);
      cur.steps.pop_back();
    }
  };
  walk(diagram.root);
  return out;
}

ReasoningPath replay_path(const LogicDiagram& diagram, const std::string& path_id) {
  ReasoningPath p;
  p.diagnosis_id = diagram.diagnosis_id;
  std::string at = diagram.root;
  for (char c : path_id) {
    if (is_leaf(at)) throw SchemaError("path '" + path_id + "' continues past a leaf");
    if (c != 'Y' && c != 'N') throw SchemaError("path '" + path_id + "' must use Y/N");
    const auto* n = diagram.node(at);
    p.steps.push_back({n->finding_id, c == 'Y'});
    at = c == 'Y' ? n->yes : n->no;
  }
  if (!is_leaf(at)) throw SchemaError("path '" + path_id + "' stops before a leaf");
  p.leaf = at == kPositiveLeaf ? Leaf::Positive : Leaf::Negative;
  return p;
}

std::string diagram_to_dot(const LogicDiagram& diagram, const Catalog& catalog) {
  std::string out = "digraph \"" + diagram.diagnosis_id + "\" {\n  rankdir=TB;\n";
  out += "  POS [shape=box, label=\"POSITIVE\"];\n  NEG [shape=box, label=\"NEGATIVE\"];\n";
  for (const auto& n : diagram.nodes) {
    const auto* c = catalog.find(n.finding_id);
    out += "  \"" + n.id + "\" [label=\"" + (c ? c->display_name : n.finding_id) + "\"];\n";
    out += "  \"" + n.id + "\" -> \"" + n.yes + "\" [label=\"yes\"];\n";
    out += "  \"" + n.id + "\" -> \"" + n.no + "\" [label=\"no\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace ecgbench
