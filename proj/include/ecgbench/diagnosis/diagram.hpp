#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ecgbench/findings/findings.hpp"

namespace ecgbench {

enum class Leaf { Positive, Negative };

std::string_view leaf_name(Leaf l);

inline constexpr std::string_view kPositiveLeaf = "POS";
inline constexpr std::string_view kNegativeLeaf = "NEG";

struct DiagramNode {
  std::string id;
  std::string finding_id;
  std::string yes;  // node id, POS or NEG
  std::string no;
};

struct LogicDiagram {
  std::string diagnosis_id;
  std::string name;
  std::string root;
  std::vector<DiagramNode> nodes;  // config order
  bool reconstruction = true;

  const DiagramNode* node(const std::string& id) const;
  /// Distinct findings in node order.
  std::vector<std::string> findings() const;
};

struct PathStep {
  std::string finding_id;
  bool outcome = false;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct ReasoningPath {
  std::string diagnosis_id;
  std::vector<PathStep> steps;
  Leaf leaf = Leaf::Negative;

  /// Outcomes as Y/N characters in traversal order.
  std::string path_id() const;
  friend bool operator==(const ReasoningPath&, const ReasoningPath&) = default;
};

struct DiagnosisResult {
  std::string diagnosis_id;
  Leaf decision = Leaf::Negative;
  ReasoningPath path;
  std::vector<Finding> evidence;
};

struct CompoundDiagnosis {
  std::string id;
  std::string name;
  std::vector<std::string> all_of;
};

struct CompoundResult {
  std::string id;
  bool positive = false;
};

struct DiagramSet {
  std::vector<LogicDiagram> diagrams;
  std::vector<CompoundDiagnosis> compounds;

  const LogicDiagram* find(const std::string& id) const;
  const LogicDiagram& at(const std::string& id) const;
};

/// Validates structure, acyclicity (CycleError) and finding references
/// (DanglingFindingError) against `catalog`.
DiagramSet parse_diagrams(const std::string& json_text, const Catalog& catalog);
DiagramSet load_diagrams(const std::filesystem::path& path, const Catalog& catalog);
const DiagramSet& default_diagrams();

/// Throws MissingFindingError when a reached finding is not in `findings`.
DiagnosisResult run_diagram(const LogicDiagram& diagram, const std::vector<Finding>& findings);

std::vector<DiagnosisResult> run_all(const DiagramSet& set, const std::vector<Finding>& findings);

std::vector<CompoundResult> derive_compounds(const DiagramSet& set,
                                             const std::vector<DiagnosisResult>& results);

/// Depth-first, yes before no.
std::vector<ReasoningPath> enumerate_paths(const LogicDiagram& diagram);

/// Walks the diagram following `outcomes`; throws SchemaError if they do not
/// describe a complete root-to-leaf walk.
ReasoningPath replay_path(const LogicDiagram& diagram, const std::string& path_id);

std::string diagram_to_dot(const LogicDiagram& diagram, const Catalog& catalog);

}  // namespace ecgbench
