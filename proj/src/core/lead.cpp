#include "ecgbench/core/lead.hpp"

#include <cctype>

namespace ecgbench {

namespace {

constexpr std::array<std::string_view, kLeadCount> kNames = {
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6"};

// Hexaxial reference angles, then horizontal-plane angles for V1..V6.
constexpr std::array<double, kLeadCount> kAngles = {0.0,   60.0, 120.0, -150.0, -30.0, 90.0,
                                                    115.0, 95.0, 75.0,  60.0,   30.0,  0.0};

}  // namespace

std::string_view lead_name(Lead lead) { return kNames[index_of(lead)]; }

std::optional<Lead> parse_lead(std::string_view name) {
  for (std::size_t i = 0; i < kLeadCount; ++i) {
    if (kNames[i] == name) return kAllLeads[i];
  }
  // tolerate upper-case augmented names ("AVR")
  for (std::size_t i = 0; i < kLeadCount; ++i) {
    std::string_view n = kNames[i];
    if (n.size() != name.size()) continue;
    bool same = true;
    for (std::size_t k = 0; k < n.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(n[k])) !=
          std::tolower(static_cast<unsigned char>(name[k]))) {
        same = false;
        break;
      }
    }
    if (same) return kAllLeads[i];
  }
  return std::nullopt;
}

bool is_limb_lead(Lead lead) { return index_of(lead) < 6; }

double lead_angle_deg(Lead lead) { return kAngles[index_of(lead)]; }

std::optional<std::vector<Lead>> lead_group(std::string_view name) {
  if (name == "anterior") return std::vector<Lead>{Lead::V1, Lead::V2, Lead::V3, Lead::V4};
  if (name == "inferior") return std::vector<Lead>{Lead::II, Lead::III, Lead::aVF};
  if (name == "lateral") return std::vector<Lead>{Lead::I, Lead::aVL, Lead::V5, Lead::V6};
  if (name == "limb") return std::vector<Lead>(kAllLeads.begin(), kAllLeads.begin() + 6);
  if (name == "precordial") return std::vector<Lead>(kAllLeads.begin() + 6, kAllLeads.end());
  if (name == "all") return std::vector<Lead>(kAllLeads.begin(), kAllLeads.end());
  return std::nullopt;
}

std::string join_leads(const std::vector<Lead>& leads, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < leads.size(); ++i) {
    if (i) out += sep;
    out += lead_name(leads[i]);
  }
  return out;
}

}  // namespace ecgbench
