#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecgbench {

/// The twelve standard leads in canonical order.
enum class Lead : std::uint8_t { I, II, III, aVR, aVL, aVF, V1, V2, V3, V4, V5, V6 };

inline constexpr std::size_t kLeadCount = 12;

inline constexpr std::array<Lead, kLeadCount> kAllLeads = {
    Lead::I,  Lead::II, Lead::III, Lead::aVR, Lead::aVL, Lead::aVF,
    Lead::V1, Lead::V2, Lead::V3,  Lead::V4,  Lead::V5,  Lead::V6};

constexpr std::size_t index_of(Lead lead) { return static_cast<std::size_t>(lead); }

std::string_view lead_name(Lead lead);
std::optional<Lead> parse_lead(std::string_view name);

bool is_limb_lead(Lead lead);

/// Hexaxial angle for limb leads, horizontal-plane angle for precordial leads.
/// Angles are in degrees, positive is inferior (frontal) or anterior (horizontal).
double lead_angle_deg(Lead lead);

/// Named anatomical lead groups used by the criteria catalog.
std::optional<std::vector<Lead>> lead_group(std::string_view name);

std::string join_leads(const std::vector<Lead>& leads, std::string_view sep = ", ");

}  // namespace ecgbench
