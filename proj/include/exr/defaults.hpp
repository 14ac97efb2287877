#pragma once

// Data files compiled into the library: clue table, verb map, weights, rule
// packs, template packs, student profiles and course groupings.

#include <optional>
#include <string_view>
#include <vector>

namespace exr::defaults {

std::string_view clues();
std::string_view verb_map();
std::string_view weights();

/// Lookups by short name (e.g. "linear", "cs1", "novice", "lister").
std::optional<std::string_view> rule_pack(std::string_view name);
std::optional<std::string_view> template_pack(std::string_view name);
std::optional<std::string_view> profile(std::string_view name);
std::optional<std::string_view> grouping(std::string_view name);

std::vector<std::string_view> rule_pack_names();
std::vector<std::string_view> template_pack_names();
std::vector<std::string_view> profile_names();

}  // namespace exr::defaults
