#include "exr/defaults.hpp"

#include <utility>

#include "exr_data.hpp"  // generated

namespace exr::defaults {

namespace {

using Table = std::vector<std::pair<std::string_view, std::string_view>>;

std::optional<std::string_view> find(const Table& t, std::string_view name) {
  for (const auto& [k, v] : t)
    if (k == name) return v;
  return std::nullopt;
}

std::vector<std::string_view> names(const Table& t) {
  std::vector<std::string_view> out;
  for (const auto& [k, v] : t) out.push_back(k);
  return out;
}

const Table& packs() {
  static const Table t = {{"differentiation", data::packs_differentiation},
                          {"linear", data::packs_linear}};
  return t;
}
const Table& templates() {
  static const Table t = {{"cs1", data::templates_cs1}};
  return t;
}
const Table& profiles() {
  static const Table t = {{"novice", data::profiles_novice}, {"expert", data::profiles_expert}};
  return t;
}
const Table& groupings() {
  static const Table t = {{"lister", data::groupings_lister}, {"barnes", data::groupings_barnes}};
  return t;
}

}  // namespace

std::string_view clues() { return data::clues; }
std::string_view verb_map() { return data::verbs; }
std::string_view weights() { return data::weights; }

std::optional<std::string_view> rule_pack(std::string_view name) { return find(packs(), name); }
std::optional<std::string_view> template_pack(std::string_view name) {
  return find(templates(), name);
}
std::optional<std::string_view> profile(std::string_view name) { return find(profiles(), name); }
std::optional<std::string_view> grouping(std::string_view name) { return find(groupings(), name); }

std::vector<std::string_view> rule_pack_names() { return names(packs()); }
std::vector<std::string_view> template_pack_names() { return names(templates()); }
std::vector<std::string_view> profile_names() { return names(profiles()); }

}  // namespace exr::defaults
