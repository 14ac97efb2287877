#include "report.hpp"

#ifndef EXR_VERSION
#define EXR_VERSION "0.0.0"
#endif

namespace exr::report {

Json to_json(const SourcePos& p) {
  return Json{{"line", p.line}, {"column", p.column}, {"offset", p.offset}};
}

Json to_json(const Finding& f) {
  return Json{{"severity", to_lower(to_string(f.severity))},
              {"code", f.code},
              {"message", f.message},
              {"position", to_json(f.pos)}};
}

Json to_json(const std::vector<Finding>& fs) {
  Json a = Json::array();
  for (const auto& f : fs) a.push_back(to_json(f));
  return a;
}

Json to_json(const lang::Value& v) {
  if (v.is_int()) return v.as_int();
  if (v.is_array()) return v.as_array();
  return nullptr;
}

Json to_json(const lang::Effect& e) {
  Json b = Json::object();
  for (const auto& [k, v] : e.bindings) b[k] = to_json(v);
  Json j{{"status", e.status_string()}, {"stdout", e.stdout_text}, {"bindings", b},
         {"steps", e.steps}};
  if (e.error_pos) j["error_position"] = to_json(*e.error_pos);
  return j;
}

Json to_json(const spec::ValidationReport& r) {
  Json j = Json::object();
  j["effect"] = r.effect ? to_json(*r.effect) : Json();
  Json opts = Json::array();
  for (const auto& o : r.options)
    opts.push_back({{"key", std::string(1, o.key)},
                    {"correct", o.correct},
                    {"verdict", std::string(spec::to_string(o.verdict))},
                    {"detail", o.detail}});
  j["options"] = opts;
  Json ans = Json::array();
  for (const auto& a : r.answers)
    ans.push_back({{"facet", a.facet},
                   {"verdict", std::string(spec::to_string(a.verdict))},
                   {"detail", a.detail}});
  j["answers"] = ans;
  return j;
}

namespace {
Json cell_json(const bloom::Cell& c) {
  return Json{{"process", std::string(bloom::to_string(c.process))},
              {"knowledge", std::string(bloom::to_string(c.knowledge))}};
}
}  // namespace

Json to_json(const plan::Report& r) {
  Json sigs = Json::array();
  for (const auto& s : r.signatures) {
    Json one = Json::array();
    for (auto l : s) one.push_back(std::string(plan::to_string(l)));
    sigs.push_back(one);
  }
  Json pats = Json::array();
  for (auto p : r.patterns) pats.push_back(std::string(plan::describe(p)));
  return Json{{"cell_min_path", cell_json(r.cell_min_path)},
              {"cell_max_path", cell_json(r.cell_max_path)},
              {"effort_min", r.effort_min},
              {"effort_max", r.effort_max},
              {"signatures", sigs},
              {"truncated", r.truncated},
              {"patterns", pats}};
}

Json to_json(const sim::SimOutcome& o) {
  Json misses = Json::object();
  for (const auto& [k, v] : o.misses) misses[k] = v;
  Json branches = Json::object();
  for (const auto& [k, b] : o.branches) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < b.branches.size(); ++i)
      arr.push_back({{"branch", b.branches[i]},
                     {"probability", b.probabilities[i]},
                     {"count", b.counts[i]}});
    branches[k] = arr;
  }
  return Json{{"trials", o.trials}, {"solved", o.solved}, {"misses", misses},
              {"branch_counts", branches}};
}

Json to_json(const rw::Explanation& e) {
  Json steps = Json::array();
  for (const auto& s : e.steps) {
    Json tags = Json::array();
    for (const auto& t : s.tags) tags.push_back(t);
    steps.push_back({{"rule", s.rule},
                     {"kind", std::string(rw::to_string(s.kind))},
                     {"tags", tags},
                     {"position", s.position},
                     {"result", rw::to_string(s.result)}});
  }
  return Json{{"buggy_steps", e.buggy_steps()}, {"steps", steps}};
}

Json to_json(const rw::SolutionGraph& g) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    nodes.push_back({{"id", i},
                     {"task", rw::to_string(n.task)},
                     {"depth", n.depth},
                     {"result", n.result ? Json(rw::to_string(*n.result)) : Json()}});
  }
  Json edges = Json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"parent", e.parent},
                     {"rule", e.rule},
                     {"children", e.children},
                     {"subtasks", e.subtasks}});
  auto sol = g.solution();
  return Json{{"solution", sol ? Json(rw::to_string(*sol)) : Json()},
              {"depth_exceeded", g.depth_exceeded},
              {"nodes", nodes},
              {"edges", edges}};
}

Json envelope(const std::string& input, const std::vector<Finding>& findings, Json payload) {
  return Json{{"tool_version", EXR_VERSION},
              {"input", input},
              {"findings", to_json(findings)},
              {"payload", std::move(payload)}};
}

}  // namespace exr::report
