#pragma once

// JSON views of the library's result types, used by the CLI.

#include "json.hpp"

#include "exr/bloom.hpp"
#include "exr/minilang.hpp"
#include "exr/plan.hpp"
#include "exr/rewrite.hpp"
#include "exr/sim.hpp"
#include "exr/spec.hpp"

namespace exr::report {

using Json = nlohmann::ordered_json;

Json to_json(const SourcePos& p);
Json to_json(const Finding& f);
Json to_json(const std::vector<Finding>& fs);
Json to_json(const lang::Value& v);
Json to_json(const lang::Effect& e);
Json to_json(const spec::ValidationReport& r);
Json to_json(const plan::Report& r);
Json to_json(const sim::SimOutcome& o);
Json to_json(const rw::Explanation& e);
Json to_json(const rw::SolutionGraph& g);

/// {tool_version, input, findings, payload}
Json envelope(const std::string& input, const std::vector<Finding>& findings, Json payload);

}  // namespace exr::report
