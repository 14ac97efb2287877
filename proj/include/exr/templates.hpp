#pragma once

// Template rules (metaplans) in the `#name(params) => body #end` syntax,
// distractor transforms, and generation of validated exercise specs.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "exr/common.hpp"
#include "exr/spec.hpp"

namespace exr::tpl {

enum class Produces { Code, Option, Spec };
std::string_view to_string(Produces p);

struct TemplateRule {
  std::string name;
  std::vector<std::string> params;
  std::string body;
  Produces produces = Produces::Code;
  SourcePos pos;
};

struct TemplatePack {
  std::vector<TemplateRule> rules;

  const TemplateRule* find(std::string_view name) const;
  const TemplateRule& at(std::string_view name) const;  // throws UnknownRule

  /// Rules are `#name(a, b) [: code|option|spec] =>` ... `#end`; lines
  /// starting with `//` outside rules are comments. Throws ParseError,
  /// DuplicateRule or CycleDetected.
  static TemplatePack parse(std::string_view text);
};

using Bindings = std::map<std::string, std::string>;

enum class Role { Limit, Operator, Init, Step };

struct DistractorTransform {
  std::string name;
  Role role;
};

const std::vector<DistractorTransform>& transforms();
bool is_transform(std::string_view name);

/// Replacement values for `value`, most plausible first; none equals
/// `value`. `env` supplies context such as the loop step.
std::vector<std::string> candidates(std::string_view transform, std::string_view value,
                                    const Bindings& env);

/// Expands `$param`, `$fn(param)` splices and `{rule(args)}` calls. Nested
/// transforms take their first candidate.
std::string expand(const TemplateRule& rule, const Bindings& bindings, const TemplatePack& pack);

/// Expands a spec-producing metaplan, computing option effects by
/// evaluation. A distractor with no distinct candidate among its first 8 is
/// dropped; GenerationFailed is thrown when every distractor is dropped or
/// the result does not validate. The
/// spec records its provenance (rule, bindings, seed).
spec::ExerciseSpec instantiate_exercise(const TemplateRule& metaplan, const Bindings& bindings,
                                        std::uint64_t seed, std::uint64_t fuel,
                                        const TemplatePack& pack);

}  // namespace exr::tpl
