#pragma once

// Simulated students walking plans: layer preferences drive branch choice,
// pattern-conditioned slips drop subplans flagged by the MissingPath lint.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "exr/bloom.hpp"
#include "exr/plan.hpp"

namespace exr::sim {

struct StudentProfile {
  std::string label;
  bloom::Knowledge level = bloom::Knowledge::Procedural;
  std::map<plan::Layer, double> prefer;  // sums to 1
  std::map<std::string, double> slip;    // "P1".."P3" or "generic"
  double temperature = 1.0;

  /// `label: novice; level: Procedural; prefer Eval=0.6 DR=0.3 MDR=0.1;
  /// slip P3=0.2 generic=0.05; temperature: 1.0` (clauses split on `;` or
  /// newlines, `#` comments). Throws ParseError or Error("InvalidProfile").
  static StudentProfile parse(std::string_view text);

  double preference(plan::Layer l) const;
  /// Slip for a set of detected patterns: the largest configured pattern
  /// slip, else `generic`, else 0. No patterns means no slip.
  double slip_for(const std::vector<plan::Pattern>& patterns) const;
};

struct BranchStats {
  std::vector<std::string> branches;  // rendered branch plans
  std::vector<double> probabilities;
  std::vector<std::size_t> counts;
};

struct SimOutcome {
  std::size_t trials = 0;
  std::size_t solved = 0;  // trials without any miss
  std::map<std::string, std::size_t> misses;     // site -> trials missing it
  std::map<std::string, BranchStats> branches;   // choice site -> stats
};

/// Site key used in SimOutcome maps: "<rendered plan>@<line>:<column>".
std::string site_key(const plan::PlanPtr& p);

/// Softmax over -cost/T where cost sums atom scores weighted by
/// (1 - preference of the atom's layer). `choice` must be a Choice node;
/// nested choices on the same level are flattened into one site.
BranchStats choice_probabilities(const plan::PlanDoc& doc, const plan::PlanPtr& choice,
                                 const StudentProfile& profile, const plan::VerbMap& verbs,
                                 const plan::Weights& w);

/// Deterministic given `seed`; trial i draws from a stream derived from
/// (seed, i). Throws Error("PathExplosion") when a flagged site has too many
/// paths to detect patterns.
SimOutcome simulate(const plan::PlanDoc& doc, const StudentProfile& profile,
                    const plan::VerbMap& verbs, const plan::Weights& w, std::uint64_t seed,
                    std::size_t trials);

}  // namespace exr::sim
