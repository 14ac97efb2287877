#include "exr/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "exr/bloom.hpp"
#include "exr/defaults.hpp"
#include "exr/minilang.hpp"
#include "exr/plan.hpp"
#include "exr/rewrite.hpp"
#include "exr/sim.hpp"
#include "exr/spec.hpp"
#include "exr/templates.hpp"
#include "report.hpp"

namespace exr::cli {

namespace {

using report::Json;

constexpr int kExitParse = 3;

int exit_code(const std::vector<Finding>& fs) {
  if (fs.empty()) return 0;
  switch (max_severity(fs)) {
    case Severity::Error: return 2;
    case Severity::Warning: return 1;
    case Severity::Info: return 0;
  }
  return 0;
}

struct Options {
  bool json = false;
  std::string clues, verb_map, weights;
  std::uint64_t fuel = 10000;
};

// A failure that aborts one input with exit code 3.
struct Fatal {
  std::string code;
  std::string message;
  SourcePos pos;
};

std::string load(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::exception& e) {
    throw Fatal{"IOError", e.what(), {}};
  }
}

// A named builtin or a file path.
std::string load_named(const std::string& name, std::optional<std::string_view> builtin) {
  if (builtin) return std::string(*builtin);
  return load(name);
}

class Context {
 public:
  Context(const Options& o, std::ostream& out, std::ostream& err) : opt(o), out(out), err(err) {}

  const Options& opt;
  std::ostream& out;
  std::ostream& err;

  const bloom::ClueTable& clues() {
    if (!clues_)
      clues_ = bloom::ClueTable::parse(opt.clues.empty() ? std::string(defaults::clues())
                                                         : load(opt.clues));
    return *clues_;
  }
  const plan::VerbMap& verbs() {
    if (!verbs_)
      verbs_ = plan::VerbMap::parse(opt.verb_map.empty() ? std::string(defaults::verb_map())
                                                         : load(opt.verb_map));
    return *verbs_;
  }
  const plan::Weights& weights() {
    if (!weights_)
      weights_ = plan::Weights::parse(opt.weights.empty() ? std::string(defaults::weights())
                                                          : load(opt.weights));
    return *weights_;
  }

  // Emits one report (JSON) or the human rendering; returns the exit code.
  int emit(const std::string& input, std::vector<Finding> findings, Json payload,
           const std::function<void()>& human) {
    sort_findings(findings);
    if (opt.json) {
      out << report::envelope(input, findings, std::move(payload)).dump(2) << "\n";
    } else {
      print_findings(input, findings);
      if (human) human();
    }
    return exit_code(findings);
  }

  int fatal(const std::string& input, const Fatal& f) {
    const Finding fd{Severity::Error, f.code, f.message, f.pos};
    if (opt.json) {
      out << report::envelope(input, {fd}, nullptr).dump(2) << "\n";
    } else {
      err << input << ":" << to_string(f.pos) << ": error: " << f.code << ": " << f.message
          << "\n";
    }
    return kExitParse;
  }

  void print_findings(const std::string& input, const std::vector<Finding>& fs) {
    for (const auto& f : fs)
      out << input << ":" << to_string(f.pos) << ": " << to_lower(to_string(f.severity)) << ": "
          << f.code << ": " << f.message << "\n";
  }

 private:
  std::optional<bloom::ClueTable> clues_;
  std::optional<plan::VerbMap> verbs_;
  std::optional<plan::Weights> weights_;
};

Fatal from(const Error& e) { return Fatal{e.code(), e.what(), e.pos()}; }

// ---------------------------------------------------------------------------

int cmd_eval(Context& cx, const std::string& path, bool want_trace) {
  try {
    const auto src = load(path);
    const auto prog = lang::parse_program(src);
    const auto eff = lang::evaluate(prog, cx.opt.fuel);
    std::vector<Finding> fs;
    if (eff.status == lang::Status::RuntimeError)
      fs.push_back({Severity::Error, "RuntimeError", eff.status_string(),
                    eff.error_pos.value_or(SourcePos{})});
    else if (eff.status == lang::Status::FuelExhausted)
      fs.push_back({Severity::Warning, "FuelExhausted",
                    "stopped after " + std::to_string(eff.steps) + " steps", {}});
    Json payload = report::to_json(eff);
    std::vector<lang::Snapshot> snaps;
    if (want_trace) {
      snaps = lang::trace(prog, cx.opt.fuel);
      Json t = Json::array();
      for (const auto& s : snaps) {
        Json env = Json::object();
        for (const auto& [k, v] : s.environment) env[k] = report::to_json(v);
        t.push_back({{"position", report::to_json(s.pos)},
                     {"kind", s.kind},
                     {"environment", env},
                     {"output", s.output}});
      }
      payload["trace"] = t;
    }
    return cx.emit(path, fs, payload, [&] {
      for (const auto& s : snaps) {
        cx.out << "  " << to_string(s.pos) << " " << s.kind;
        for (const auto& [k, v] : s.environment) cx.out << " " << k << "=" << lang::to_string(v);
        cx.out << "\n";
      }
      cx.out << eff.stdout_text;
      if (!eff.stdout_text.empty() && eff.stdout_text.back() != '\n') cx.out << "\n";
      cx.out << "status: " << eff.status_string() << ", steps: " << eff.steps << "\n";
      for (const auto& [k, v] : eff.bindings) cx.out << k << " = " << lang::to_string(v) << "\n";
    });
  } catch (const Fatal& f) {
    return cx.fatal(path, f);
  } catch (const Error& e) {
    return cx.fatal(path, from(e));
  }
}

// ---------------------------------------------------------------------------

int check_one(Context& cx, const std::string& path, Json* collect) {
  try {
    const auto src = load(path);
    const auto s = spec::parse_spec(src);
    std::vector<Finding> fs = s.warnings;
    const auto val = spec::validate_spec(s, cx.opt.fuel);
    fs.insert(fs.end(), val.findings.begin(), val.findings.end());
    const auto cons = spec::consistency_check(s, cx.verbs(), cx.weights());
    fs.insert(fs.end(), cons.findings.begin(), cons.findings.end());

    Json payload{{"id", s.id},
                 {"mode", s.mode == spec::Mode::Mcq ? "mcq" : "free-value"},
                 {"target", bloom::to_string(s.target())},
                 {"validation", report::to_json(val)},
                 {"complexity", cons.report ? report::to_json(*cons.report) : Json()}};
    sort_findings(fs);
    if (collect) {
      collect->push_back(report::envelope(path, fs, payload));
      return exit_code(fs);
    }
    return cx.emit(path, fs, payload, [&] {
      cx.out << path << ": exercise \"" << s.id << "\", target " << bloom::to_string(s.target())
             << "\n";
      for (const auto& o : val.options)
        cx.out << "  option " << o.key << (o.correct ? " *" : "  ") << " "
               << spec::to_string(o.verdict) << (o.detail.empty() ? "" : " (" + o.detail + ")")
               << "\n";
      for (const auto& a : val.answers)
        cx.out << "  answer " << a.facet << ": " << spec::to_string(a.verdict) << "\n";
      if (cons.report) {
        const auto& r = *cons.report;
        cx.out << "  plan: " << bloom::to_string(r.cell_min_path) << " .. "
               << bloom::to_string(r.cell_max_path) << ", effort " << r.effort_min << " .. "
               << r.effort_max << "\n";
        for (auto p : r.patterns) cx.out << "  pattern " << plan::describe(p) << "\n";
      }
    });
  } catch (const Fatal& f) {
    if (collect) {
      collect->push_back(report::envelope(path, {{Severity::Error, f.code, f.message, f.pos}}, nullptr));
      return kExitParse;
    }
    return cx.fatal(path, f);
  } catch (const Error& e) {
    if (collect) {
      collect->push_back(
          report::envelope(path, {{Severity::Error, e.code(), e.what(), e.pos()}}, nullptr));
      return kExitParse;
    }
    return cx.fatal(path, from(e));
  }
}

int cmd_check(Context& cx, const std::vector<std::string>& files) {
  if (files.size() == 1) return check_one(cx, files.front(), nullptr);
  int code = 0;
  if (cx.opt.json) {
    Json all = Json::array();
    for (const auto& f : files) code = std::max(code, check_one(cx, f, &all));
    cx.out << all.dump(2) << "\n";
    return code;
  }
  for (const auto& f : files) code = std::max(code, check_one(cx, f, nullptr));
  return code;
}

// ---------------------------------------------------------------------------

int cmd_gen(Context& cx, const std::string& pack_name, const std::string& rule,
            const std::vector<std::string>& binds, std::uint64_t seed, const std::string& out_path) {
  try {
    const auto pack = tpl::TemplatePack::parse(load_named(pack_name, defaults::template_pack(pack_name)));
    tpl::Bindings b;
    for (const auto& kv : binds) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Fatal{"BadBinding", "expected k=v, got '" + kv + "'", {}};
      b[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    const auto& r = pack.at(rule);
    std::string text;
    Json payload{{"rule", rule}, {"produces", std::string(tpl::to_string(r.produces))}};
    std::vector<Finding> fs;
    try {
      if (r.produces == tpl::Produces::Spec) {
        const auto s = tpl::instantiate_exercise(r, b, seed, cx.opt.fuel, pack);
        text = spec::render(s);
      } else {
        text = tpl::expand(r, b, pack) + "\n";
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fs.push_back({Severity::Error, e.code(), e.what(), e.pos()});
    }
    payload["text"] = fs.empty() ? Json(text) : Json();
    if (fs.empty() && !out_path.empty()) {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw Fatal{"IOError", "cannot write " + out_path, {}};
      f << text;
      payload["output"] = out_path;
    }
    return cx.emit(pack_name, fs, payload, [&] {
      if (fs.empty() && out_path.empty()) cx.out << text;
      else if (fs.empty()) cx.out << "wrote " << out_path << "\n";
    });
  } catch (const Fatal& f) {
    return cx.fatal(pack_name, f);
  } catch (const Error& e) {
    return cx.fatal(pack_name, from(e));
  }
}

// ---------------------------------------------------------------------------

int cmd_classify(Context& cx, const std::string& statement, const std::string& grouping,
                 const std::string& student) {
  try {
    const auto& clues = cx.clues();
    std::vector<Finding> fs;
    Json payload = Json::object();
    bloom::Statement st;
    try {
      st = bloom::normalize_statement(statement, clues);
    } catch (const Error& e) {
      fs.push_back({Severity::Error, e.code(), e.what(), {}});
      return cx.emit("<statement>", fs, nullptr, nullptr);
    }
    Json np = Json::array();
    for (const auto& n : st.np) np.push_back(n);
    payload["normalized"] = {{"verb", st.verb}, {"np", np}};
    const auto c = bloom::classify(st, clues);
    std::optional<bloom::Cell> dyn;
    std::optional<std::string> group_p, group_k;
    if (!c.cell) {
      fs.push_back({Severity::Warning, "Unclassified",
                    "no clue for the " + c.missing_side() + " of '" + statement + "'", {}});
      payload["cell"] = nullptr;
      payload["missing"] = c.missing_side();
    } else {
      payload["cell"] = bloom::to_string(*c.cell);
      payload["course_level"] = std::string(bloom::to_string(bloom::course_level(*c.cell)));
      if (!student.empty()) {
        auto k = bloom::parse_knowledge(student);
        if (!k) throw Fatal{"BadArgument", "unknown knowledge level '" + student + "'", {}};
        dyn = bloom::dynamic_cell(*c.cell, *k);
        payload["dynamic_cell"] = bloom::to_string(*dyn);
      }
      if (!grouping.empty()) {
        const auto g = bloom::Grouping::parse(load_named(grouping, defaults::grouping(grouping)));
        group_p = g.group(c.cell->process);
        group_k = g.group(c.cell->knowledge);
        payload["grouping"] = {{"process", group_p ? Json(*group_p) : Json()},
                               {"knowledge", group_k ? Json(*group_k) : Json()}};
      }
    }
    return cx.emit("<statement>", fs, payload, [&] {
      cx.out << "normalized: " << st.verb;
      for (const auto& n : st.np) cx.out << " " << n;
      cx.out << "\n";
      if (c.cell) {
        cx.out << "cell: " << bloom::to_string(*c.cell) << "\n";
        cx.out << "course level: " << bloom::to_string(bloom::course_level(*c.cell)) << "\n";
        if (dyn) cx.out << "dynamic cell: " << bloom::to_string(*dyn) << "\n";
        if (group_p || group_k)
          cx.out << "grouping: " << group_p.value_or("-") << " / " << group_k.value_or("-") << "\n";
      }
    });
  } catch (const Fatal& f) {
    return cx.fatal("<statement>", f);
  } catch (const Error& e) {
    return cx.fatal("<statement>", from(e));
  }
}

// ---------------------------------------------------------------------------

int cmd_diagnose(Context& cx, const std::string& pack_name, const std::string& task_text,
                 const std::string& answer_text, int max_steps, int max_depth) {
  try {
    const auto pack = rw::RulePack::parse(load_named(pack_name, defaults::rule_pack(pack_name)));
    const auto task = rw::parse_term(task_text);
    std::vector<Finding> fs;
    if (answer_text.empty()) {
      const auto g = rw::build_solution_graph(task, pack, max_depth);
      if (!g.solution())
        fs.push_back({Severity::Warning, "Unsolved", "no expert solution for the task", {}});
      if (g.depth_exceeded)
        fs.push_back({Severity::Warning, "DepthExceeded", "solution graph hit the depth bound", {}});
      return cx.emit(task_text, fs, report::to_json(g), [&] {
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
          const auto& n = g.nodes[i];
          cx.out << std::string(static_cast<std::size_t>(n.depth) * 2, ' ') << "[" << i << "] "
                 << rw::to_string(n.task);
          if (n.result) cx.out << "  =>  " << rw::to_string(*n.result);
          cx.out << "\n";
        }
        for (const auto& e : g.edges) {
          cx.out << "  " << e.parent << " --" << e.rule << "--> ";
          for (auto c : e.children) cx.out << c << " ";
          cx.out << "\n";
        }
        if (g.solution()) cx.out << "solution: " << rw::to_string(*g.solution()) << "\n";
      });
    }
    const auto answer = rw::parse_term(answer_text);
    rw::DiagnoseOptions o;
    o.max_steps = max_steps;
    std::vector<rw::Explanation> paths;
    try {
      paths = rw::diagnose(task, answer, pack, o);
    } catch (const Error& e) {
      if (e.code() != "NoExplanation") throw;
      fs.push_back({Severity::Warning, "NoExplanation", e.what(), {}});
    }
    Json arr = Json::array();
    for (const auto& p : paths) arr.push_back(report::to_json(p));
    Json payload{{"task", rw::to_string(rw::normalize(task))},
                 {"answer", rw::to_string(rw::normalize(answer))},
                 {"paths", arr}};
    return cx.emit(task_text, fs, payload, [&] {
      std::size_t shown = 0;
      for (const auto& p : paths) {
        if (shown++ == 5) {
          cx.out << "... " << paths.size() - 5 << " more\n";
          break;
        }
        cx.out << "path (" << p.buggy_steps() << " buggy, " << p.steps.size() << " steps):\n";
        for (const auto& s : p.steps) {
          cx.out << "  " << s.rule << (s.kind == rw::RuleKind::Buggy ? " [buggy]" : "") << " at "
                 << (s.position.empty() ? "root" : s.position) << " -> "
                 << rw::to_string(s.result) << "\n";
        }
      }
    });
  } catch (const Fatal& f) {
    return cx.fatal(task_text, f);
  } catch (const Error& e) {
    return cx.fatal(task_text, from(e));
  }
}

// ---------------------------------------------------------------------------

int cmd_simulate(Context& cx, const std::string& path, const std::string& profile_name,
                 std::size_t trials, std::uint64_t seed) {
  try {
    const auto s = spec::parse_spec(load(path));
    const auto prof =
        sim::StudentProfile::parse(load_named(profile_name, defaults::profile(profile_name)));
    if (!s.plan) throw Fatal{"MissingPlan", "exercise '" + s.id + "' has no plan", {}};
    const auto o = sim::simulate(*s.plan, prof, cx.verbs(), cx.weights(), seed, trials);
    return cx.emit(path, {}, report::to_json(o), [&] {
      cx.out << "profile " << prof.label << ": solved " << o.solved << " / " << o.trials << "\n";
      for (const auto& [k, v] : o.misses) cx.out << "  missed " << k << ": " << v << "\n";
      for (const auto& [k, b] : o.branches) {
        cx.out << "  choice " << k << "\n";
        for (std::size_t i = 0; i < b.branches.size(); ++i)
          cx.out << "    " << std::fixed << std::setprecision(4) << b.probabilities[i] << "  "
                 << b.counts[i] << "  " << b.branches[i] << "\n";
      }
    });
  } catch (const Fatal& f) {
    return cx.fatal(path, f);
  } catch (const Error& e) {
    return cx.fatal(path, from(e));
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exercise representation and analysis toolkit", "exr"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_flag("--json", opt.json, "Emit one JSON report on stdout");
  app.add_option("--clues", opt.clues, "Clue table file");
  app.add_option("--verb-map", opt.verb_map, "Verb to Bloom cell map file");
  app.add_option("--weights", opt.weights, "Plan weights file");
  app.add_option("--fuel", opt.fuel, "Statement budget for evaluation")->check(CLI::PositiveNumber);

  std::function<int(Context&)> action;

  auto* eval = app.add_subcommand("eval", "Evaluate a minilang program");
  std::string eval_file;
  bool trace = false;
  eval->add_option("file", eval_file, "Program file")->required();
  eval->add_flag("--trace", trace, "Include per-statement snapshots");
  eval->callback([&] { action = [&](Context& cx) { return cmd_eval(cx, eval_file, trace); }; });

  auto* check = app.add_subcommand("check", "Validate exercise specs and type their plans");
  std::vector<std::string> check_files;
  check->add_option("files", check_files, "Spec files (.exr)")->required();
  check->callback([&] { action = [&](Context& cx) { return cmd_check(cx, check_files); }; });

  auto* gen = app.add_subcommand("gen", "Expand a template rule");
  std::string gen_pack, gen_rule, gen_out;
  std::vector<std::string> gen_binds;
  std::uint64_t gen_seed = 1;
  gen->add_option("pack", gen_pack, "Template pack file or builtin name (cs1)")->required();
  gen->add_option("--rule", gen_rule, "Rule to expand")->required();
  gen->add_option("--bind", gen_binds, "Parameter binding k=v")->expected(0, -1);
  gen->add_option("--seed", gen_seed, "Seed for option order");
  gen->add_option("-o,--output", gen_out, "Write the result here");
  gen->callback([&] {
    action = [&](Context& cx) { return cmd_gen(cx, gen_pack, gen_rule, gen_binds, gen_seed, gen_out); };
  });

  auto* classify = app.add_subcommand("classify", "Classify a learning objective");
  std::string statement, grouping, student;
  classify->add_option("statement", statement, "Objective sentence")->required();
  classify->add_option("--grouping", grouping, "Grouping file or builtin (lister, barnes)");
  classify->add_option("--student", student, "Student knowledge level for the dynamic cell");
  classify->callback([&] {
    action = [&](Context& cx) { return cmd_classify(cx, statement, grouping, student); };
  });

  auto* diag = app.add_subcommand("diagnose", "Solve a task or explain an answer");
  std::string diag_pack, diag_task, diag_answer;
  int max_steps = 6, max_depth = 12;
  diag->add_option("--pack", diag_pack, "Rule pack file or builtin (differentiation, linear)")
      ->required();
  std::string diag_task_pos, diag_answer_pos;
  diag->add_option("--task", diag_task, "Task term");
  diag->add_option("--answer", diag_answer, "Student answer; omit to print the solution graph");
  diag->add_option("task_term", diag_task_pos, "Task term (positional form)");
  diag->add_option("answer_term", diag_answer_pos, "Student answer (positional form)");
  diag->add_option("--max-steps", max_steps, "Bound on explanation length")
      ->check(CLI::PositiveNumber);
  diag->add_option("--max-depth", max_depth, "Bound on solution graph depth")
      ->check(CLI::PositiveNumber);
  diag->callback([&] {
    if (diag_task.empty()) diag_task = diag_task_pos;
    if (diag_answer.empty()) diag_answer = diag_answer_pos;
    if (diag_task.empty()) throw CLI::ValidationError("diagnose", "a task term is required");
    action = [&](Context& cx) {
      return cmd_diagnose(cx, diag_pack, diag_task, diag_answer, max_steps, max_depth);
    };
  });

  auto* simc = app.add_subcommand("simulate", "Walk an exercise plan with a student profile");
  std::string sim_file, sim_profile;
  std::size_t trials = 1000;
  std::uint64_t sim_seed = 1;
  simc->add_option("file", sim_file, "Spec file (.exr)")->required();
  simc->add_option("--profile", sim_profile, "Profile file or builtin (novice, expert)")->required();
  simc->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  simc->add_option("--seed", sim_seed, "Seed");
  simc->callback([&] {
    action = [&](Context& cx) { return cmd_simulate(cx, sim_file, sim_profile, trials, sim_seed); };
  });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "exr: " << e.what() << "\n" << app.help();
    return kExitParse;
  }
  if (!action) {
    err << app.help();
    return kExitParse;
  }
  Context cx(opt, out, err);
  try {
    return action(cx);
  } catch (const Fatal& f) {
    return cx.fatal("<config>", f);
  } catch (const Error& e) {
    return cx.fatal("<config>", from(e));
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace exr::cli
