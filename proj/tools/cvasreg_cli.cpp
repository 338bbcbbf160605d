// Command-line front end. Exit codes: 0 success or yes, 3 no, 1 input
// error, 2 resource cap exhausted, 4 internal invariant violated.

#include <cvasreg/cvasreg.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

using namespace cvasreg;

constexpr int kYes = 0;
constexpr int kInputError = 1;
constexpr int kCap = 2;
constexpr int kNo = 3;
constexpr int kInternal = 4;

struct Options {
  std::string instance;
  std::string word;
  std::string automaton;
  std::string dot;
  bool witness = false;
  bool dump_tree = false;
  bool parallel = false;
  std::size_t max_nodes = 200000;
  long long max_solver_steps = 0;
  int audit_len = -1;
  int h = 0;
  long n = 0;
  std::string action;
};

void print_run(const Cvas& cvas, const Run& run) {
  std::cout << "fractions";
  for (const auto& s : run.steps) std::cout << ' ' << cvas.label(s.letter) << ':' << to_string(s.fraction);
  std::cout << "\n";
}

int cmd_build_nfa(const Options& o) {
  Instance inst;
  try {
    inst = load_instance(o.instance);
  } catch (const std::exception& e) {
    std::cerr << "build-nfa: parse: " << e.what() << "\n";
    return kInputError;
  }
  EngineLimits limits;
  limits.max_nodes = o.max_nodes;
  limits.max_solver_steps = o.max_solver_steps;
  limits.parallel = o.parallel;
  EngineResult res;
  try {
    res = build_nfa(inst.cvas, inst.source, inst.target, limits);
  } catch (const EngineCapExceeded& e) {
    std::cerr << "build-nfa: engine: " << e.what() << "\n";
    std::cout << "partial tree (" << e.partial_tree().nodes.size() << " nodes)\n"
              << dump_tree(e.partial_tree(), inst.cvas);
    return kCap;
  } catch (const std::runtime_error& e) {
    std::cerr << "build-nfa: engine: " << e.what() << "\n";
    return kCap;
  }
  std::string dot = nfa_to_dot(inst.cvas, res.nfa);
  if (o.dot.empty()) {
    std::cout << dot;
  } else {
    std::ofstream out(o.dot);
    if (!out) {
      std::cerr << "build-nfa: output: cannot write '" << o.dot << "'\n";
      return kInputError;
    }
    out << dot;
  }
  std::size_t marked = 0;
  for (const auto& node : res.tree.nodes) marked += node.marked;
  std::cerr << "nfa states " << res.nfa.num_states() << ", edges " << res.nfa.num_edges() << ", tree nodes "
            << res.tree.nodes.size() << ", marked " << marked << ", solver steps " << res.solver_steps << "\n";
  if (o.dump_tree) std::cout << dump_tree(res.tree, inst.cvas);
  if (o.audit_len >= 0) {
    auto rep = audit_tree(res.tree, inst.cvas, inst.source, inst.target, o.audit_len);
    std::cerr << "audit: " << rep.words_checked << " words, " << rep.members << " members, "
              << rep.violations.size() << " violations\n";
    for (const auto& v : rep.violations) std::cerr << "  " << v << "\n";
    if (!rep.ok()) return kInternal;
  }
  return kYes;
}

int cmd_member(const Options& o) {
  Instance inst;
  Word w;
  try {
    inst = load_instance(o.instance);
    w = o.word == "eps" && !inst.cvas.find("eps") ? Word{} : inst.cvas.parse_word(o.word);
  } catch (const std::exception& e) {
    std::cerr << "member: input: " << e.what() << "\n";
    return kInputError;
  }
  SolverBudget budget{o.max_solver_steps, 0};
  std::optional<std::vector<Rational>> fr;
  try {
    fr = member(inst.cvas, w, inst.source, inst.target, &budget);
  } catch (const SolverBudgetExceeded&) {
    std::cerr << "member: solver step cap exceeded\n";
    return kCap;
  }
  if (!fr) {
    std::cout << "non-member\n";
    return kNo;
  }
  std::cout << "member\n";
  if (o.witness) print_run(inst.cvas, make_run(inst.source, w, *fr));
  return kYes;
}

int cmd_intersect(const Options& o) {
  Instance inst;
  Nfa a;
  try {
    inst = load_instance(o.instance);
    a = load_automaton(inst.cvas, o.automaton);
  } catch (const std::exception& e) {
    std::cerr << "intersect: input: " << e.what() << "\n";
    return kInputError;
  }
  SolverBudget budget{o.max_solver_steps, 0};
  IntersectOutcome out;
  try {
    out = regular_intersect_nonempty(inst.cvas, a, inst.source, inst.target, o.witness, &budget);
  } catch (const SolverBudgetExceeded&) {
    std::cerr << "intersect: solver step cap exceeded\n";
    return kCap;
  } catch (const std::runtime_error& e) {
    std::cerr << "intersect: decider: " << e.what() << "\n";
    return kCap;
  }
  if (!out.nonempty) {
    std::cout << "empty\n";
    return kNo;
  }
  std::cout << "non-empty\n";
  if (o.witness) {
    // prefer a shortest witness when one is cheap to find
    Run run = *out.witness;
    try {
      SolverBudget small{200000, 0};
      if (auto shortest = bounded_witness_search(inst.cvas, a, inst.source, inst.target, 8, &small))
        if (shortest->steps.size() <= run.steps.size()) run = *shortest;
    } catch (const SolverBudgetExceeded&) {
    }
    std::cout << "witness " << (run.steps.empty() ? std::string("eps") : inst.cvas.format_word(run.word())) << "\n";
    print_run(inst.cvas, run);
  }
  return kYes;
}

int cmd_lowerbound(const Options& o) {
  if (o.h < 1 || o.n < 1) {
    std::cerr << "lowerbound: input: h and n must be at least 1\n";
    return kInputError;
  }
  try {
    auto inst = generate_lower_bound(o.h);
    auto [x, y] = lower_bound_configs(o.h, o.n);
    if (o.action == "gen") {
      std::cout << format_instance(inst.cvas, x, y);
      return kYes;
    }
    if (o.action == "maxed" || o.action == "exp") {
      Run run = o.action == "maxed" ? maxed_out_run(inst, o.n) : exponential_run(inst, o.n);
      auto cfg = simulate(inst.cvas, run);
      for (std::size_t i = 0; i < run.steps.size(); ++i)
        std::cout << i + 1 << ' ' << inst.cvas.label(run.steps[i].letter) << ' ' << to_string(run.steps[i].fraction)
                  << ' ' << to_string(cfg[i + 1]) << "\n";
      bool ok = cfg.back() == y;
      std::cout << "length " << run.steps.size() << ", " << (ok ? "reaches" : "misses") << " target "
                << to_string(y) << "\n";
      return ok ? kYes : kInternal;
    }
    if (o.action == "brute") {
      SolverBudget budget{o.max_solver_steps, 0};
      auto runs = brute_force_short_runs(inst, o.n, 4096, &budget);
      auto tuple = [](const std::vector<long>& t) {
        std::string s = "(";
        for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
        return s + ")";
      };
      if (runs.size() == 1) {
        std::cout << "unique short run: " << tuple(runs[0]) << "\n";
        return kYes;
      }
      std::cout << runs.size() << " short runs:";
      for (const auto& t : runs) std::cout << ' ' << tuple(t);
      std::cout << "\n";
      return kNo;
    }
    std::cerr << "lowerbound: input: unknown action '" << o.action << "'\n";
    return kInputError;
  } catch (const ScaleCapExceeded& e) {
    std::cerr << "lowerbound: cap: " << e.what() << "\n";
    return kCap;
  } catch (const SolverBudgetExceeded&) {
    std::cerr << "lowerbound: solver step cap exceeded\n";
    return kCap;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regular languages of continuous vector addition systems"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--max-solver-steps", o.max_solver_steps, "simplex pivot cap (0 = unlimited)");
  };

  auto* build = app.add_subcommand("build-nfa", "compute an automaton for the firable words");
  build->add_option("instance", o.instance, "instance file")->required();
  build->add_option("--dot", o.dot, "write the automaton as DOT to this file (default: stdout)");
  build->add_flag("--dump-tree", o.dump_tree, "print the decomposition tree");
  build->add_option("--max-nodes", o.max_nodes, "tree node cap");
  build->add_option("--audit-len", o.audit_len, "audit the tree against all words up to this length");
  build->add_flag("--parallel", o.parallel, "expand each tree level in parallel");
  common(build);

  auto* mem = app.add_subcommand("member", "decide whether a word is firable");
  mem->add_option("instance", o.instance, "instance file")->required();
  mem->add_option("word", o.word, "word (use \"\" or eps for the empty word)")->required();
  mem->add_flag("--witness", o.witness, "print firing fractions");
  common(mem);

  auto* inter = app.add_subcommand("intersect", "decide whether an automaton accepts a firable word");
  inter->add_option("instance", o.instance, "instance file")->required();
  inter->add_option("automaton", o.automaton, "automaton or regex file")->required();
  inter->add_flag("--witness", o.witness, "print a witness word and its fractions");
  common(inter);

  auto* lb = app.add_subcommand("lowerbound", "lower-bound instance family");
  lb->add_option("stages", o.h, "number of stages h")->required();
  lb->add_option("scale", o.n, "base scale n")->required();
  lb->add_option("action", o.action, "gen | maxed | exp | brute")->required();
  common(lb);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }
  try {
    if (*build) return cmd_build_nfa(o);
    if (*mem) return cmd_member(o);
    if (*inter) return cmd_intersect(o);
    if (*lb) return cmd_lowerbound(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "input: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal: " << e.what() << "\n";
    return kInternal;
  }
  return kInputError;
}
