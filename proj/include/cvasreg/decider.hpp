#ifndef CVASREG_DECIDER_HPP
#define CVASREG_DECIDER_HPP

#include <cvasreg/automata.hpp>
#include <cvasreg/cvas.hpp>
#include <cvasreg/linear.hpp>
#include <cvasreg/scheme.hpp>

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cvasreg {

class WitnessSearchExhausted : public std::runtime_error {
 public:
  explicit WitnessSearchExhausted(const std::string& what) : std::runtime_error(what) {}
};

// A run of an automaton-controlled system splits into blocks joined by
// single bridge edges. Inside a block the used edges form a strongly
// connected set containing its entry and exit states (or the block is a
// single state with no edges); bridges are fired exactly once.
struct Block {
  int entry;
  int exit;
  std::vector<int> edges;  // candidate edge ids with both ends in the block
};

struct BlockChain {
  std::vector<Block> blocks;
  std::vector<int> bridges;  // bridges[i] joins blocks[i] to blocks[i+1]
};

struct IntersectOutcome {
  bool nonempty = false;
  std::optional<Run> witness;
};

namespace detail {

struct Affine {
  std::map<int, Rational> terms;
  Rational constant;

  bool is_constant() const { return terms.empty(); }

  void add(int var, const Rational& c) {
    if (sgn(c) == 0) return;
    auto& slot = terms[var];
    slot += c;
    if (sgn(slot) == 0) terms.erase(var);
  }

  std::vector<LinearTerm> linear() const {
    std::vector<LinearTerm> out;
    for (const auto& [v, c] : terms) out.push_back({v, c});
    return out;
  }

  Rational eval(const std::vector<Rational>& point) const {
    Rational r = constant;
    for (const auto& [v, c] : terms) r += c * point[v];
    return r;
  }
};

// The linear program of one block chain: edge totals per block, one fraction
// per bridge, and the boundary configurations as affine expressions.
struct ChainProgram {
  LinearSystem sys{0};
  std::vector<std::vector<int>> edge_var;  // per block, parallel to Block::edges
  std::vector<int> bridge_var;
  std::vector<std::vector<Affine>> z_in, z_out;
  bool trivially_infeasible = false;
};

inline ChainProgram build_chain_program(const Cvas& cvas, const Nfa& nfa, const BlockChain& chain,
                                        const std::vector<std::vector<bool>>& forbidden, const Configuration& x,
                                        const Configuration& y) {
  const int d = cvas.dimension();
  ChainProgram prog;
  std::vector<Affine> z(d);
  for (int c = 0; c < d; ++c) z[c].constant = x[c];
  std::set<std::pair<std::map<int, Rational>, Rational>> stated;
  auto nonneg = [&](const std::vector<Affine>& cfg) {
    for (const auto& a : cfg) {
      if (a.is_constant()) {
        if (sgn(a.constant) < 0) prog.trivially_infeasible = true;
      } else if (stated.insert({a.terms, a.constant}).second) {
        prog.sys.add_constraint(a.linear(), Relation::GreaterEq, -a.constant);
      }
    }
  };
  for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
    const auto& blk = chain.blocks[b];
    prog.z_in.push_back(z);
    std::vector<int> vars;
    for (std::size_t i = 0; i < blk.edges.size(); ++i) {
      if (forbidden[b][i]) {
        vars.push_back(-1);
        continue;
      }
      int v = prog.sys.add_variable(true);
      vars.push_back(v);
      const auto& eff = cvas.effect(nfa.edge(blk.edges[i]).letter);
      for (int c = 0; c < d; ++c) z[c].add(v, Rational(eff[c]));
    }
    prog.edge_var.push_back(vars);
    prog.z_out.push_back(z);
    nonneg(prog.z_in.back());
    nonneg(prog.z_out.back());
    if (b + 1 < chain.blocks.size()) {
      if (chain.bridges[b] < 0) {
        prog.bridge_var.push_back(-1);
        continue;
      }
      int v = prog.sys.add_variable(true);
      prog.bridge_var.push_back(v);
      prog.sys.add_constraint({{v, Rational(1)}}, Relation::LessEq, Rational(1));
      const auto& eff = cvas.effect(nfa.edge(chain.bridges[b]).letter);
      for (int c = 0; c < d; ++c) z[c].add(v, Rational(eff[c]));
    }
  }
  for (int c = 0; c < d; ++c) {
    if (z[c].is_constant()) {
      if (z[c].constant != y[c]) prog.trivially_infeasible = true;
    } else {
      prog.sys.add_constraint(z[c].linear(), Relation::Equal, y[c] - z[c].constant);
    }
  }
  return prog;
}

// A feasible point in which every listed quantity that can be positive is
// positive. The feasible set is scaled by a free factor lambda >= 1, so a
// single program with capped indicators t <= min(1, quantity) reaches the
// largest support.
inline std::optional<std::vector<Rational>> max_support_point(const LinearSystem& base,
                                                              const std::vector<Affine>& quantities,
                                                              SolverBudget* budget) {
  const int n = base.num_variables();
  LinearSystem lp(0);
  for (int v = 0; v < n; ++v) lp.add_variable(base.is_nonneg(v));
  const int lambda = lp.add_variable(true);
  lp.add_constraint({{lambda, Rational(1)}}, Relation::GreaterEq, Rational(1));
  for (const auto& c : base.constraints()) {
    auto terms = c.terms;
    if (sgn(c.rhs) != 0) terms.push_back({lambda, -c.rhs});
    lp.add_constraint(std::move(terms), c.rel, Rational(0));
  }
  std::vector<LinearTerm> objective;
  std::set<std::pair<std::map<int, Rational>, Rational>> seen;
  for (const auto& q : quantities) {
    if (q.is_constant() || !seen.insert({q.terms, q.constant}).second) continue;
    int t = lp.add_variable(true);
    lp.add_constraint({{t, Rational(1)}}, Relation::LessEq, Rational(1));
    auto terms = q.linear();
    if (sgn(q.constant) != 0) terms.push_back({lambda, q.constant});
    terms.push_back({t, Rational(-1)});
    lp.add_constraint(std::move(terms), Relation::GreaterEq, Rational(0));
    objective.push_back({t, Rational(1)});
  }
  auto out = maximize(lp, objective, budget);
  if (out.status == LpStatus::Infeasible) return std::nullopt;
  std::vector<Rational> point(out.point.begin(), out.point.begin() + n);
  for (auto& v : point) v /= out.point[lambda];
  return point;
}

// Edges of `used` that can be fired, in some order, starting at `start`
// with positive counters `positive`. `reverse` walks edges backwards with
// negated effects.
inline std::vector<bool> saturate(const Cvas& cvas, const Nfa& nfa, const std::vector<int>& used, int start,
                                  std::uint64_t positive, bool reverse) {
  std::vector<bool> enabled(used.size(), false);
  std::vector<int> reached{start};
  auto is_reached = [&](int s) { return std::find(reached.begin(), reached.end(), s) != reached.end(); };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (enabled[i]) continue;
      const auto& e = nfa.edge(used[i]);
      const auto& eff = cvas.effect(e.letter);
      int from = reverse ? e.dst : e.src, to = reverse ? e.src : e.dst;
      std::uint64_t need = reverse ? increment_mask(eff) : decrement_mask(eff);
      std::uint64_t gives = reverse ? decrement_mask(eff) : increment_mask(eff);
      if (!is_reached(from) || (need & ~positive)) continue;
      enabled[i] = true;
      changed = true;
      positive |= gives;
      if (!is_reached(to)) reached.push_back(to);
    }
  }
  return enabled;
}

// States reachable from s and co-reachable to s using only `used` edges.
inline std::vector<int> component_of(const Nfa& nfa, const std::vector<int>& used, int s) {
  auto closure = [&](bool forward) {
    std::vector<int> seen{s};
    for (std::size_t i = 0; i < seen.size(); ++i)
      for (int e : used) {
        const auto& ed = nfa.edge(e);
        int from = forward ? ed.src : ed.dst, to = forward ? ed.dst : ed.src;
        if (from == seen[i] && std::find(seen.begin(), seen.end(), to) == seen.end()) seen.push_back(to);
      }
    return seen;
  };
  auto f = closure(true), b = closure(false);
  std::vector<int> out;
  for (int q : f)
    if (std::find(b.begin(), b.end(), q) != b.end()) out.push_back(q);
  return out;
}

struct ChainSolution {
  std::vector<Rational> point;
  ChainProgram program;
  std::vector<std::vector<int>> used;  // edges with positive total, per block
};

// Greatest-fixpoint refinement: drop edges that cannot be enabled forwards
// from the block's entry configuration or backwards from its exit
// configuration, or that fall outside the entry's strongly connected part,
// and re-solve until stable.
inline std::optional<ChainSolution> solve_chain(const Cvas& cvas, const Nfa& nfa, const BlockChain& chain,
                                                const Configuration& x, const Configuration& y,
                                                SolverBudget* budget) {
  const int d = cvas.dimension();
  std::vector<std::vector<bool>> forbidden;
  for (const auto& b : chain.blocks) forbidden.emplace_back(b.edges.size(), false);
  for (;;) {
    ChainProgram prog = build_chain_program(cvas, nfa, chain, forbidden, x, y);
    if (prog.trivially_infeasible) return std::nullopt;
    std::vector<Affine> quantities;
    for (const auto& vars : prog.edge_var)
      for (int v : vars)
        if (v >= 0) quantities.push_back(Affine{{{v, Rational(1)}}, Rational(0)});
    for (int v : prog.bridge_var)
      if (v >= 0) quantities.push_back(Affine{{{v, Rational(1)}}, Rational(0)});
    for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
      bool open = false;
      for (int v : prog.edge_var[b]) open = open || v >= 0;
      if (!open) continue;
      for (int c = 0; c < d; ++c) {
        quantities.push_back(prog.z_in[b][c]);
        quantities.push_back(prog.z_out[b][c]);
      }
    }
    auto point = max_support_point(prog.sys, quantities, budget);
    if (!point) return std::nullopt;
    for (int v : prog.bridge_var)
      if (v >= 0 && sgn((*point)[v]) <= 0) return std::nullopt;
    bool stable = true;
    std::vector<std::vector<int>> used_all;
    for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
      const auto& blk = chain.blocks[b];
      std::vector<int> used, idx;
      for (std::size_t i = 0; i < blk.edges.size(); ++i) {
        int v = prog.edge_var[b][i];
        if (v >= 0 && sgn((*point)[v]) > 0) {
          used.push_back(blk.edges[i]);
          idx.push_back(static_cast<int>(i));
        }
      }
      std::uint64_t pin = 0, pout = 0;
      for (int c = 0; c < d; ++c) {
        if (sgn(prog.z_in[b][c].eval(*point)) > 0) pin |= std::uint64_t(1) << c;
        if (sgn(prog.z_out[b][c].eval(*point)) > 0) pout |= std::uint64_t(1) << c;
      }
      std::vector<int> keep = used, keep_idx = idx;
      for (;;) {
        auto fwd = saturate(cvas, nfa, keep, blk.entry, pin, false);
        auto bwd = saturate(cvas, nfa, keep, blk.exit, pout, true);
        std::vector<int> next, next_idx;
        for (std::size_t i = 0; i < keep.size(); ++i)
          if (fwd[i] && bwd[i]) {
            next.push_back(keep[i]);
            next_idx.push_back(keep_idx[i]);
          }
        auto comp = component_of(nfa, next, blk.entry);
        std::vector<int> inside, inside_idx;
        for (std::size_t i = 0; i < next.size(); ++i) {
          const auto& e = nfa.edge(next[i]);
          if (std::find(comp.begin(), comp.end(), e.src) != comp.end() &&
              std::find(comp.begin(), comp.end(), e.dst) != comp.end()) {
            inside.push_back(next[i]);
            inside_idx.push_back(next_idx[i]);
          }
        }
        bool same = inside.size() == keep.size();
        keep = std::move(inside);
        keep_idx = std::move(inside_idx);
        if (same) break;
      }
      if (blk.entry != blk.exit) {
        auto comp = component_of(nfa, keep, blk.entry);
        if (std::find(comp.begin(), comp.end(), blk.exit) == comp.end()) return std::nullopt;
      }
      if (keep.size() != used.size()) {
        stable = false;
        std::vector<bool> still(blk.edges.size(), false);
        for (int i : keep_idx) still[i] = true;
        for (int i : idx)
          if (!still[i]) forbidden[b][i] = true;
      }
      used_all.push_back(std::move(keep));
    }
    if (stable) return ChainSolution{std::move(*point), std::move(prog), std::move(used_all)};
  }
}

// Strongly connected component id of every state (Tarjan).
inline std::vector<int> scc_ids(const Nfa& nfa) {
  const int n = nfa.num_states();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on(n, false);
  int counter = 0, comps = 0;
  std::function<void(int)> dfs = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (int e : nfa.out_edges(v)) {
      int w = nfa.edge(e).dst;
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp[w] = comps;
        if (w == v) break;
      }
      ++comps;
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) dfs(v);
  return comp;
}

inline bool strongly_connected_subset(const Nfa& nfa, const std::vector<int>& states) {
  if (states.size() <= 1) return true;
  std::vector<int> edges;
  for (int s : states)
    for (int e : nfa.out_edges(s))
      if (std::find(states.begin(), states.end(), nfa.edge(e).dst) != states.end()) edges.push_back(e);
  return component_of(nfa, edges, states[0]).size() == states.size();
}

// ---------------------------------------------------------------------------
// turning a feasible chain into a concrete run

// Shortest path from `from` to `to` over the given edges (edge ids).
inline std::optional<std::vector<int>> shortest_path(const Nfa& nfa, const std::vector<int>& edges, int from, int to) {
  std::map<int, int> via;
  std::deque<int> q{from};
  via[from] = -1;
  while (!q.empty()) {
    int s = q.front();
    q.pop_front();
    if (s == to) break;
    for (int e : edges)
      if (nfa.edge(e).src == s && !via.count(nfa.edge(e).dst)) {
        via[nfa.edge(e).dst] = e;
        q.push_back(nfa.edge(e).dst);
      }
  }
  if (!via.count(to)) return std::nullopt;
  std::vector<int> path;
  for (int s = to; s != from;) {
    int e = via[s];
    path.push_back(e);
    s = nfa.edge(e).src;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Fires every used edge once in an order that keeps each firing enabled,
// walking between sources over already enabled edges. Returns the edge
// sequence and the state where it ends.
inline std::pair<std::vector<int>, int> enabling_walk(const Cvas& cvas, const Nfa& nfa, const std::vector<int>& used,
                                                      int start, std::uint64_t positive, bool reverse) {
  std::vector<int> walk;
  std::vector<bool> fired(used.size(), false);
  int cur = start;
  auto need = [&](int e) {
    const auto& eff = cvas.effect(nfa.edge(e).letter);
    return reverse ? increment_mask(eff) : decrement_mask(eff);
  };
  auto gives = [&](int e) {
    const auto& eff = cvas.effect(nfa.edge(e).letter);
    return reverse ? decrement_mask(eff) : increment_mask(eff);
  };
  const Nfa& graph = nfa;
  for (std::size_t done = 0; done < used.size();) {
    std::vector<int> enabled;
    for (int e : used)
      if (!(need(e) & ~positive)) enabled.push_back(e);
    bool progress = false;
    for (std::size_t i = 0; i < used.size() && !progress; ++i) {
      if (fired[i] || (need(used[i]) & ~positive)) continue;
      int src = reverse ? graph.edge(used[i]).dst : graph.edge(used[i]).src;
      // search a path cur -> src over enabled edges in walking direction
      std::map<int, int> via;
      std::deque<int> q{cur};
      via[cur] = -1;
      while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        for (int e : enabled) {
          int from = reverse ? graph.edge(e).dst : graph.edge(e).src;
          int to = reverse ? graph.edge(e).src : graph.edge(e).dst;
          if (from == s && !via.count(to)) {
            via[to] = e;
            q.push_back(to);
          }
        }
      }
      if (!via.count(src)) continue;
      std::vector<int> path;
      for (int s = src; s != cur;) {
        int e = via[s];
        path.push_back(e);
        s = reverse ? graph.edge(e).dst : graph.edge(e).src;
      }
      std::reverse(path.begin(), path.end());
      path.push_back(used[i]);
      for (int e : path) {
        walk.push_back(e);
        positive |= gives(e);
        for (std::size_t j = 0; j < used.size(); ++j)
          if (used[j] == e && !fired[j]) {
            fired[j] = true;
            ++done;
          }
      }
      cur = reverse ? graph.edge(used[i]).src : graph.edge(used[i]).dst;
      progress = true;
    }
    if (!progress) throw std::logic_error("enabling walk got stuck");
  }
  return {walk, cur};
}

inline Word letters_of_edges(const Nfa& nfa, const std::vector<int>& edges) {
  Word w;
  for (int e : edges) w.push_back(nfa.edge(e).letter);
  return w;
}

// A concrete run through one block from zin to zout: enabling walk, N
// rounds of a covering cycle, a connecting path, and the mirrored enabling
// walk; N doubles until the membership program is feasible.
inline Run block_run(const Cvas& cvas, const Nfa& nfa, const Block& blk, const std::vector<int>& used,
                     const Configuration& zin, const Configuration& zout, SolverBudget* budget,
                     int max_rounds = 1024) {
  if (used.empty()) {
    if (zin != zout) throw std::logic_error("empty block with distinct boundary configurations");
    return Run{zin, {}};
  }
  auto [fwd, s1] = enabling_walk(cvas, nfa, used, blk.entry, support_mask(zin), false);
  auto [bwd_rev, s2] = enabling_walk(cvas, nfa, used, blk.exit, support_mask(zout), true);
  std::vector<int> bwd(bwd_rev.rbegin(), bwd_rev.rend());
  std::vector<int> cycle;
  int cur = s1;
  for (int e : used) {
    auto p = shortest_path(nfa, used, cur, nfa.edge(e).src);
    cycle.insert(cycle.end(), p->begin(), p->end());
    cycle.push_back(e);
    cur = nfa.edge(e).dst;
  }
  auto back = shortest_path(nfa, used, cur, s1);
  cycle.insert(cycle.end(), back->begin(), back->end());
  auto link = *shortest_path(nfa, used, s1, s2);
  for (int rounds = 1; rounds <= max_rounds; rounds *= 2) {
    std::vector<int> edges = fwd;
    for (int r = 0; r < rounds; ++r) edges.insert(edges.end(), cycle.begin(), cycle.end());
    edges.insert(edges.end(), link.begin(), link.end());
    edges.insert(edges.end(), bwd.begin(), bwd.end());
    Word w = letters_of_edges(nfa, edges);
    auto fr = member(cvas, w, zin, zout, budget);
    if (fr) return make_run(zin, w, *fr);
  }
  throw WitnessSearchExhausted("no block run within " + std::to_string(max_rounds) + " rounds");
}

inline Run chain_run(const Cvas& cvas, const Nfa& nfa, const BlockChain& chain, const ChainSolution& sol,
                     SolverBudget* budget) {
  const int d = cvas.dimension();
  Run out;
  for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
    Configuration zin(d), zout(d);
    for (int c = 0; c < d; ++c) {
      zin[c] = sol.program.z_in[b][c].eval(sol.point);
      zout[c] = sol.program.z_out[b][c].eval(sol.point);
    }
    if (b == 0) out.start = zin;
    Run part = block_run(cvas, nfa, chain.blocks[b], sol.used[b], zin, zout, budget);
    out.steps.insert(out.steps.end(), part.steps.begin(), part.steps.end());
    if (b + 1 < chain.blocks.size() && chain.bridges[b] >= 0)
      out.steps.push_back({nfa.edge(chain.bridges[b]).letter, sol.point[sol.program.bridge_var[b]]});
  }
  return out;
}

}  // namespace detail

// Decides whether the automaton accepts some word of the language from x to
// y; optionally returns a witnessing run (validated by simulation).
inline IntersectOutcome regular_intersect_nonempty(const Cvas& cvas, const Nfa& input, const Configuration& x,
                                                   const Configuration& y, bool want_witness = false,
                                                   SolverBudget* budget = nullptr, int max_component = 10) {
  if (input.alphabet_size() != cvas.size()) throw std::invalid_argument("automaton alphabet differs from the system");
  if (static_cast<int>(x.size()) != cvas.dimension() || static_cast<int>(y.size()) != cvas.dimension())
    throw std::invalid_argument("configuration has wrong dimension");
  Nfa nfa = trim(input);
  IntersectOutcome result;
  if (nfa.num_states() == 0) return result;
  auto comp = detail::scc_ids(nfa);
  const int n = nfa.num_states();
  std::vector<std::vector<int>> members(n);
  for (int s = 0; s < n; ++s) members[comp[s]].push_back(s);

  std::vector<char> used(n, 0);
  BlockChain chain;
  std::function<bool(int)> explore;

  auto try_chain = [&]() {
    auto sol = detail::solve_chain(cvas, nfa, chain, x, y, budget);
    if (!sol) return false;
    result.nonempty = true;
    if (want_witness) {
      Run r = detail::chain_run(cvas, nfa, chain, *sol, budget);
      if (!run_reaches(cvas, r, y) || !accepts(nfa, r.word()))
        throw std::logic_error("constructed witness failed validation");
      result.witness = std::move(r);
    }
    return true;
  };

  explore = [&](int entry) -> bool {
    // candidate block state sets: strongly connected subsets of the entry's
    // component avoiding states already used, always containing the entry
    std::vector<int> pool;
    for (int s : members[comp[entry]])
      if (!used[s] && s != entry) pool.push_back(s);
    if (static_cast<int>(pool.size()) + 1 > max_component)
      throw std::runtime_error("strongly connected component too large for block enumeration");
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << pool.size()); ++mask) {
      std::vector<int> states{entry};
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (mask >> i & 1) states.push_back(pool[i]);
      if (!detail::strongly_connected_subset(nfa, states)) continue;
      Block blk{entry, entry, {}};
      for (int s : states)
        for (int e : nfa.out_edges(s))
          if (std::find(states.begin(), states.end(), nfa.edge(e).dst) != states.end()) blk.edges.push_back(e);
      for (int s : states) used[s] = 1;
      for (int exit : states) {
        blk.exit = exit;
        chain.blocks.push_back(blk);
        if (nfa.is_accepting(exit) && try_chain()) return true;
        for (int e : nfa.out_edges(exit)) {
          int next = nfa.edge(e).dst;
          if (used[next]) continue;
          chain.bridges.push_back(e);
          bool found = explore(next);
          chain.bridges.pop_back();
          if (found) return true;
        }
        chain.blocks.pop_back();
      }
      for (int s : states) used[s] = 0;
    }
    return false;
  };

  for (int s : nfa.initial_states()) {
    if (explore(s)) return result;
    std::fill(used.begin(), used.end(), 0);
    chain = BlockChain{};
  }
  return result;
}

namespace detail {

// A path scheme read as one fixed chain: every bubble segment is a state
// with self-loops, fixed letters and gathering record letters are bridge
// edges, and consecutive bubbles are joined by empty bridges. The carrier
// automaton only holds the edges; it is not the scheme's language.
struct SchemeChain {
  Nfa carrier;
  BlockChain chain;
};

inline SchemeChain scheme_chain(const PathScheme& p, int k) {
  SchemeChain sc{Nfa(k), {}};
  int cur = sc.carrier.add_state(true, false);
  sc.chain.blocks.push_back({cur, cur, {}});
  auto segment = [&](LetterSet loops, int letter) {
    int t = sc.carrier.add_state();
    if (letter >= 0) {
      sc.carrier.add_edge(cur, letter, t);
      sc.chain.bridges.push_back(static_cast<int>(sc.carrier.num_edges()) - 1);
    } else {
      sc.chain.bridges.push_back(-1);
    }
    Block blk{t, t, {}};
    for (int l = 0; l < k; ++l)
      if (loops >> l & 1) {
        sc.carrier.add_edge(t, l, t);
        blk.edges.push_back(static_cast<int>(sc.carrier.num_edges()) - 1);
      }
    sc.chain.blocks.push_back(std::move(blk));
    cur = t;
  };
  auto word = [&](const Word& w) {
    for (int l : w) segment(0, l);
  };
  word(p.words[0]);
  for (std::size_t i = 0; i < p.bubbles.size(); ++i) {
    const auto& b = p.bubbles[i];
    if (b.is_star()) {
      segment(b.letters, -1);
    } else {
      LetterSet loops = 0;
      for (int l : b.first) segment(loops |= LetterSet(1) << l, l);
      loops = b.letters;
      for (int l : b.last) segment(loops &= ~(LetterSet(1) << l), l);
    }
    word(p.words[i + 1]);
  }
  sc.carrier.set_accepting(cur);
  return sc;
}

}  // namespace detail

// A validated run along the scheme from x to y, if one exists. Path schemes
// have a single chain of loop segments, so one refinement fixpoint decides.
inline std::optional<Run> scheme_witness(const Cvas& cvas, const PathScheme& p, const Configuration& x,
                                         const Configuration& y, SolverBudget* budget = nullptr) {
  if (static_cast<int>(x.size()) != cvas.dimension() || static_cast<int>(y.size()) != cvas.dimension())
    throw std::invalid_argument("configuration has wrong dimension");
  auto sc = detail::scheme_chain(p, cvas.size());
  auto sol = detail::solve_chain(cvas, sc.carrier, sc.chain, x, y, budget);
  if (!sol) return std::nullopt;
  Run r = detail::chain_run(cvas, sc.carrier, sc.chain, *sol, budget);
  r.start = x;
  if (!run_reaches(cvas, r, y) || !scheme_accepts(p, r.word()))
    throw std::logic_error("constructed scheme witness failed validation");
  return r;
}

inline bool scheme_meets(const Cvas& cvas, const PathScheme& p, const Configuration& x, const Configuration& y,
                         SolverBudget* budget = nullptr) {
  if (static_cast<int>(x.size()) != cvas.dimension() || static_cast<int>(y.size()) != cvas.dimension())
    throw std::invalid_argument("configuration has wrong dimension");
  auto sc = detail::scheme_chain(p, cvas.size());
  return detail::solve_chain(cvas, sc.carrier, sc.chain, x, y, budget).has_value();
}

inline bool is_perfect(const Cvas& cvas, const PathScheme& p, const Configuration& x, const Configuration& y,
                       SolverBudget* budget = nullptr) {
  return p.pre_perfect() && scheme_meets(cvas, p, x, y, budget);
}

// Oracle: the shortest accepted member in length-then-lexicographic order,
// searching words up to max_len.
inline std::optional<Run> bounded_witness_search(const Cvas& cvas, const Nfa& nfa, const Configuration& x,
                                                 const Configuration& y, int max_len,
                                                 SolverBudget* budget = nullptr) {
  const int k = cvas.size();
  std::uint64_t ysupp = support_mask(y);
  for (int len = 0; len <= max_len; ++len) {
    Word w;
    std::optional<Run> found;
    std::function<bool(const std::vector<int>&, std::uint64_t)> go = [&](const std::vector<int>& states,
                                                                          std::uint64_t positive) -> bool {
      if (states.empty()) return false;
      if (static_cast<int>(w.size()) == len) {
        bool acc = false;
        for (int s : states) acc = acc || nfa.is_accepting(s);
        if (!acc || !backward_firable(cvas, w, ysupp)) return false;
        auto fr = member(cvas, w, x, y, budget);
        if (!fr) return false;
        found = make_run(x, w, *fr);
        return true;
      }
      for (int l = 0; l < k; ++l) {
        const auto& eff = cvas.effect(l);
        if (decrement_mask(eff) & ~positive) continue;
        auto next = step_set(nfa, states, l);
        if (next.empty()) continue;
        w.push_back(l);
        bool hit = go(next, positive | increment_mask(eff));
        w.pop_back();
        if (hit) return true;
      }
      return false;
    };
    if (go(nfa.initial_states(), support_mask(x))) return found;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// canonical gathering witnesses

// A run over u c v where u and v are the first- and last-appearance records
// of the gathering, c its center over the whole gathering alphabet, such
// that: along u a positive counter never returns to zero; along v a zero
// counter stays zero; and a counter positive anywhere in u or v is positive
// throughout c.
struct CanonicalWitness {
  Bubble gathering;
  Word center;
  Run run;  // over first + center + last

  std::size_t prefix_len() const { return gathering.first.size(); }
  std::size_t center_end() const { return gathering.first.size() + center.size(); }
};

// Checks the three zero-pattern properties on a run over u c v.
inline bool canonical_properties_hold(const Cvas& cvas, const CanonicalWitness& w) {
  std::vector<Configuration> cfg;
  try {
    cfg = simulate(cvas, w.run);
  } catch (const StepError&) {
    return false;
  }
  const std::size_t n1 = w.prefix_len(), n2 = w.center_end(), n3 = cfg.size() - 1;
  const int d = cvas.dimension();
  std::uint64_t touched = 0;
  for (int c = 0; c < d; ++c) {
    bool seen_pos = false;
    for (std::size_t i = 0; i <= n1; ++i) {
      bool pos = sgn(cfg[i][c]) > 0;
      if (seen_pos && !pos) return false;
      seen_pos = seen_pos || pos;
    }
    bool seen_zero = false, any = seen_pos;
    for (std::size_t i = n2; i <= n3; ++i) {
      bool pos = sgn(cfg[i][c]) > 0;
      if (seen_zero && pos) return false;
      seen_zero = seen_zero || !pos;
      any = any || pos;
    }
    if (any) touched |= std::uint64_t(1) << c;
  }
  for (std::size_t i = n1; i <= n2; ++i)
    for (int c = 0; c < d; ++c)
      if ((touched >> c & 1) && sgn(cfg[i][c]) <= 0) return false;
  return true;
}

namespace detail {

// The exact program for one center skeleton: fractions in (0,1], the
// boundary configurations fixed, and the zero pattern forced by x, y, u, v
// encoded as strict and non-strict constraints.
inline std::optional<std::vector<Rational>> canonical_program(const Cvas& cvas, const Word& u, const Word& c,
                                                              const Word& v, const Configuration& x,
                                                              const Configuration& y, SolverBudget* budget) {
  const int d = cvas.dimension();
  Word w = u;
  w.insert(w.end(), c.begin(), c.end());
  w.insert(w.end(), v.begin(), v.end());
  if (!forward_firable(cvas, w, support_mask(x)) || !backward_firable(cvas, w, support_mask(y))) return std::nullopt;
  const std::size_t n = w.size(), n1 = u.size(), n2 = u.size() + c.size();
  LinearSystem sys(static_cast<int>(n), true);
  for (std::size_t i = 0; i < n; ++i) {
    sys.add_constraint({{static_cast<int>(i), Rational(1)}}, Relation::Greater, Rational(0));
    sys.add_constraint({{static_cast<int>(i), Rational(1)}}, Relation::LessEq, Rational(1));
  }
  for (int ctr = 0; ctr < d; ++ctr) {
    // prefix[i] = terms of configuration i (after i steps)
    std::vector<std::vector<LinearTerm>> prefix(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      prefix[i + 1] = prefix[i];
      long e = cvas.effect(w[i])[ctr];
      if (e) prefix[i + 1].push_back({static_cast<int>(i), Rational(e)});
    }
    auto require = [&](std::size_t i, Relation rel) {
      if (prefix[i].empty()) {
        int s = sgn(x[ctr]);
        bool ok = rel == Relation::Greater ? s > 0 : s >= 0;
        if (!ok) sys.add_constraint({{0, Rational(0)}}, Relation::Greater, Rational(0));
        return;
      }
      sys.add_constraint(prefix[i], rel, -x[ctr]);
    };
    for (std::size_t i = 1; i <= n; ++i) require(i, Relation::GreaterEq);
    sys.add_constraint(prefix[n].empty() ? std::vector<LinearTerm>{{0, Rational(0)}} : prefix[n], Relation::Equal,
                       y[ctr] - x[ctr]);
    // along u: positive from the first moment it can be
    bool touched = false;
    std::size_t from = n1 + 1;
    if (sgn(x[ctr]) > 0)
      from = 0;
    else
      for (std::size_t i = 0; i < n1; ++i)
        if (cvas.effect(w[i])[ctr] > 0) {
          from = i + 1;
          break;
        }
    if (from <= n1) {
      touched = true;
      for (std::size_t i = from; i <= n1; ++i) require(i, Relation::Greater);
    }
    // along v: positive until the last step changing it when the target is
    // zero, positive throughout otherwise
    std::size_t until = n2;  // positive on configurations n2..until-1
    if (sgn(y[ctr]) > 0) {
      until = n + 1;
    } else {
      for (std::size_t i = n; i-- > n2;)
        if (cvas.effect(w[i])[ctr] != 0) {
          until = i + 1;
          break;
        }
    }
    if (until > n2) {
      touched = true;
      for (std::size_t i = n2; i < until && i <= n; ++i) require(i, Relation::Greater);
    }
    if (touched)
      for (std::size_t i = n1; i <= n2; ++i) require(i, Relation::Greater);
  }
  return solve_feasibility(sys, budget);
}

}  // namespace detail

struct CanonicalSearchLimits {
  std::size_t skeletons = 3000;  // length-lexicographic skeletons tried
  int max_rounds = 1024;         // then (first record)^N for N = 2, 4, ...
};

// Searches center skeletons over the gathering alphabet (each letter at
// least once) in length-then-lexicographic order, then repetitions of the
// first-appearance record. Running out of skeletons is an error.
inline CanonicalWitness canonical_gathering_witness(const Cvas& cvas, const Bubble& g, const Configuration& x,
                                                    const Configuration& y, SolverBudget* budget = nullptr,
                                                    CanonicalSearchLimits limits = {}) {
  if (!g.is_gathering()) throw std::invalid_argument("expected a gathering");
  const Word& u = g.first;
  const Word& v = g.last;
  auto alphabet = letters_in_order(g.letters);
  const std::size_t a = alphabet.size();
  auto attempt = [&](const Word& c) -> std::optional<CanonicalWitness> {
    auto fr = detail::canonical_program(cvas, u, c, v, x, y, budget);
    if (!fr) return std::nullopt;
    Word w = u;
    w.insert(w.end(), c.begin(), c.end());
    w.insert(w.end(), v.begin(), v.end());
    return CanonicalWitness{g, c, make_run(x, w, *fr)};
  };
  std::size_t tried = 0;
  for (std::size_t len = a; tried < limits.skeletons; ++len) {
    Word c(len, 0);
    std::vector<std::size_t> digit(len, 0);
    for (;;) {
      for (std::size_t i = 0; i < len; ++i) c[i] = alphabet[digit[i]];
      if (letters_of(c) == g.letters) {
        if (++tried > limits.skeletons) break;
        if (auto w = attempt(c)) return *w;
      }
      std::size_t i = len;
      while (i > 0 && digit[i - 1] + 1 == a) digit[--i] = 0;
      if (i == 0) break;
      ++digit[i - 1];
    }
  }
  for (int rounds = 2; rounds <= limits.max_rounds; rounds *= 2) {
    Word c;
    for (int r = 0; r < rounds; ++r) c.insert(c.end(), u.begin(), u.end());
    if (auto w = attempt(c)) return *w;
  }
  throw WitnessSearchExhausted("no canonical gathering witness within the skeleton cap");
}

// ---------------------------------------------------------------------------
// redistribution of fractions onto superwords

namespace detail {

inline Rational min_of(const std::vector<Rational>& bounds) {
  Rational m = bounds.front();
  for (const auto& b : bounds)
    if (b < m) m = b;
  return m;
}

// Prefix construction: the run over a1..an (each letter once, fractions
// alpha) is spread over u' = a1 u2 a2 ... un an with ui over {a1..a(i-1)}.
// The first occurrence of ai keeps alpha_i - eps * extra_i, every other
// occurrence gets eps.
inline std::vector<Rational> spread_prefix(const std::vector<std::vector<long>>& effects, const Word& u,
                                           const std::vector<Rational>& alpha, const Configuration& x,
                                           const Word& target) {
  const std::size_t n = u.size();
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[u[i]] = i;
  std::vector<long> extra(n, 0);
  LetterSet seen = 0;
  std::size_t next = 0;
  for (int l : target) {
    if (!index.count(l)) throw std::invalid_argument("prefix uses a foreign letter");
    if (seen & letter_bit(l)) {
      ++extra[index[l]];
    } else {
      if (next >= n || u[next] != l) throw std::invalid_argument("prefix does not follow the appearance record");
      seen |= letter_bit(l);
      ++next;
    }
  }
  if (next != n) throw std::invalid_argument("prefix misses letters of the record");
  long total = 0;
  for (long e : extra) total += e;
  if (total == 0) return alpha;
  std::vector<Rational> bounds;
  for (std::size_t i = 0; i < n; ++i)
    if (extra[i] > 0) bounds.push_back(alpha[i] / extra[i]);
  Configuration cur = x;
  for (std::size_t i = 0; i < n; ++i) {
    cur = apply_effect(cur, effects[u[i]], alpha[i]);
    for (std::size_t c = 0; c < cur.size(); ++c) {
      if (sgn(cur[c]) <= 0) continue;
      for (int l : u)
        if (effects[l][c] != 0) bounds.push_back(cur[c] / (total * std::abs(effects[l][c])));
    }
  }
  Rational eps = min_of(bounds) / 2;
  std::vector<Rational> out;
  seen = 0;
  for (int l : target) {
    if (seen & letter_bit(l)) {
      out.push_back(eps);
    } else {
      seen |= letter_bit(l);
      out.push_back(alpha[index[l]] - eps * extra[index[l]]);
    }
  }
  return out;
}

inline bool is_subword(const Word& small, const Word& big) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < big.size() && j < small.size(); ++i)
    if (big[i] == small[j]) ++j;
  return j == small.size();
}

}  // namespace detail

// Moves the canonical run onto a word of the gathering whose center
// contains the witness center as a subword.
inline Run redistribute(const Cvas& cvas, const CanonicalWitness& wit, const Word& target) {
  const Bubble& g = wit.gathering;
  if (!matches_gathering(target, g)) throw std::invalid_argument("target word does not match the gathering");
  Word tcenter = gathering_center(target, g);
  if (!detail::is_subword(wit.center, tcenter)) throw std::invalid_argument("witness center is not a subword");
  auto rec = appearance_records(target);
  const std::size_t n = g.first.size();
  Word tprefix(target.begin(), target.begin() + static_cast<long>(rec.first_pos.back()) + 1);
  Word tsuffix(target.begin() + static_cast<long>(rec.last_pos.front()), target.end());

  auto cfg = simulate(cvas, wit.run);
  const std::size_t n1 = wit.prefix_len(), n2 = wit.center_end();
  std::vector<Rational> fr;
  for (const auto& s : wit.run.steps) fr.push_back(s.fraction);
  std::vector<std::vector<long>> effects;
  for (int l = 0; l < cvas.size(); ++l) effects.push_back(cvas.effect(l));

  // prefix
  auto pre = detail::spread_prefix(effects, g.first, std::vector<Rational>(fr.begin(), fr.begin() + n1), cfg[0], tprefix);

  // suffix: reverse the run and negate the effects
  std::vector<std::vector<long>> neg = effects;
  for (auto& e : neg)
    for (auto& v : e) v = -v;
  Word rev_last(g.last.rbegin(), g.last.rend());
  std::vector<Rational> rev_gamma(fr.rbegin(), fr.rbegin() + static_cast<long>(n));
  Word rev_target(tsuffix.rbegin(), tsuffix.rend());
  auto suf_rev = detail::spread_prefix(neg, rev_last, rev_gamma, cfg.back(), rev_target);
  std::vector<Rational> suf(suf_rev.rbegin(), suf_rev.rend());

  // center: insert the missing letters one at a time, leftmost embedding
  Word cur(wit.center);
  std::vector<Rational> beta(fr.begin() + static_cast<long>(n1), fr.begin() + static_cast<long>(n2));
  std::vector<std::size_t> slot;  // target index of each current letter
  {
    std::size_t j = 0;
    for (std::size_t i = 0; i < tcenter.size() && j < cur.size(); ++i)
      if (tcenter[i] == cur[j]) {
        slot.push_back(i);
        ++j;
      }
  }
  const Configuration mid = cfg[n1];
  for (std::size_t k = 0; k < tcenter.size(); ++k) {
    if (std::find(slot.begin(), slot.end(), k) != slot.end()) continue;
    std::size_t pos = 0;
    while (pos < slot.size() && slot[pos] < k) ++pos;
    int letter = tcenter[k];
    std::optional<std::size_t> donor;
    for (std::size_t i = pos; i-- > 0;)
      if (cur[i] == letter) {
        donor = i;
        break;
      }
    if (!donor)
      for (std::size_t i = pos; i < cur.size(); ++i)
        if (cur[i] == letter) {
          donor = i;
          break;
        }
    if (!donor) throw std::invalid_argument("center letter absent from the witness center");
    std::vector<Rational> bounds(beta.begin(), beta.end());
    Configuration c = mid;
    auto add_bounds = [&](const Configuration& conf) {
      for (std::size_t ctr = 0; ctr < conf.size(); ++ctr) {
        if (sgn(conf[ctr]) <= 0) continue;
        bounds.push_back(conf[ctr]);
        for (int l : letters_in_order(g.letters))
          if (effects[l][ctr] != 0) bounds.push_back(conf[ctr] / std::abs(effects[l][ctr]));
      }
    };
    add_bounds(c);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      c = apply_effect(c, effects[cur[i]], beta[i]);
      add_bounds(c);
    }
    Rational eps = detail::min_of(bounds) / 2;
    beta[*donor] -= eps;
    cur.insert(cur.begin() + static_cast<long>(pos), letter);
    beta.insert(beta.begin() + static_cast<long>(pos), eps);
    slot.insert(slot.begin() + static_cast<long>(pos), k);
  }

  Run out{wit.run.start, {}};
  for (std::size_t i = 0; i < tprefix.size(); ++i) out.steps.push_back({tprefix[i], pre[i]});
  for (std::size_t i = 0; i < cur.size(); ++i) out.steps.push_back({cur[i], beta[i]});
  for (std::size_t i = 0; i < tsuffix.size(); ++i) out.steps.push_back({tsuffix[i], suf[i]});
  return out;
}

// ---------------------------------------------------------------------------
// lifting a perfect scheme's witness

struct LiftedWitness {
  PathScheme scheme;
  Run global;                             // the decision procedure's witness
  RhoFactor factor;                       // its factorisation along the scheme
  std::vector<CanonicalWitness> bubbles;  // one canonical witness per bubble
  Run run;                                // the lifted run over u0 w'1 u1 ...

  std::vector<Word> centers() const {
    std::vector<Word> out;
    for (const auto& b : bubbles) out.push_back(b.center);
    return out;
  }
};

// Reads the boundary configurations off one witness run of the scheme and
// replaces each bubble's infix by a canonical witness between them.
inline LiftedWitness lift_run_witness(const Cvas& cvas, const PathScheme& p, const Configuration& x,
                                      const Configuration& y, SolverBudget* budget = nullptr,
                                      CanonicalSearchLimits limits = {}) {
  if (!p.pre_perfect()) throw std::invalid_argument("lifting needs a pre-perfect scheme");
  auto found = scheme_witness(cvas, p, x, y, budget);
  if (!found) throw std::invalid_argument("scheme does not meet the language");
  LiftedWitness out;
  out.scheme = p;
  out.global = std::move(*found);
  Word w = out.global.word();
  auto factors = factorize(w, p, 1);
  if (factors.empty()) throw std::logic_error("witness word does not factor along the scheme");
  out.factor = factors[0];
  auto cfg = simulate(cvas, out.global);
  out.run.start = x;
  std::size_t pos = 0;
  for (std::size_t i = 0; i <= p.bubbles.size(); ++i) {
    for (std::size_t j = 0; j < p.words[i].size(); ++j) out.run.steps.push_back(out.global.steps[pos + j]);
    pos += p.words[i].size();
    if (i == p.bubbles.size()) break;
    std::size_t len = out.factor.parts[i].size();
    auto cw = canonical_gathering_witness(cvas, p.bubbles[i], cfg[pos], cfg[pos + len], budget, limits);
    out.run.steps.insert(out.run.steps.end(), cw.run.steps.begin(), cw.run.steps.end());
    out.bubbles.push_back(std::move(cw));
    pos += len;
  }
  if (!run_reaches(cvas, out.run, y)) throw std::logic_error("lifted run failed validation");
  return out;
}

// A run for any word of the upward closure of a lifted witness, obtained by
// redistributing each bubble's canonical run.
inline Run redistribute_scheme(const Cvas& cvas, const LiftedWitness& lw, const Word& target) {
  // factor the target along the original scheme, choosing a split whose
  // bubble centers contain the witness centers
  for (const auto& f : factorize(target, lw.scheme)) {
    bool ok = true;
    for (std::size_t i = 0; i < f.parts.size() && ok; ++i)
      ok = detail::is_subword(lw.bubbles[i].center, gathering_center(f.parts[i], lw.scheme.bubbles[i]));
    if (!ok) continue;
    Run out{lw.run.start, {}};
    std::size_t src = 0;  // position in lw.run
    for (std::size_t i = 0; i <= lw.scheme.bubbles.size(); ++i) {
      for (std::size_t j = 0; j < lw.scheme.words[i].size(); ++j) out.steps.push_back(lw.run.steps[src + j]);
      src += lw.scheme.words[i].size();
      if (i == lw.scheme.bubbles.size()) break;
      Run part = redistribute(cvas, lw.bubbles[i], f.parts[i]);
      out.steps.insert(out.steps.end(), part.steps.begin(), part.steps.end());
      src += lw.bubbles[i].run.steps.size();
    }
    return out;
  }
  throw std::invalid_argument("word is not in the upward closure of the lifted witness");
}

}  // namespace cvasreg

#endif  // CVASREG_DECIDER_HPP
