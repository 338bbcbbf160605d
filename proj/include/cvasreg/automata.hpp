#ifndef CVASREG_AUTOMATA_HPP
#define CVASREG_AUTOMATA_HPP

#include <algorithm>
#include <tuple>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvasreg {

class AutomatonTooLarge : public std::runtime_error {
 public:
  explicit AutomatonTooLarge(const std::string& what) : std::runtime_error("automaton too large: " + what) {}
};

inline constexpr std::size_t kDefaultStateCap = 2000000;

struct NfaEdge {
  int src;
  int letter;
  int dst;
  bool operator<(const NfaEdge& o) const {
    return std::tie(src, letter, dst) < std::tie(o.src, o.letter, o.dst);
  }
  bool operator==(const NfaEdge& o) const = default;
};

// An epsilon-free nondeterministic automaton over letters 0..k-1. States are
// numbered in creation order.
class Nfa {
 public:
  explicit Nfa(int alphabet_size = 0) : k_(alphabet_size) {}

  int alphabet_size() const { return k_; }
  int num_states() const { return static_cast<int>(out_.size()); }
  std::size_t num_edges() const { return edges_.size(); }

  int add_state(bool initial = false, bool accepting = false) {
    out_.emplace_back();
    in_.emplace_back();
    initial_.push_back(initial);
    accepting_.push_back(accepting);
    return num_states() - 1;
  }

  void add_edge(int src, int letter, int dst) {
    if (letter < 0 || letter >= k_) throw std::out_of_range("letter outside the alphabet");
    if (src < 0 || src >= num_states() || dst < 0 || dst >= num_states()) throw std::out_of_range("unknown state");
    for (int e : out_[src])
      if (edges_[e].letter == letter && edges_[e].dst == dst) return;
    out_[src].push_back(static_cast<int>(edges_.size()));
    in_[dst].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({src, letter, dst});
  }

  void set_initial(int s, bool v = true) { initial_.at(s) = v; }
  void set_accepting(int s, bool v = true) { accepting_.at(s) = v; }
  bool is_initial(int s) const { return initial_.at(s); }
  bool is_accepting(int s) const { return accepting_.at(s); }

  std::vector<int> initial_states() const { return select(initial_); }
  std::vector<int> accepting_states() const { return select(accepting_); }

  const std::vector<NfaEdge>& edges() const { return edges_; }
  const NfaEdge& edge(int e) const { return edges_[e]; }
  const std::vector<int>& out_edges(int s) const { return out_[s]; }
  const std::vector<int>& in_edges(int s) const { return in_[s]; }

 private:
  static std::vector<int> select(const std::vector<bool>& flags) {
    std::vector<int> out;
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) out.push_back(static_cast<int>(i));
    return out;
  }

  int k_;
  std::vector<std::vector<int>> out_, in_;
  std::vector<bool> initial_, accepting_;
  std::vector<NfaEdge> edges_;
};

inline Nfa empty_nfa(int k) { return Nfa(k); }

inline Nfa from_word(int k, const std::vector<int>& w) {
  Nfa a(k);
  int s = a.add_state(true, w.empty());
  for (std::size_t i = 0; i < w.size(); ++i) {
    int t = a.add_state(false, i + 1 == w.size());
    a.add_edge(s, w[i], t);
    s = t;
  }
  return a;
}

// B^* for the letters in `mask`.
inline Nfa star_of_subalphabet(int k, std::uint64_t mask) {
  Nfa a(k);
  int s = a.add_state(true, true);
  for (int l = 0; l < k; ++l)
    if (mask >> l & 1) a.add_edge(s, l, s);
  return a;
}

// Copies the states and edges of `b` into `a`; returns the state offset.
inline int embed(Nfa& a, const Nfa& b) {
  int off = a.num_states();
  for (int s = 0; s < b.num_states(); ++s) a.add_state(b.is_initial(s), b.is_accepting(s));
  for (const auto& e : b.edges()) a.add_edge(e.src + off, e.letter, e.dst + off);
  return off;
}

inline Nfa nfa_union(const Nfa& a, const Nfa& b) {
  if (a.alphabet_size() != b.alphabet_size()) throw std::invalid_argument("alphabet mismatch");
  Nfa out(a.alphabet_size());
  embed(out, a);
  embed(out, b);
  return out;
}

inline Nfa nfa_union(const std::vector<Nfa>& parts, int k) {
  Nfa out(k);
  for (const auto& p : parts) {
    if (p.alphabet_size() != k) throw std::invalid_argument("alphabet mismatch");
    embed(out, p);
  }
  return out;
}

// Concatenation. When a has a single accepting state f and b a single
// initial state i, and f has no outgoing or i no incoming edges, the two
// states are merged; otherwise the edges leaving b's initial states are
// copied onto a's accepting states.
inline Nfa concat(const Nfa& a, const Nfa& b) {
  if (a.alphabet_size() != b.alphabet_size()) throw std::invalid_argument("alphabet mismatch");
  const int k = a.alphabet_size();
  auto fa = a.accepting_states();
  auto ib = b.initial_states();
  if (fa.empty() || ib.empty()) return Nfa(k);
  if (fa.size() == 1 && ib.size() == 1 && (a.out_edges(fa[0]).empty() || b.in_edges(ib[0]).empty())) {
    Nfa out(k);
    for (int s = 0; s < a.num_states(); ++s) out.add_state(a.is_initial(s), false);
    for (const auto& e : a.edges()) out.add_edge(e.src, e.letter, e.dst);
    std::vector<int> map(b.num_states());
    for (int s = 0; s < b.num_states(); ++s) map[s] = s == ib[0] ? fa[0] : out.add_state(false, false);
    for (int s = 0; s < b.num_states(); ++s)
      if (b.is_accepting(s)) out.set_accepting(map[s]);
    for (const auto& e : b.edges()) out.add_edge(map[e.src], e.letter, map[e.dst]);
    return out;
  }
  bool a_eps = false, b_eps = false;
  for (int s : a.initial_states()) a_eps = a_eps || a.is_accepting(s);
  for (int s : ib) b_eps = b_eps || b.is_accepting(s);
  Nfa out(k);
  for (int s = 0; s < a.num_states(); ++s) out.add_state(a.is_initial(s), b_eps && a.is_accepting(s));
  int off = out.num_states();
  for (int s = 0; s < b.num_states(); ++s) out.add_state(a_eps && b.is_initial(s), b.is_accepting(s));
  for (const auto& e : a.edges()) out.add_edge(e.src, e.letter, e.dst);
  for (const auto& e : b.edges()) out.add_edge(e.src + off, e.letter, e.dst + off);
  for (int f : fa)
    for (int i : ib)
      for (int e : b.out_edges(i)) out.add_edge(f, b.edge(e).letter, b.edge(e).dst + off);
  return out;
}

// Kleene star: a fresh initial accepting state copies the edges leaving the
// initial states, and every edge into an accepting state is doubled to
// return to the fresh state.
inline Nfa nfa_star(const Nfa& a) {
  const int k = a.alphabet_size();
  Nfa out(k);
  int start = out.add_state(true, true);
  int off = out.num_states();
  for (int s = 0; s < a.num_states(); ++s) out.add_state(false, a.is_accepting(s));
  for (const auto& e : a.edges()) {
    out.add_edge(e.src + off, e.letter, e.dst + off);
    if (a.is_accepting(e.dst)) out.add_edge(e.src + off, e.letter, start);
  }
  for (int i : a.initial_states())
    for (int e : a.out_edges(i)) {
      const auto& edge = a.edge(e);
      out.add_edge(start, edge.letter, edge.dst + off);
      if (a.is_accepting(edge.dst)) out.add_edge(start, edge.letter, start);
    }
  return out;
}

// Chain automaton for the gathering with first-appearance record `first`
// and last-appearance record `last`: segment i <= n loops on the first i
// letters of `first`, segment n+j loops on the alphabet minus the first j
// letters of `last`.
inline Nfa gathering_nfa(int k, const std::vector<int>& first, const std::vector<int>& last) {
  if (first.empty() || first.size() != last.size()) throw std::invalid_argument("malformed gathering");
  Nfa a(k);
  const std::size_t n = first.size();
  std::uint64_t loops = 0, all = 0;
  for (int l : first) all |= std::uint64_t(1) << l;
  int s = a.add_state(true, false);
  for (std::size_t i = 0; i < n; ++i) {
    int t = a.add_state();
    a.add_edge(s, first[i], t);
    loops |= std::uint64_t(1) << first[i];
    for (int l = 0; l < k; ++l)
      if (loops >> l & 1) a.add_edge(t, l, t);
    s = t;
  }
  loops = all;
  for (std::size_t j = 0; j < n; ++j) {
    int t = a.add_state(false, j + 1 == n);
    a.add_edge(s, last[j], t);
    loops &= ~(std::uint64_t(1) << last[j]);
    for (int l = 0; l < k; ++l)
      if (loops >> l & 1) a.add_edge(t, l, t);
    s = t;
  }
  return a;
}

inline std::vector<int> step_set(const Nfa& a, const std::vector<int>& states, int letter) {
  std::vector<int> next;
  for (int s : states)
    for (int e : a.out_edges(s))
      if (a.edge(e).letter == letter) next.push_back(a.edge(e).dst);
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return next;
}

inline bool accepts(const Nfa& a, const std::vector<int>& w) {
  auto cur = a.initial_states();
  for (int l : w) {
    if (cur.empty()) return false;
    cur = step_set(a, cur, l);
  }
  for (int s : cur)
    if (a.is_accepting(s)) return true;
  return false;
}

inline std::vector<bool> reachable_states(const Nfa& a) {
  std::vector<bool> seen(a.num_states(), false);
  std::deque<int> q;
  for (int s : a.initial_states()) {
    seen[s] = true;
    q.push_back(s);
  }
  while (!q.empty()) {
    int s = q.front();
    q.pop_front();
    for (int e : a.out_edges(s))
      if (!seen[a.edge(e).dst]) {
        seen[a.edge(e).dst] = true;
        q.push_back(a.edge(e).dst);
      }
  }
  return seen;
}

inline std::vector<bool> coreachable_states(const Nfa& a) {
  std::vector<bool> seen(a.num_states(), false);
  std::deque<int> q;
  for (int s : a.accepting_states()) {
    seen[s] = true;
    q.push_back(s);
  }
  while (!q.empty()) {
    int s = q.front();
    q.pop_front();
    for (int e : a.in_edges(s))
      if (!seen[a.edge(e).src]) {
        seen[a.edge(e).src] = true;
        q.push_back(a.edge(e).src);
      }
  }
  return seen;
}

inline bool is_empty(const Nfa& a) {
  auto seen = reachable_states(a);
  for (int s : a.accepting_states())
    if (seen[s]) return false;
  return true;
}

// Removes states that are not both reachable and co-reachable, keeping the
// relative order of the survivors.
inline Nfa trim(const Nfa& a) {
  auto r = reachable_states(a);
  auto c = coreachable_states(a);
  Nfa out(a.alphabet_size());
  std::vector<int> map(a.num_states(), -1);
  for (int s = 0; s < a.num_states(); ++s)
    if (r[s] && c[s]) map[s] = out.add_state(a.is_initial(s), a.is_accepting(s));
  for (const auto& e : a.edges())
    if (map[e.src] >= 0 && map[e.dst] >= 0) out.add_edge(map[e.src], e.letter, map[e.dst]);
  return out;
}

inline Nfa product(const Nfa& a, const Nfa& b, std::size_t cap = kDefaultStateCap) {
  if (a.alphabet_size() != b.alphabet_size()) throw std::invalid_argument("alphabet mismatch");
  Nfa out(a.alphabet_size());
  std::map<std::pair<int, int>, int> id;
  std::deque<std::pair<int, int>> q;
  auto get = [&](int p, int r) {
    auto [it, fresh] = id.emplace(std::make_pair(p, r), out.num_states());
    if (fresh) {
      if (id.size() > cap) throw AutomatonTooLarge("product exceeds " + std::to_string(cap) + " states");
      out.add_state(false, a.is_accepting(p) && b.is_accepting(r));
      q.emplace_back(p, r);
    }
    return it->second;
  };
  for (int p : a.initial_states())
    for (int r : b.initial_states()) out.set_initial(get(p, r));
  while (!q.empty()) {
    auto [p, r] = q.front();
    q.pop_front();
    int from = id[{p, r}];
    for (int e : a.out_edges(p))
      for (int f : b.out_edges(r))
        if (a.edge(e).letter == b.edge(f).letter) out.add_edge(from, a.edge(e).letter, get(a.edge(e).dst, b.edge(f).dst));
  }
  return out;
}

// Complete deterministic automaton; delta[s * k + l] is the successor.
struct Dfa {
  int k = 0;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<int> delta;

  int num_states() const { return static_cast<int>(accepting.size()); }
  int next(int s, int l) const { return delta[static_cast<std::size_t>(s) * k + l]; }

  bool accepts(const std::vector<int>& w) const {
    int s = initial;
    for (int l : w) s = next(s, l);
    return accepting[s];
  }
};

// Subset construction; the empty subset is kept as the sink state so the
// result is complete.
inline Dfa determinize(const Nfa& a, std::size_t cap = kDefaultStateCap) {
  Dfa d;
  d.k = a.alphabet_size();
  std::map<std::vector<int>, int> id;
  std::vector<std::vector<int>> subsets;
  auto get = [&](std::vector<int> s) {
    auto [it, fresh] = id.emplace(s, static_cast<int>(subsets.size()));
    if (fresh) {
      if (subsets.size() >= cap) throw AutomatonTooLarge("determinization exceeds " + std::to_string(cap) + " states");
      bool acc = false;
      for (int q : s) acc = acc || a.is_accepting(q);
      d.accepting.push_back(acc);
      subsets.push_back(std::move(s));
    }
    return it->second;
  };
  d.initial = get(a.initial_states());
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    for (int l = 0; l < d.k; ++l) {
      int t = get(step_set(a, subsets[i], l));
      d.delta.push_back(t);
    }
  }
  return d;
}

// Hopcroft partition refinement on the reachable part. The result is the
// minimal complete automaton, states numbered in breadth-first order from
// the initial state.
inline Dfa minimize(const Dfa& d) {
  const int k = d.k;
  std::vector<int> order{d.initial}, seen(d.num_states(), -1);
  seen[d.initial] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int l = 0; l < k; ++l) {
      int t = d.next(order[i], l);
      if (seen[t] < 0) {
        seen[t] = static_cast<int>(order.size());
        order.push_back(t);
      }
    }
  const int n = static_cast<int>(order.size());
  std::vector<int> delta(static_cast<std::size_t>(n) * k);
  std::vector<bool> acc(n);
  for (int i = 0; i < n; ++i) {
    acc[i] = d.accepting[order[i]];
    for (int l = 0; l < k; ++l) delta[static_cast<std::size_t>(i) * k + l] = seen[d.next(order[i], l)];
  }
  std::vector<std::vector<std::vector<int>>> inv(k, std::vector<std::vector<int>>(n));
  for (int s = 0; s < n; ++s)
    for (int l = 0; l < k; ++l) inv[l][delta[static_cast<std::size_t>(s) * k + l]].push_back(s);

  std::vector<int> block(n);
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> yes, no;
    for (int s = 0; s < n; ++s) (acc[s] ? yes : no).push_back(s);
    for (auto* b : {&yes, &no})
      if (!b->empty()) {
        for (int s : *b) block[s] = static_cast<int>(blocks.size());
        blocks.push_back(*b);
      }
  }
  std::deque<std::pair<int, int>> work;
  std::vector<std::vector<bool>> queued;
  auto enqueue = [&](int b, int l) {
    if (queued.size() <= static_cast<std::size_t>(b)) queued.resize(b + 1, std::vector<bool>(k, false));
    if (!queued[b][l]) {
      queued[b][l] = true;
      work.emplace_back(b, l);
    }
  };
  for (int l = 0; l < k; ++l) {
    if (blocks.size() == 2)
      enqueue(blocks[0].size() <= blocks[1].size() ? 0 : 1, l);
    else if (blocks.size() == 1)
      enqueue(0, l);
  }
  std::vector<bool> marked(n, false);
  while (!work.empty()) {
    auto [b, l] = work.front();
    work.pop_front();
    queued[b][l] = false;
    std::vector<int> pre;
    for (int s : blocks[b])
      for (int p : inv[l][s])
        if (!marked[p]) {
          marked[p] = true;
          pre.push_back(p);
        }
    std::map<int, std::vector<int>> hit;
    for (int p : pre) hit[block[p]].push_back(p);
    for (int p : pre) marked[p] = false;
    for (auto& [c, members] : hit) {
      if (members.size() == blocks[c].size()) continue;
      std::vector<bool> in(n, false);
      for (int p : members) in[p] = true;
      std::vector<int> rest;
      for (int s : blocks[c])
        if (!in[s]) rest.push_back(s);
      int fresh = static_cast<int>(blocks.size());
      std::vector<int> small = members.size() <= rest.size() ? members : rest;
      std::vector<int> large = members.size() <= rest.size() ? rest : members;
      blocks[c] = large;
      blocks.push_back(small);
      for (int s : small) block[s] = fresh;
      // the fresh block is the smaller half, so it is the right splitter
      // whether or not (c, a) is still pending
      for (int a = 0; a < k; ++a) enqueue(fresh, a);
    }
  }
  // renumber blocks breadth-first from the initial state
  std::vector<int> rename(blocks.size(), -1);
  std::vector<int> reps;
  rename[block[0]] = 0;
  reps.push_back(0);
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (int l = 0; l < k; ++l) {
      int t = block[delta[static_cast<std::size_t>(reps[i]) * k + l]];
      if (rename[t] < 0) {
        rename[t] = static_cast<int>(reps.size());
        reps.push_back(blocks[t].front());
      }
    }
  Dfa m;
  m.k = k;
  m.initial = 0;
  m.accepting.resize(reps.size());
  m.delta.resize(reps.size() * k);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    m.accepting[i] = acc[reps[i]];
    for (int l = 0; l < k; ++l) m.delta[i * k + l] = rename[block[delta[static_cast<std::size_t>(reps[i]) * k + l]]];
  }
  return m;
}

inline Nfa to_nfa(const Dfa& d) {
  Nfa a(d.k);
  for (int s = 0; s < d.num_states(); ++s) a.add_state(s == d.initial, d.accepting[s]);
  for (int s = 0; s < d.num_states(); ++s)
    for (int l = 0; l < d.k; ++l) a.add_edge(s, l, d.next(s, l));
  return a;
}

// Language equality via a breadth-first search over pairs of subsets.
inline bool equivalent(const Nfa& a, const Nfa& b, std::size_t cap = kDefaultStateCap) {
  if (a.alphabet_size() != b.alphabet_size()) return false;
  Dfa da = determinize(a, cap), db = determinize(b, cap);
  std::set<std::pair<int, int>> seen{{da.initial, db.initial}};
  std::deque<std::pair<int, int>> q{{da.initial, db.initial}};
  while (!q.empty()) {
    auto [p, r] = q.front();
    q.pop_front();
    if (da.accepting[p] != db.accepting[r]) return false;
    for (int l = 0; l < da.k; ++l) {
      std::pair<int, int> nx{da.next(p, l), db.next(r, l)};
      if (seen.insert(nx).second) q.push_back(nx);
    }
  }
  return true;
}

// Graphviz rendering: states q0, q1, ...; accepting states are double
// circles; parallel edges share one comma-separated label.
inline std::string to_dot(const Nfa& a, const std::function<std::string(int)>& label) {
  std::ostringstream os;
  os << "digraph nfa {\n  rankdir=LR;\n";
  for (int s = 0; s < a.num_states(); ++s)
    os << "  q" << s << " [shape=" << (a.is_accepting(s) ? "doublecircle" : "circle") << "];\n";
  for (int s : a.initial_states()) os << "  start" << s << " [shape=point];\n  start" << s << " -> q" << s << ";\n";
  std::map<std::pair<int, int>, std::vector<int>> grouped;
  for (const auto& e : a.edges()) grouped[{e.src, e.dst}].push_back(e.letter);
  for (auto& [key, letters] : grouped) {
    std::sort(letters.begin(), letters.end());
    os << "  q" << key.first << " -> q" << key.second << " [label=\"";
    for (std::size_t i = 0; i < letters.size(); ++i) os << (i ? "," : "") << label(letters[i]);
    os << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace cvasreg

#endif  // CVASREG_AUTOMATA_HPP
