#ifndef CVASREG_ENGINE_HPP
#define CVASREG_ENGINE_HPP

#include <cvasreg/automata.hpp>
#include <cvasreg/cvas.hpp>
#include <cvasreg/decider.hpp>
#include <cvasreg/scheme.hpp>

#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvasreg {

inline std::string format_weight(const WeightVector& w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s + ")";
}

enum class Provenance { Root, Decomposition, UpwardClosure, Complement };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Root:
      return "root";
    case Provenance::Decomposition:
      return "decomposition";
    case Provenance::UpwardClosure:
      return "upward-closure";
    case Provenance::Complement:
      return "complement";
  }
  return "?";
}

struct TreeNode {
  PathScheme scheme;
  int level = 0;
  bool marked = false;
  bool expanded = false;
  int parent = -1;
  std::vector<int> children;
  Provenance provenance = Provenance::Root;
  std::vector<Word> centers;  // odd nodes: centers of the lifted witness
};

// Nodes are stored in creation order, which is breadth-first.
struct DecompositionTree {
  int alphabet = 0;
  std::vector<TreeNode> nodes;

  bool empty() const { return nodes.empty(); }

  std::vector<int> leaves() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].children.empty()) out.push_back(static_cast<int>(i));
    return out;
  }

  bool complete() const {
    for (const auto& n : nodes)
      if (n.children.empty() && !n.marked && !n.expanded) return false;
    return true;
  }
};

struct EngineLimits {
  std::size_t max_nodes = 200000;
  long long max_solver_steps = 0;  // simplex pivots; 0 means unlimited
  std::size_t decomposition_cap = 200000;
  std::size_t pool_words = 400;  // short words tested for membership up front
  CanonicalSearchLimits canonical{};
  bool parallel = false;
};

class EngineCapExceeded : public std::runtime_error {
 public:
  EngineCapExceeded(const std::string& what, DecompositionTree partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const DecompositionTree& partial_tree() const { return partial_; }

 private:
  DecompositionTree partial_;
};

struct EngineResult {
  Nfa nfa;
  DecompositionTree tree;
  long long solver_steps = 0;
};

namespace detail {

// Shared memo of scheme/language intersection tests. A trie of known
// member words answers positive queries without a linear program.
class MeetsCache {
 public:
  bool meets(const Cvas& cvas, const PathScheme& p, const Configuration& x, const Configuration& y,
             SolverBudget* budget) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(p);
      if (it != memo_.end()) return it->second;
      if (pool_hit(p, cvas.size()) || probe_hit(cvas, p, x, y, budget)) {
        memo_.emplace(p, true);
        return true;
      }
    }
    bool r = scheme_meets(cvas, p, x, y, budget);
    std::lock_guard<std::mutex> lock(mu_);
    memo_.emplace(p, r);
    return r;
  }

  // Adds every member among the shortest words, up to about `max_words`
  // words and length `max_len`.
  void seed(const Cvas& cvas, const Configuration& x, const Configuration& y, SolverBudget* budget,
            std::size_t max_words, std::size_t max_len = 8) {
    std::vector<Word> layer{Word{}};
    std::size_t seen = 0;
    while (!layer.empty() && layer.front().size() <= max_len && seen + layer.size() <= max_words) {
      std::vector<Word> next;
      for (const auto& w : layer) {
        ++seen;
        if (member(cvas, w, x, y, budget)) add_member(w, cvas.size());
        for (int l = 0; l < cvas.size(); ++l) {
          next.push_back(w);
          next.back().push_back(l);
        }
      }
      layer = std::move(next);
    }
  }

  void add_member(const Word& w, int k) {
    std::lock_guard<std::mutex> lock(pool_mu_);
    if (trie_.empty()) trie_.push_back(TrieNode{std::vector<int>(k, -1), false});
    int cur = 0;
    for (int l : w) {
      if (trie_[cur].next[l] < 0) {
        trie_[cur].next[l] = static_cast<int>(trie_.size());
        trie_.push_back(TrieNode{std::vector<int>(k, -1), false});
      }
      cur = trie_[cur].next[l];
    }
    trie_[cur].member = true;
  }

 private:
  struct TrieNode {
    std::vector<int> next;
    bool member = false;
  };

  // Canonical words of the scheme: each gathering as its first record, r
  // rounds over its letters and its last record; each star as r rounds.
  bool probe_hit(const Cvas& cvas, const PathScheme& p, const Configuration& x, const Configuration& y,
                 SolverBudget* budget) {
    std::optional<Nfa> a;
    for (int r = 0; r <= 2; ++r) {
      Word w = p.words[0];
      for (std::size_t i = 0; i < p.bubbles.size(); ++i) {
        const auto& b = p.bubbles[i];
        w.insert(w.end(), b.first.begin(), b.first.end());
        for (int j = 0; j < r; ++j)
          for (int l = 0; l < cvas.size(); ++l)
            if (b.letters >> l & 1) w.push_back(l);
        w.insert(w.end(), b.last.begin(), b.last.end());
        w.insert(w.end(), p.words[i + 1].begin(), p.words[i + 1].end());
      }
      if (!a) a = scheme_to_nfa(p, cvas.size());
      if (!accepts(*a, w)) continue;
      auto it = probed_.find(w);
      bool in = it != probed_.end() ? it->second : member(cvas, w, x, y, budget).has_value();
      probed_.emplace(w, in);
      if (in) {
        add_member(w, cvas.size());
        return true;
      }
    }
    return false;
  }

  bool pool_hit(const PathScheme& p, int k) {
    std::lock_guard<std::mutex> lock(pool_mu_);
    if (trie_.empty()) return false;
    Nfa a = scheme_to_nfa(p, k);
    std::function<bool(int, const std::vector<int>&)> walk = [&](int node, const std::vector<int>& states) {
      if (trie_[node].member)
        for (int s : states)
          if (a.is_accepting(s)) return true;
      for (int l = 0; l < k; ++l) {
        int child = trie_[node].next[l];
        if (child < 0) continue;
        auto step = step_set(a, states, l);
        if (!step.empty() && walk(child, step)) return true;
      }
      return false;
    };
    return walk(0, a.initial_states());
  }

  std::mutex mu_;
  std::mutex pool_mu_;
  std::map<PathScheme, bool> memo_;
  std::vector<TrieNode> trie_;
  std::map<Word, bool> probed_;
};

struct Expansion {
  std::vector<TreeNode> children;
};

}  // namespace detail

// Even leaf: the pre-perfect schemes of its decomposition that meet the
// language (and hence are perfect).
inline std::vector<TreeNode> expand_even_leaf(const TreeNode& node, const Cvas& cvas, const Configuration& x,
                                              const Configuration& y, SolverBudget* budget,
                                              std::size_t decomposition_cap = 0,
                                              detail::MeetsCache* cache = nullptr) {
  if (node.level % 2 != 0) throw std::invalid_argument("expand_even_leaf on an odd node");
  detail::MeetsCache local;
  detail::MeetsCache& memo = cache ? *cache : local;
  auto keep = [&](const PathScheme& p) { return memo.meets(cvas, p, x, y, budget); };
  std::vector<TreeNode> out;
  for (auto& p : decompose_pruned(node.scheme, keep, decomposition_cap)) {
    TreeNode child;
    child.scheme = std::move(p);
    child.level = node.level + 1;
    child.provenance = Provenance::Decomposition;
    out.push_back(std::move(child));
  }
  return out;
}

// Odd leaf: a marked upward closure of a lifted witness, followed by the
// complement schemes that still meet the language.
inline std::vector<TreeNode> expand_odd_leaf(TreeNode& node, const Cvas& cvas, const Configuration& x,
                                             const Configuration& y, SolverBudget* budget,
                                             CanonicalSearchLimits limits = {}, detail::MeetsCache* cache = nullptr) {
  if (node.level % 2 != 1) throw std::invalid_argument("expand_odd_leaf on an even node");
  detail::MeetsCache local;
  detail::MeetsCache& memo = cache ? *cache : local;
  auto lifted = lift_run_witness(cvas, node.scheme, x, y, budget, limits);
  node.centers = lifted.centers();
  if (cache) cache->add_member(lifted.run.word(), cvas.size());
  std::vector<TreeNode> out;
  TreeNode up;
  up.scheme = scheme_upward_closure(node.scheme, node.centers);
  up.level = node.level + 1;
  up.marked = true;
  up.provenance = Provenance::UpwardClosure;
  out.push_back(std::move(up));
  for (auto& s : scheme_complement(node.scheme, node.centers)) {
    if (!memo.meets(cvas, s, x, y, budget)) continue;
    TreeNode child;
    child.scheme = std::move(s);
    child.level = node.level + 1;
    child.provenance = Provenance::Complement;
    out.push_back(std::move(child));
  }
  return out;
}

namespace detail {

inline void check_child_weights(const TreeNode& parent, const TreeNode& child, int k) {
  auto wp = weight(parent.scheme, k), wc = weight(child.scheme, k);
  if (parent.level % 2 == 0) {
    if (!lex_leq(wc, wp))
      throw std::logic_error("odd child heavier than its parent: " + format_weight(wc) + " > " + format_weight(wp));
  } else if (!child.marked && !lex_less(wc, wp)) {
    throw std::logic_error("unmarked even child not lighter than its parent: " + format_weight(wc) +
                           " >= " + format_weight(wp));
  }
}

}  // namespace detail

// Builds the alternating decomposition tree breadth-first and returns the
// union automaton of its marked leaves. `observe` sees the tree after every
// expansion round.
inline EngineResult build_nfa(const Cvas& cvas, const Configuration& x, const Configuration& y,
                              const EngineLimits& limits = {},
                              const std::function<void(const DecompositionTree&)>& observe = nullptr) {
  const int k = cvas.size();
  EngineResult result;
  result.tree.alphabet = k;
  SolverBudget budget{limits.max_solver_steps, 0};
  auto fail = [&](const std::string& why) -> EngineCapExceeded {
    return EngineCapExceeded(why, result.tree);
  };
  detail::MeetsCache cache;
  PathScheme root = PathScheme::of_bubble(Bubble::star(k >= 64 ? ~LetterSet(0) : (LetterSet(1) << k) - 1));
  try {
    if (!cache.meets(cvas, root, x, y, &budget)) {
      result.nfa = empty_nfa(k);
      result.solver_steps = budget.used;
      return result;
    }
  } catch (const SolverBudgetExceeded&) {
    throw fail("solver step cap exceeded");
  }
  try {
    cache.seed(cvas, x, y, &budget, limits.pool_words);
  } catch (const SolverBudgetExceeded&) {
    throw fail("solver step cap exceeded");
  }
  TreeNode rn;
  rn.scheme = root;
  result.tree.nodes.push_back(rn);

  std::size_t begin = 0;
  while (begin < result.tree.nodes.size()) {
    const std::size_t end = result.tree.nodes.size();
    std::vector<std::size_t> todo;
    for (std::size_t i = begin; i < end; ++i)
      if (!result.tree.nodes[i].marked) todo.push_back(i);
    auto expand = [&](std::size_t id, SolverBudget* b) {
      TreeNode copy = result.tree.nodes[id];
      std::vector<TreeNode> kids;
      if (copy.level % 2 == 0)
        kids = expand_even_leaf(copy, cvas, x, y, b, limits.decomposition_cap, &cache);
      else
        kids = expand_odd_leaf(copy, cvas, x, y, b, limits.canonical, &cache);
      return std::make_pair(std::move(copy.centers), std::move(kids));
    };
    std::vector<std::pair<std::vector<Word>, std::vector<TreeNode>>> produced;
    try {
      if (limits.parallel && todo.size() > 1) {
        std::vector<SolverBudget> budgets(todo.size());
        std::vector<std::future<std::pair<std::vector<Word>, std::vector<TreeNode>>>> jobs;
        for (std::size_t j = 0; j < todo.size(); ++j) {
          long long remaining = limits.max_solver_steps > 0 ? limits.max_solver_steps - budget.used : 0;
          budgets[j].limit = remaining > 0 ? remaining : (limits.max_solver_steps > 0 ? 1 : 0);
          jobs.push_back(std::async(std::launch::async, expand, todo[j], &budgets[j]));
        }
        std::exception_ptr first_error;
        for (auto& j : jobs) {
          try {
            produced.push_back(j.get());
          } catch (...) {
            if (!first_error) first_error = std::current_exception();
          }
        }
        for (const auto& b : budgets) budget.used += b.used;
        if (first_error) std::rethrow_exception(first_error);
        if (limits.max_solver_steps > 0 && budget.used > limits.max_solver_steps) throw SolverBudgetExceeded();
      } else {
        for (std::size_t id : todo) {
          produced.push_back(expand(id, &budget));
          // merge eagerly so a failure leaves the partial tree up to date
          result.tree.nodes[id].centers = produced.back().first;
          result.tree.nodes[id].expanded = true;
          for (auto& child : produced.back().second) {
            if (result.tree.nodes.size() >= limits.max_nodes) throw fail("node cap exceeded");
            child.parent = static_cast<int>(id);
            detail::check_child_weights(result.tree.nodes[id], child, k);
            result.tree.nodes[id].children.push_back(static_cast<int>(result.tree.nodes.size()));
            result.tree.nodes.push_back(std::move(child));
          }
        }
        produced.clear();
      }
    } catch (const SolverBudgetExceeded&) {
      throw fail("solver step cap exceeded");
    } catch (const DecompositionCapExceeded&) {
      throw fail("decomposition cap exceeded");
    } catch (const WitnessSearchExhausted& e) {
      throw fail(std::string("witness search exhausted: ") + e.what());
    }
    for (std::size_t j = 0; j < produced.size(); ++j) {
      std::size_t id = todo[j];
      result.tree.nodes[id].centers = produced[j].first;
      result.tree.nodes[id].expanded = true;
      for (auto& child : produced[j].second) {
        if (result.tree.nodes.size() >= limits.max_nodes) throw fail("node cap exceeded");
        child.parent = static_cast<int>(id);
        detail::check_child_weights(result.tree.nodes[id], child, k);
        result.tree.nodes[id].children.push_back(static_cast<int>(result.tree.nodes.size()));
        result.tree.nodes.push_back(std::move(child));
      }
    }
    if (observe) observe(result.tree);
    begin = end;
  }

  std::vector<PathScheme> marked;
  for (const auto& n : result.tree.nodes)
    if (n.marked) marked.push_back(n.scheme);
  sort_unique(marked);
  std::vector<Nfa> parts;
  for (const auto& p : marked) parts.push_back(scheme_to_nfa(p, k));
  result.nfa = parts.empty() ? empty_nfa(k) : nfa_union(parts, k);
  result.solver_steps = budget.used;
  return result;
}

// One line per node in depth-first order, indented by level:
// level, mark flag, scheme, weight vector, provenance.
inline std::string dump_tree(const DecompositionTree& tree, const Cvas& cvas) {
  std::ostringstream out;
  if (tree.empty()) {
    out << "(empty language)\n";
    return out.str();
  }
  std::function<void(int)> emit = [&](int id) {
    const auto& n = tree.nodes[id];
    out << std::string(2 * static_cast<std::size_t>(n.level), ' ') << n.level << ' ' << (n.marked ? '*' : '-') << ' '
        << format_scheme(n.scheme, cvas) << ' ' << format_weight(weight(n.scheme, tree.alphabet)) << ' '
        << provenance_name(n.provenance) << '\n';
    for (int c : n.children) emit(c);
  };
  emit(0);
  return out.str();
}

struct AuditReport {
  std::vector<std::string> violations;
  std::size_t words_checked = 0;
  std::size_t members = 0;

  bool ok() const { return violations.empty(); }
};

// Checks the tree invariants: parity and perfection of odd nodes, every
// node meeting the language, the weight orders, marked leaves being
// childless subsets of the language, strict descent between odd levels, and
// that the leaves cover every member up to the word-length cap.
inline AuditReport audit_tree(const DecompositionTree& tree, const Cvas& cvas, const Configuration& x,
                              const Configuration& y, int word_len_cap, SolverBudget* budget = nullptr) {
  AuditReport rep;
  const int k = cvas.size();
  auto name = [&](std::size_t i) { return "node " + std::to_string(i) + " " + format_scheme(tree.nodes[i].scheme, cvas); };
  detail::MeetsCache cache;
  if (!tree.empty()) cache.seed(cvas, x, y, budget, 400);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (n.parent >= 0 && tree.nodes[n.parent].level + 1 != n.level) rep.violations.push_back(name(i) + ": level gap");
    bool meets = cache.meets(cvas, n.scheme, x, y, budget);
    if (n.level % 2 == 1 && !(n.scheme.pre_perfect() && meets))
      rep.violations.push_back(name(i) + ": C0 odd node not perfect");
    if (!meets) rep.violations.push_back(name(i) + ": C0 misses the language");
    if (n.parent >= 0) {
      const auto& p = tree.nodes[n.parent];
      auto wc = weight(n.scheme, k), wp = weight(p.scheme, k);
      if (n.level % 2 == 1 && !lex_leq(wc, wp)) rep.violations.push_back(name(i) + ": C1 weight above parent");
      if (n.level % 2 == 0 && !n.marked && !lex_less(wc, wp))
        rep.violations.push_back(name(i) + ": C2 weight not below parent");
      if (n.level % 2 == 1 && p.parent >= 0) {
        const auto& g = tree.nodes[p.parent];
        if (!lex_less(wc, weight(g.scheme, k))) rep.violations.push_back(name(i) + ": no descent across odd levels");
      }
    }
    if (n.marked && !n.children.empty()) rep.violations.push_back(name(i) + ": C3 marked node has children");
    if (n.marked && n.level % 2 != 0) rep.violations.push_back(name(i) + ": marked node on odd level");
  }
  if (word_len_cap < 0) return rep;
  auto leaves = tree.leaves();
  std::vector<Nfa> leaf_nfa;
  for (int l : leaves) leaf_nfa.push_back(scheme_to_nfa(tree.nodes[l].scheme, k));
  Word w;
  std::function<void()> walk = [&]() {
    ++rep.words_checked;
    bool in = member(cvas, w, x, y, budget).has_value();
    if (in) ++rep.members;
    bool covered = false;
    for (std::size_t j = 0; j < leaves.size(); ++j) {
      if (!accepts(leaf_nfa[j], w)) continue;
      covered = true;
      if (tree.nodes[leaves[j]].marked && !in)
        rep.violations.push_back(name(leaves[j]) + ": C3 accepts non-member " + cvas.format_word(w));
    }
    if (in && !covered) rep.violations.push_back("C4 member not covered: " + cvas.format_word(w));
    if (static_cast<int>(w.size()) == word_len_cap) return;
    for (int l = 0; l < k; ++l) {
      w.push_back(l);
      walk();
      w.pop_back();
    }
  };
  if (!tree.empty()) {
    walk();
  } else {
    // an empty tree claims the empty language
    std::function<void()> empty_walk = [&]() {
      ++rep.words_checked;
      if (member(cvas, w, x, y, budget)) rep.violations.push_back("member in claimed empty language: " + cvas.format_word(w));
      if (static_cast<int>(w.size()) == word_len_cap) return;
      for (int l = 0; l < k; ++l) {
        w.push_back(l);
        empty_walk();
        w.pop_back();
      }
    };
    empty_walk();
  }
  return rep;
}

}  // namespace cvasreg

#endif  // CVASREG_ENGINE_HPP
