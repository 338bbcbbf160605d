#ifndef CVASREG_CVAS_HPP
#define CVASREG_CVAS_HPP

#include <cvasreg/linear.hpp>
#include <cvasreg/rational.hpp>

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvasreg {

using Configuration = std::vector<Rational>;
using Word = std::vector<int>;

struct Transition {
  std::string label;
  std::vector<long> effect;
};

class UnknownLetter : public std::runtime_error {
 public:
  explicit UnknownLetter(const std::string& label) : std::runtime_error("unknown letter '" + label + "'") {}
};

inline bool valid_label(std::string_view label) {
  if (label.empty()) return false;
  for (char ch : label) {
    unsigned char u = static_cast<unsigned char>(ch);
    if (!(std::isalnum(u) || ch == '_')) return false;
  }
  return true;
}

// A continuous vector addition system: a finite set of labelled integer
// vectors. Letters of the alphabet are indices into the transition list.
class Cvas {
 public:
  Cvas() = default;
  Cvas(int dimension, std::vector<Transition> transitions) : dim_(dimension), transitions_(std::move(transitions)) {
    if (dim_ < 0) throw std::invalid_argument("negative dimension");
    if (transitions_.size() > 64) throw std::invalid_argument("at most 64 transitions are supported");
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
      const auto& t = transitions_[i];
      if (!valid_label(t.label)) throw std::invalid_argument("invalid transition label '" + t.label + "'");
      if (static_cast<int>(t.effect.size()) != dim_)
        throw std::invalid_argument("transition '" + t.label + "' has wrong dimension");
      if (!index_.emplace(t.label, static_cast<int>(i)).second)
        throw std::invalid_argument("duplicate transition label '" + t.label + "'");
    }
  }

  int dimension() const { return dim_; }
  int size() const { return static_cast<int>(transitions_.size()); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& transition(int letter) const { return transitions_.at(letter); }
  const std::vector<long>& effect(int letter) const { return transitions_.at(letter).effect; }
  const std::string& label(int letter) const { return transitions_.at(letter).label; }

  int index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw UnknownLetter(label);
    return it->second;
  }

  bool single_char_labels() const {
    for (const auto& t : transitions_)
      if (t.label.size() != 1) return false;
    return true;
  }

  // Words are written as concatenated letters when every label is a single
  // character and as '.'-separated labels otherwise.
  std::string format_word(const Word& w) const {
    std::string out;
    bool sep = !single_char_labels();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (sep && i) out += '.';
      out += label(w[i]);
    }
    return out;
  }

  Word parse_word(std::string_view text) const {
    Word w;
    if (text.empty()) return w;
    if (single_char_labels() && text.find('.') == std::string_view::npos) {
      for (char ch : text) w.push_back(index_of(std::string(1, ch)));
      return w;
    }
    std::size_t start = 0;
    for (;;) {
      std::size_t dot = text.find('.', start);
      w.push_back(index_of(std::string(text.substr(start, dot - start))));
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return w;
  }

  const Transition* find(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? nullptr : &transitions_[it->second];
  }

 private:
  int dim_ = 0;
  std::vector<Transition> transitions_;
  std::map<std::string, int> index_;
};

struct Step {
  int letter;
  Rational fraction;
};

struct Run {
  Configuration start;
  std::vector<Step> steps;

  Word word() const {
    Word w;
    for (const auto& s : steps) w.push_back(s.letter);
    return w;
  }
};

class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, std::size_t index, int counter)
      : std::runtime_error(what), index_(index), counter_(counter) {}
  std::size_t index() const { return index_; }
  int counter() const { return counter_; }

 private:
  std::size_t index_;
  int counter_;
};

inline Configuration apply_effect(const Configuration& x, const std::vector<long>& effect, const Rational& alpha) {
  Configuration out = x;
  for (std::size_t c = 0; c < out.size(); ++c)
    if (effect[c] != 0) out[c] += alpha * effect[c];
  return out;
}

// One firing x --(alpha t)--> x'. Fractions outside (0,1] and negative
// results are rejected; the error names the lowest offending counter.
inline Configuration step(const Cvas& cvas, const Configuration& x, int letter, const Rational& alpha,
                          std::size_t index = 0) {
  if (static_cast<int>(x.size()) != cvas.dimension()) throw std::invalid_argument("configuration has wrong dimension");
  if (sgn(alpha) <= 0 || alpha > 1)
    throw StepError("fraction " + alpha.get_str() + " outside (0,1] at step " + std::to_string(index), index, -1);
  Configuration out = apply_effect(x, cvas.effect(letter), alpha);
  for (std::size_t c = 0; c < out.size(); ++c)
    if (sgn(out[c]) < 0)
      throw StepError("counter " + std::to_string(c) + " becomes negative at step " + std::to_string(index), index,
                      static_cast<int>(c));
  return out;
}

// All configurations visited by the run, starting with run.start.
inline std::vector<Configuration> simulate(const Cvas& cvas, const Run& run) {
  std::vector<Configuration> configs{run.start};
  for (std::size_t i = 0; i < run.steps.size(); ++i)
    configs.push_back(step(cvas, configs.back(), run.steps[i].letter, run.steps[i].fraction, i));
  return configs;
}

inline bool run_reaches(const Cvas& cvas, const Run& run, const Configuration& target) {
  try {
    return simulate(cvas, run).back() == target;
  } catch (const StepError&) {
    return false;
  }
}

// Counters that are positive in x.
inline std::uint64_t support_mask(const Configuration& x) {
  std::uint64_t m = 0;
  for (std::size_t c = 0; c < x.size(); ++c)
    if (sgn(x[c]) > 0) m |= std::uint64_t(1) << c;
  return m;
}

inline std::uint64_t decrement_mask(const std::vector<long>& effect) {
  std::uint64_t m = 0;
  for (std::size_t c = 0; c < effect.size(); ++c)
    if (effect[c] < 0) m |= std::uint64_t(1) << c;
  return m;
}

inline std::uint64_t increment_mask(const std::vector<long>& effect) {
  std::uint64_t m = 0;
  for (std::size_t c = 0; c < effect.size(); ++c)
    if (effect[c] > 0) m |= std::uint64_t(1) << c;
  return m;
}

// Whether some choice of positive fractions keeps all counters non-negative
// along w from a configuration with positive counters `positive`. Only the
// supports matter: with rapidly shrinking fractions a positive counter stays
// positive.
inline bool forward_firable(const Cvas& cvas, const Word& w, std::uint64_t positive) {
  for (int a : w) {
    if (decrement_mask(cvas.effect(a)) & ~positive) return false;
    positive |= increment_mask(cvas.effect(a));
  }
  return true;
}

// The mirror image: w read backwards with negated effects from the target.
inline bool backward_firable(const Cvas& cvas, const Word& w, std::uint64_t positive) {
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    if (increment_mask(cvas.effect(*it)) & ~positive) return false;
    positive |= decrement_mask(cvas.effect(*it));
  }
  return true;
}

// Exact membership of w in the language from x to y: one linear program over
// the fractions. Returns the fractions of a witnessing run.
inline std::optional<std::vector<Rational>> member(const Cvas& cvas, const Word& w, const Configuration& x,
                                                   const Configuration& y, SolverBudget* budget = nullptr) {
  const int d = cvas.dimension();
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw std::invalid_argument("configuration has wrong dimension");
  for (const auto& v : {&x, &y})
    for (const auto& q : *v)
      if (sgn(q) < 0) throw std::invalid_argument("configurations must be non-negative");
  if (!forward_firable(cvas, w, support_mask(x)) || !backward_firable(cvas, w, support_mask(y))) return std::nullopt;
  const int n = static_cast<int>(w.size());
  LinearSystem sys(n, true);
  for (int i = 0; i < n; ++i) {
    sys.add_constraint({{i, Rational(1)}}, Relation::Greater, Rational(0));
    sys.add_constraint({{i, Rational(1)}}, Relation::LessEq, Rational(1));
  }
  for (int c = 0; c < d; ++c) {
    std::vector<LinearTerm> prefix;
    for (int i = 0; i < n; ++i) {
      long e = cvas.effect(w[i])[c];
      if (e == 0) continue;
      prefix.push_back({i, Rational(e)});
      if (e < 0) sys.add_constraint(prefix, Relation::GreaterEq, -x[c]);
    }
    sys.add_constraint(prefix, Relation::Equal, y[c] - x[c]);
  }
  return solve_feasibility(sys, budget);
}

inline Run make_run(const Configuration& start, const Word& w, const std::vector<Rational>& fractions) {
  Run r{start, {}};
  for (std::size_t i = 0; i < w.size(); ++i) r.steps.push_back({w[i], fractions.at(i)});
  return r;
}

// Every step t with fraction a becomes t t with fraction a/2 each.
inline Run lift_duplication(const Run& run) {
  Run out{run.start, {}};
  for (const auto& s : run.steps) {
    Rational half = s.fraction / 2;
    out.steps.push_back({s.letter, half});
    out.steps.push_back({s.letter, half});
  }
  return out;
}

}  // namespace cvasreg

#endif  // CVASREG_CVAS_HPP
