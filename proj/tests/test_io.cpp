#include <cvasreg/io.hpp>
#include <cvasreg/lowerbound.hpp>

#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace cvasreg;
using namespace testing_support;

namespace {

const char* kRunning =
    "dimension 3\n"
    "transition a 1 0 0\n"
    "transition b -1 1 0\n"
    "transition c 0 -1 1\n"
    "source 0 0 0\n"
    "target 0 1/4 1/4\n";

// Reference matcher for the regex sugar over single-letter labels.
bool regex_matches(const std::string& re, std::size_t& pos, const Word& w, std::size_t at, std::vector<std::size_t>& ends);

}  // namespace

TEST(Io, CanonicalInstanceRoundTrips) {
  Instance inst = parse_instance(kRunning);
  EXPECT_EQ(inst.cvas.size(), 3);
  EXPECT_EQ(inst.target, running_target());
  EXPECT_EQ(format_instance(inst), kRunning);
  for (int h = 1; h <= 2; ++h) {
    auto lb = generate_lower_bound(h);
    auto [x, y] = lower_bound_configs(h, 3);
    std::string text = format_instance(lb.cvas, x, y);
    EXPECT_EQ(format_instance(parse_instance(text)), text);
  }
}

TEST(Io, CommentsAndWhitespaceNormalize) {
  Instance inst = parse_instance("# header\n dimension 3  # d\n\ntransition a 1 0 0\ntransition b -1 1 0\n"
                                 "transition c 0 -1 1\nsource 0 0 0\ntarget 0 2/8 1/4\n");
  EXPECT_EQ(format_instance(inst), kRunning);
}

TEST(Io, MalformedInputsReportPositions) {
  auto fails = [](const std::string& text, const std::string& fragment) {
    try {
      parse_instance(text);
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
      return;
    }
    ADD_FAILURE() << "accepted: " << text;
  };
  fails("dimension 1\ntransition a 1\nsource 0\ntarget 1/0\n", "line 4, column 8");
  fails("dimension 1\ntransition a 1\nsource 0\ntarget 1/0\n", "zero denominator");
  fails("transition a 1\n", "'dimension' must come first");
  fails("dimension 2\ntransition a 1\n", "expected 2 effect entries");
  fails("dimension 1\ntransition a 1\ntransition a 2\nsource 0\ntarget 0\n", "duplicate label");
  fails("dimension 1\ntransition a x\nsource 0\ntarget 0\n", "expected an integer");
  fails("dimension 1\ntransition a 1\nsource -1\ntarget 0\n", "non-negative");
  fails("dimension 1\ntransition a 1\nsource 0\n", "missing 'target'");
  fails("dimension 1\nfoo\n", "unknown directive");
}

TEST(Io, AutomatonFormatRoundTrips) {
  Cvas cvas = running_cvas();
  Nfa a = parse_automaton(cvas, "states 3\ninitial 0\naccepting 2\nedge 0 a 1\nedge 1 b 1\nedge 1 c 2\n");
  EXPECT_TRUE(accepts(a, cvas.parse_word("abbc")));
  EXPECT_FALSE(accepts(a, cvas.parse_word("ab")));
  std::string text = format_automaton(cvas, a);
  EXPECT_EQ(format_automaton(cvas, parse_automaton(cvas, text)), text);
  EXPECT_THROW(parse_automaton(cvas, "states 1\nedge 0 d 0\n"), ParseError);
  EXPECT_THROW(parse_automaton(cvas, "states 1\nedge 0 a 1\n"), ParseError);
  EXPECT_TRUE(is_empty(parse_automaton(cvas, "states 0\n")));
}

TEST(Io, RegexSugarMatchesReference) {
  Cvas cvas = running_cvas();
  const std::vector<std::string> cases{"(a|b|c)*", "abc", "a*b", "(ab|c)*c", "a(b|())c", "(a.b)*|c*", "((a|b)*c)*", "()"};
  auto words = all_words(3, 6);
  for (const auto& re : cases) {
    Nfa a = parse_automaton(cvas, "regex " + re + "\n");
    for (const auto& w : words) {
      std::size_t pos = 0;
      std::vector<std::size_t> ends;
      regex_matches(re, pos, w, 0, ends);
      bool ref = std::find(ends.begin(), ends.end(), w.size()) != ends.end();
      EXPECT_EQ(accepts(a, w), ref) << re << " on " << cvas.format_word(w);
    }
  }
  EXPECT_THROW(parse_regex(cvas, "a(b"), ParseError);
  EXPECT_THROW(parse_regex(cvas, "ad"), ParseError);
  EXPECT_THROW(parse_regex(cvas, "a)"), ParseError);
}

TEST(Io, RegexWithLongLabels) {
  auto lb = generate_lower_bound(1);
  Nfa a = parse_regex(lb.cvas, "(t_1_1.t_1_2)* r_1");
  EXPECT_TRUE(accepts(a, lb.cvas.parse_word("t_1_1.t_1_2.t_1_1.t_1_2.r_1")));
  EXPECT_TRUE(accepts(a, lb.cvas.parse_word("r_1")));
  EXPECT_FALSE(accepts(a, lb.cvas.parse_word("t_1_1.r_1")));
}

TEST(Io, DotIsDeterministic) {
  Cvas cvas = running_cvas();
  Nfa a = parse_regex(cvas, "a(b|c)*");
  std::string dot = nfa_to_dot(cvas, a);
  EXPECT_EQ(dot, nfa_to_dot(cvas, parse_regex(cvas, "a(b|c)*")));
  EXPECT_NE(dot.find("doublecircle"), std::string::npos);
  EXPECT_NE(dot.find("label=\"b,c\""), std::string::npos);
}

namespace {

// Backtracking matcher that collects every end offset reachable from `at`.
// It parses `re` from `pos` (an alternation) and leaves `pos` after it.
void alt(const std::string& re, std::size_t& pos, const Word& w, const std::vector<std::size_t>& starts,
         std::vector<std::size_t>& ends);

void atom_ends(const std::string& re, std::size_t& pos, const Word& w, const std::vector<std::size_t>& starts,
               std::vector<std::size_t>& ends) {
  if (re[pos] == '(') {
    ++pos;
    alt(re, pos, w, starts, ends);
    ++pos;  // ')'
    return;
  }
  int letter = re[pos++] - 'a';
  for (std::size_t s : starts)
    if (s < w.size() && w[s] == letter) ends.push_back(s + 1);
}

void unique(std::vector<std::size_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void cat(const std::string& re, std::size_t& pos, const Word& w, const std::vector<std::size_t>& starts,
         std::vector<std::size_t>& ends) {
  std::vector<std::size_t> cur = starts;
  while (pos < re.size() && re[pos] != '|' && re[pos] != ')') {
    if (re[pos] == '.') {
      ++pos;
      continue;
    }
    std::size_t begin = pos;
    std::vector<std::size_t> next;
    atom_ends(re, pos, w, cur, next);
    if (pos < re.size() && re[pos] == '*') {
      while (pos < re.size() && re[pos] == '*') ++pos;
      std::size_t end = pos;
      std::vector<std::size_t> all = cur;
      std::vector<std::size_t> frontier = cur;
      for (;;) {
        std::vector<std::size_t> step;
        std::size_t p = begin;
        atom_ends(re, p, w, frontier, step);
        unique(step);
        std::vector<std::size_t> fresh;
        for (auto e : step)
          if (std::find(all.begin(), all.end(), e) == all.end()) fresh.push_back(e);
        if (fresh.empty()) break;
        all.insert(all.end(), fresh.begin(), fresh.end());
        frontier = fresh;
      }
      pos = end;
      next = all;
    }
    unique(next);
    cur = next;
  }
  ends.insert(ends.end(), cur.begin(), cur.end());
}

void alt(const std::string& re, std::size_t& pos, const Word& w, const std::vector<std::size_t>& starts,
         std::vector<std::size_t>& ends) {
  cat(re, pos, w, starts, ends);
  while (pos < re.size() && re[pos] == '|') {
    ++pos;
    cat(re, pos, w, starts, ends);
  }
  unique(ends);
}

bool regex_matches(const std::string& re, std::size_t& pos, const Word& w, std::size_t at,
                   std::vector<std::size_t>& ends) {
  alt(re, pos, w, {at}, ends);
  return !ends.empty();
}

}  // namespace
