#include <cvasreg/decider.hpp>

#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace cvasreg;
using namespace testing_support;

namespace {

Nfa random_nfa(std::mt19937& rng, int k, int n) {
  Nfa a(k);
  for (int s = 0; s < n; ++s) a.add_state(s == 0, rng() % 2 == 0 || s == n - 1);
  int edges = 1 + rng() % (n * k + 2);
  for (int i = 0; i < edges; ++i) a.add_edge(rng() % n, rng() % k, rng() % n);
  return a;
}

Cvas random_cvas(std::mt19937& rng, int d, int k) {
  std::vector<Transition> ts;
  for (int t = 0; t < k; ++t) {
    std::vector<long> e(d);
    for (auto& v : e) v = static_cast<long>(rng() % 3) - 1;
    ts.push_back({std::string(1, char('a' + t)), e});
  }
  return Cvas(d, ts);
}

// A random accepted word of bounded length, if the automaton has one.
std::optional<Word> random_accepted(std::mt19937& rng, const Nfa& nfa, int max_len) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    Word w;
    int len = rng() % (max_len + 1);
    std::vector<int> states = nfa.initial_states();
    for (int i = 0; i < len && !states.empty(); ++i) {
      int l = rng() % nfa.alphabet_size();
      states = step_set(nfa, states, l);
      w.push_back(l);
    }
    if (accepts(nfa, w)) return w;
  }
  return std::nullopt;
}

}  // namespace

// Global support saturation ignores the order imposed by the automaton:
// here b could only be enabled by a, but b loops before a.
TEST(Decider, OrderMattersRegression) {
  Cvas cvas(2, {{"a", {1, 0}}, {"b", {-1, 1}}});
  Nfa nfa(2);
  nfa.add_state(true, false);
  nfa.add_state(false, true);
  nfa.add_edge(0, 1, 0);
  nfa.add_edge(0, 0, 1);
  EXPECT_FALSE(regular_intersect_nonempty(cvas, nfa, {0, 0}, {q(1, 2), q(1, 4)}).nonempty);
  // the other order reaches it
  Nfa swapped(2);
  swapped.add_state(true, false);
  swapped.add_state(false, true);
  swapped.add_edge(0, 0, 1);
  swapped.add_edge(1, 1, 1);
  auto out = regular_intersect_nonempty(cvas, swapped, {0, 0}, {q(1, 2), q(1, 4)}, true);
  ASSERT_TRUE(out.nonempty);
  EXPECT_TRUE(run_reaches(cvas, *out.witness, {q(1, 2), q(1, 4)}));
}

TEST(Decider, RunningExampleSchemes) {
  Cvas cvas = running_cvas();
  auto x = running_source(), y = running_target();
  for (const char* s : {"[A:abc]", "a[A:abc]", "[G:abc/abc]", "abcabc", "abbc", "abc", "[G:ab/ab][A:c]"}) {
    auto out = regular_intersect_nonempty(cvas, scheme_to_nfa(parse_scheme(s, cvas), 3), x, y, true);
    EXPECT_TRUE(out.nonempty) << s;
    if (out.witness) {
      EXPECT_TRUE(run_reaches(cvas, *out.witness, y)) << s;
    }
  }
  for (const char* s : {"[A:ab]", "b[A:abc]", "[A:abc]a", "[G:c/c][A:abc]", "ab", "acb"})
    EXPECT_FALSE(scheme_meets(cvas, parse_scheme(s, cvas), x, y)) << s;
}

// Agreement with exhaustive bounded search on random small instances, half
// with a planted short witness.
TEST(Decider, AgreesWithBoundedSearch) {
  std::mt19937 rng(17);
  int planted = 0, nonempty = 0;
  for (int trial = 0; trial < 160; ++trial) {
    int d = 1 + trial % 2, k = 2 + trial % 2;
    Cvas cvas = random_cvas(rng, d, k);
    Nfa nfa = random_nfa(rng, k, 1 + trial % 3);
    Configuration x(d), y(d);
    for (auto& v : x) v = q(rng() % 3, 2);
    bool plant = trial % 2 == 0;
    if (plant) {
      auto w = random_accepted(rng, nfa, 4);
      if (!w) continue;
      Configuration cur = x;
      bool ok = true;
      for (int l : *w) {
        try {
          cur = step(cvas, cur, l, q(1, 1 + rng() % 4));
        } catch (const StepError&) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      y = cur;
      ++planted;
    } else {
      for (auto& v : y) v = q(rng() % 3, 2);
    }
    auto out = regular_intersect_nonempty(cvas, nfa, x, y, true);
    auto oracle = bounded_witness_search(cvas, nfa, x, y, 5);
    if (plant || oracle) {
      ASSERT_TRUE(out.nonempty) << "trial " << trial;
    }
    if (out.nonempty) {
      ++nonempty;
      ASSERT_TRUE(out.witness);
      ASSERT_TRUE(run_reaches(cvas, *out.witness, y));
      ASSERT_TRUE(accepts(nfa, out.witness->word()));
    }
    if (!out.nonempty) {
      ASSERT_FALSE(oracle) << "trial " << trial;
    }
  }
  EXPECT_GT(planted, 30);
  EXPECT_GT(nonempty, planted);
}

// The fixed-chain route for path schemes against the general automaton
// route on the scheme's automaton.
TEST(Decider, SchemeChainAgreesWithAutomatonRoute) {
  std::mt19937 rng(29);
  auto random_set = [&](int k) {
    LetterSet s = 0;
    while (!s) s = rng() % (LetterSet(1) << k);
    return s;
  };
  auto shuffled = [&](LetterSet s) {
    auto v = letters_in_order(s);
    std::shuffle(v.begin(), v.end(), rng);
    return v;
  };
  int yes = 0, no = 0;
  for (int trial = 0; trial < 150; ++trial) {
    int d = 1 + trial % 3, k = 2 + trial % 2;
    Cvas cvas = random_cvas(rng, d, k);
    PathScheme p;
    int parts = 1 + rng() % 3;
    for (int i = 0; i < parts; ++i) {
      Word w;
      for (int j = rng() % 3; j > 0; --j) w.push_back(rng() % k);
      p.append(PathScheme::of_word(w));
      LetterSet s = random_set(k);
      p.append(PathScheme::of_bubble(rng() % 2 ? Bubble::star(s) : Bubble::gathering(shuffled(s), shuffled(s))));
    }
    Nfa nfa = scheme_to_nfa(p, k);
    Configuration x(d), y(d);
    for (auto& v : x) v = q(rng() % 3, 2);
    if (auto w = random_accepted(rng, nfa, 8); w && trial % 2 == 0) {
      Configuration cur = x;
      bool ok = true;
      for (int l : *w) {
        try {
          cur = step(cvas, cur, l, q(1, 1 + rng() % 4));
        } catch (const StepError&) {
          ok = false;
          break;
        }
      }
      if (ok) y = cur;
    } else {
      for (auto& v : y) v = q(rng() % 3, 2);
    }
    bool general = regular_intersect_nonempty(cvas, nfa, x, y).nonempty;
    ASSERT_EQ(scheme_meets(cvas, p, x, y), general) << "trial " << trial;
    auto wit = scheme_witness(cvas, p, x, y);
    ASSERT_EQ(wit.has_value(), general);
    if (wit) {
      EXPECT_TRUE(run_reaches(cvas, *wit, y));
      EXPECT_TRUE(accepts(nfa, wit->word()));
    }
    general ? ++yes : ++no;
  }
  EXPECT_GT(yes, 30);
  EXPECT_GT(no, 30);
}

TEST(Decider, BoundedSearchFindsShortest) {
  Cvas cvas = running_cvas();
  auto r = bounded_witness_search(cvas, star_of_subalphabet(3, 7), running_source(), running_target(), 6);
  ASSERT_TRUE(r);
  EXPECT_EQ(cvas.format_word(r->word()), "abc");
  EXPECT_TRUE(run_reaches(cvas, *r, running_target()));
}

TEST(Canonical, RunningExampleGathering) {
  Cvas cvas = running_cvas();
  Bubble g = Bubble::gathering(cvas.parse_word("abc"), cvas.parse_word("abc"));
  auto w = canonical_gathering_witness(cvas, g, running_source(), running_target());
  EXPECT_TRUE(canonical_properties_hold(cvas, w));
  EXPECT_TRUE(run_reaches(cvas, w.run, running_target()));
  EXPECT_EQ(letters_of(w.center), g.letters);
}

TEST(Canonical, AuditRejectsBrokenPattern) {
  Cvas cvas = running_cvas();
  Bubble g = Bubble::gathering(cvas.parse_word("abc"), cvas.parse_word("abc"));
  auto word = cvas.parse_word("abcabcabc");
  std::vector<Rational> fr;
  for (int i = 0; i < 3; ++i) fr.insert(fr.end(), {q(1, 2), q(1, 4), q(1, 8)});
  // counter 0 returns to zero inside the prefix
  fr[1] = q(1, 2);
  CanonicalWitness cw{g, cvas.parse_word("abc"), make_run(running_source(), word, fr)};
  EXPECT_FALSE(canonical_properties_hold(cvas, cw));
  fr[1] = q(1, 4);
  CanonicalWitness ok{g, cvas.parse_word("abc"), make_run(running_source(), word, fr)};
  EXPECT_TRUE(canonical_properties_hold(cvas, ok));
}

TEST(Redistribute, RandomSuperwordsValidate) {
  Cvas cvas = running_cvas();
  Bubble g = Bubble::gathering(cvas.parse_word("abc"), cvas.parse_word("abc"));
  auto w = canonical_gathering_witness(cvas, g, running_source(), running_target());
  std::mt19937 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    // insert letters into the prefix, center and suffix respecting the record
    Word prefix;
    for (std::size_t i = 0; i < g.first.size(); ++i) {
      prefix.push_back(g.first[i]);
      int extra = rng() % 3;
      for (int e = 0; e < extra && i + 1 < g.first.size(); ++e) prefix.push_back(g.first[rng() % (i + 1)]);
    }
    Word center = w.center;
    int extra = rng() % 4;
    for (int e = 0; e < extra; ++e) center.insert(center.begin() + rng() % (center.size() + 1), rng() % 3);
    Word suffix;
    for (std::size_t i = g.last.size(); i-- > 0;) {
      int more = rng() % 3;
      Word chunk{g.last[i]};
      for (int e = 0; e < more && i + 1 < g.last.size(); ++e)
        chunk.push_back(g.last[i + 1 + rng() % (g.last.size() - i - 1)]);
      suffix.insert(suffix.begin(), chunk.begin(), chunk.end());
    }
    Word target = prefix;
    target.insert(target.end(), center.begin(), center.end());
    target.insert(target.end(), suffix.begin(), suffix.end());
    ASSERT_TRUE(matches_gathering(target, g)) << cvas.format_word(target);
    cvasreg::Run r = redistribute(cvas, w, target);
    ASSERT_EQ(r.word(), target);
    ASSERT_TRUE(run_reaches(cvas, r, running_target())) << cvas.format_word(target);
  }
}

TEST(Lift, PerfectSchemeLiftsAndRedistributes) {
  Cvas cvas = running_cvas();
  auto rho = parse_scheme("[G:ab/ab]c[G:c/c]", cvas);
  Configuration y{0, q(1, 4), q(1, 2)};
  ASSERT_TRUE(is_perfect(cvas, rho, running_source(), y));
  auto lw = lift_run_witness(cvas, rho, running_source(), y);
  EXPECT_TRUE(run_reaches(cvas, lw.run, y));
  for (const auto& b : lw.bubbles) EXPECT_TRUE(canonical_properties_hold(cvas, b));
  auto up = scheme_upward_closure(rho, lw.centers());
  int checked = 0;
  for (const auto& word : all_words(3, 10)) {
    if (!scheme_accepts(up, word)) continue;
    cvasreg::Run r = redistribute_scheme(cvas, lw, word);
    ASSERT_TRUE(run_reaches(cvas, r, y)) << cvas.format_word(word);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}
