#include <cvasreg/scheme.hpp>

#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace cvasreg;
using namespace testing_support;

namespace {

const Cvas& abc() {
  static Cvas c(0, {{"a", {}}, {"b", {}}, {"c", {}}});
  return c;
}

PathScheme P(const char* s) { return parse_scheme(s, abc()); }
Word W(const char* s) { return abc().parse_word(s); }
Bubble G(const char* f, const char* l) { return Bubble::gathering(W(f), W(l)); }

bool union_accepts(const std::vector<PathScheme>& ps, const Word& w) {
  for (const auto& p : ps)
    if (scheme_accepts(p, w)) return true;
  return false;
}

}  // namespace

TEST(Gathering, ListedExamples) {
  auto g = G("abc", "abc");
  EXPECT_TRUE(matches_gathering(W("abcabc"), g));
  EXPECT_TRUE(matches_gathering(W("abcbcaabc"), g));
  for (const char* w : {"abcacb", "abcabcacb", "ababc"}) EXPECT_FALSE(matches_gathering(W(w), g)) << w;
  auto h = G("ab", "ba");
  EXPECT_TRUE(matches_gathering(W("abba"), h));
  EXPECT_FALSE(matches_gathering(W("aba"), h));
  EXPECT_FALSE(matches_gathering(W("abab"), h));
  EXPECT_EQ(gathering_center(W("abcbacabc"), g), W("bac"));
  EXPECT_EQ(gathering_center(W("abcabc"), g), W(""));
  EXPECT_FALSE(matches_gathering(W("a"), G("a", "a")));
  EXPECT_TRUE(matches_gathering(W("aa"), G("a", "a")));
}

// Segment form a1 w1 .. an wn b1 v1 .. bn vn and the positional criterion
// agree on every word.
TEST(Gathering, PositionalCriterionMatchesSegments) {
  auto words = all_words(3, 7);
  for (LetterSet a : {LetterSet(1), LetterSet(3), LetterSet(7)})
    for (const auto& f : permutations_of(a))
      for (const auto& l : permutations_of(a)) {
        Bubble g = Bubble::gathering(f, l);
        // segment check by backtracking
        for (const auto& w : words) {
          std::function<bool(std::size_t, std::size_t)> seg = [&](std::size_t pos, std::size_t i) -> bool {
            const std::size_t n = f.size();
            if (i == 2 * n) return pos == w.size();
            int letter = i < n ? f[i] : l[i - n];
            if (pos >= w.size() || w[pos] != letter) return false;
            LetterSet allowed = 0;
            if (i < n)
              for (std::size_t j = 0; j <= i; ++j) allowed |= letter_bit(f[j]);
            else {
              allowed = a;
              for (std::size_t j = n; j <= i; ++j) allowed &= ~letter_bit(l[j - n]);
            }
            for (std::size_t end = pos + 1;; ++end) {
              if (seg(end, i + 1)) return true;
              if (end >= w.size() || !(allowed & letter_bit(w[end]))) return false;
            }
          };
          ASSERT_EQ(seg(0, 0), matches_gathering(w, g));
        }
      }
}

TEST(Weight, ListedExamples) {
  EXPECT_EQ(weight(P("[A:ab]"), 3), (WeightVector{0, 1, 0}));
  EXPECT_EQ(weight(P("a[A:ab]c[G:abc/bac]"), 3), (WeightVector{0, 1, 1}));
  EXPECT_TRUE(lex_less({5, 5, 0}, {0, 0, 1}));
  EXPECT_TRUE(lex_less({0, 1, 1}, {0, 2, 1}));
  EXPECT_FALSE(lex_less({0, 1, 1}, {0, 1, 1}));
  EXPECT_TRUE(lex_leq({0, 1, 1}, {0, 1, 1}));
}

TEST(Flatten, ListedExamples) {
  EXPECT_EQ(format_scheme(flatten(G("a", "a")), abc()), "a[A:a]a");
  EXPECT_EQ(format_scheme(flatten(G("ab", "ba")), abc()), "a[A:a]b[A:ab]b[A:a]a");
  auto fl = flatten(G("abc", "abc"));
  EXPECT_EQ(fl.bubbles.size(), 5u);
  EXPECT_EQ(fl.bubbles[2], Bubble::star(7));
}

TEST(Notation, RoundTrip) {
  for (const char* s : {"a[A:ab]c[G:abc/bac]", "[A:]", "<eps>", "ab[G:a/a][A:abc]", "[G:ba/ab]cc"})
    EXPECT_EQ(format_scheme(P(s), abc()), s);
  EXPECT_EQ(format_scheme(P("[A:ba]"), abc()), "[A:ab]");
  EXPECT_THROW(P("[G:ab/a]"), ParseError);
  EXPECT_THROW(P("[X:ab]"), ParseError);
  EXPECT_THROW(P("ad"), ParseError);
  Cvas multi(0, {{"t1", {}}, {"t2", {}}});
  auto p = parse_scheme("t1.t2[A:t1.t2]t1[G:t1.t2/t2.t1]", multi);
  EXPECT_EQ(format_scheme(p, multi), "t1.t2[A:t1.t2]t1[G:t1.t2/t2.t1]");
}

TEST(Substitute, SplicesInPlace) {
  auto p = P("a[A:b]c[A:a]");
  EXPECT_EQ(format_scheme(substitute(p, 0, P("b[A:c]b")), abc()), "ab[A:c]bc[A:a]");
  EXPECT_EQ(format_scheme(substitute(p, 1, P("<eps>")), abc()), "a[A:b]c");
}

TEST(SchemeNfa, AgreesWithFactorisation) {
  auto words = all_words(3, 6);
  for (const char* s : {"a[A:ab]c[G:abc/bac]", "[A:a][A:b]", "[G:ab/ab][G:a/a]", "c[A:]b", "[A:ab]a[A:bc]"}) {
    auto p = P(s);
    Nfa n = scheme_to_nfa(p, 3);
    for (const auto& w : words) ASSERT_EQ(accepts(n, w), scheme_accepts(p, w)) << s;
  }
}

TEST(StarDecompose, SingletonAndCounts) {
  auto one = star_decompose(1);
  std::set<std::string> got;
  for (const auto& p : one) got.insert(format_scheme(p, abc()));
  EXPECT_EQ(got, (std::set<std::string>{"<eps>", "a", "[G:a/a]"}));
  EXPECT_EQ(star_decompose(0).size(), 1u);
  for (LetterSet a : {LetterSet(3), LetterSet(7)})
    for (const auto& p : star_decompose(a)) EXPECT_TRUE(p.pre_perfect());
}

// A^* equals the union of its decomposition, checked on all words up to
// length 8, for every alphabet of size at most 3.
TEST(StarDecompose, UnionIsTheFullStar) {
  auto words = all_words(3, 8);
  for (LetterSet a : {LetterSet(1), LetterSet(3), LetterSet(5), LetterSet(7)}) {
    auto parts = star_decompose(a);
    std::vector<Nfa> nfas;
    for (const auto& p : parts) nfas.push_back(scheme_to_nfa(p, 3));
    Nfa all = nfa_union(nfas, 3);
    for (const auto& w : words) ASSERT_EQ(accepts(all, w), (letters_of(w) & ~a) == 0);
  }
}

TEST(UpwardClosureAndComplement, PartitionTheGathering) {
  auto words = all_words(3, 8);
  struct Case {
    const char* f;
    const char* l;
    const char* center;
  };
  for (auto c : {Case{"abc", "abc", "bac"}, Case{"ab", "ba", "b"}, Case{"a", "a", "aa"}, Case{"abc", "cab", ""},
                 Case{"ab", "ab", "bab"}}) {
    Bubble g = G(c.f, c.l);
    Word center = W(c.center);
    auto up = upward_closure_scheme(g, center);
    auto comp = complement_schemes(g, center);
    EXPECT_EQ(comp.size(), center.size());
    EXPECT_TRUE(lex_less(weight(comp.empty() ? PathScheme{} : comp[0], 3), weight(PathScheme::of_bubble(g), 3)) ||
                comp.empty());
    for (const auto& w : words) {
      bool in_g = matches_gathering(w, g);
      bool in_up = scheme_accepts(up, w);
      bool in_comp = union_accepts(comp, w);
      if (in_g) {
        Word ctr = gathering_center(w, g);
        // subword test
        std::size_t j = 0;
        for (std::size_t i = 0; i < ctr.size() && j < center.size(); ++i)
          if (ctr[i] == center[j]) ++j;
        bool sub = j == center.size();
        ASSERT_EQ(in_up, sub);
        ASSERT_EQ(in_comp, !sub);
      } else {
        ASSERT_FALSE(in_up);
        ASSERT_FALSE(in_comp);
      }
    }
    for (const auto& s : comp) EXPECT_TRUE(lex_less(weight(s, 3), weight(PathScheme::of_bubble(g), 3)));
  }
}

TEST(SchemeLevel, UpwardClosureAndComplementOfPreperfect) {
  auto words = all_words(3, 8);
  auto rho = P("a[G:ab/ab]c[G:c/c]");
  std::vector<Word> centers{W("b"), W("c")};
  auto up = scheme_upward_closure(rho, centers);
  auto comp = scheme_complement(rho, centers);
  EXPECT_EQ(comp.size(), 2u);
  for (const auto& s : comp) EXPECT_TRUE(lex_less(weight(s, 3), weight(rho, 3)));
  for (const auto& w : words) {
    bool in_rho = scheme_accepts(rho, w);
    bool in_up = scheme_accepts(up, w);
    bool in_comp = union_accepts(comp, w);
    ASSERT_EQ(in_rho, in_up || in_comp);
    if (in_up) ASSERT_TRUE(in_rho);
  }
}

TEST(Factorize, FindsAllSplits) {
  auto rho = P("[A:a]a[A:a]");
  EXPECT_EQ(factorize(W("aaa"), rho).size(), 3u);
  auto g = P("a[G:ab/ba]c");
  auto fs = factorize(W("aabbac"), g);
  ASSERT_EQ(fs.size(), 1u);
  EXPECT_EQ(fs[0].parts[0], W("abba"));
  EXPECT_EQ(fs[0].offsets[0], 1u);
}

TEST(DecomposePruned, EqualsFilteredFullDecomposition) {
  // keep schemes accepting some word from a fixed sample set
  auto sample = all_words(3, 5);
  std::mt19937 rng(9);
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<Word> chosen;
    for (int i = 0; i < 3; ++i) chosen.push_back(sample[rng() % sample.size()]);
    auto keep = [&](const PathScheme& p) {
      for (const auto& w : chosen)
        if (scheme_accepts(p, w)) return true;
      return false;
    };
    for (const char* s : {"[A:abc]", "a[A:ab]", "[A:ab]c[A:bc]"}) {
      auto rho = P(s);
      std::vector<PathScheme> full;
      for (auto& p : decompose_to_preperfect(rho))
        if (keep(p)) full.push_back(p);
      EXPECT_EQ(decompose_pruned(rho, keep), full) << s;
    }
  }
}
