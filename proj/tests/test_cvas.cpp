#include <cvasreg/cvas.hpp>

#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace cvasreg;
using namespace testing_support;

namespace {

Run run_of(const Cvas& cvas, const std::string& word, std::vector<Rational> fr) {
  return make_run(running_source(), cvas.parse_word(word), fr);
}

}  // namespace

TEST(Cvas, DisplayedRunsReachTheTarget) {
  Cvas cvas = running_cvas();
  EXPECT_TRUE(run_reaches(cvas, run_of(cvas, "abbc", {q(1, 2), q(1, 4), q(1, 4), q(1, 4)}), running_target()));
  auto r1 = run_of(cvas, "abcabc", {q(1, 4), q(1, 8), q(1, 16), q(1, 4), q(3, 8), q(3, 16)});
  EXPECT_TRUE(run_reaches(cvas, r1, running_target()));
  auto dup = lift_duplication(r1);
  EXPECT_EQ(cvas.format_word(dup.word()), "aabbccaabbcc");
  std::vector<Rational> expected{q(1, 8), q(1, 8), q(1, 16), q(1, 16), q(1, 32), q(1, 32),
                                 q(1, 8), q(1, 8), q(3, 16), q(3, 16), q(3, 32), q(3, 32)};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(dup.steps[i].fraction, expected[i]);
  EXPECT_TRUE(run_reaches(cvas, dup, running_target()));
  auto r2 = run_of(cvas, "abcbacabc",
                   {q(1, 4), q(1, 8), q(1, 16), q(1, 16), q(1, 8), q(1, 16), q(1, 8), q(5, 16), q(1, 8)});
  EXPECT_TRUE(run_reaches(cvas, r2, running_target()));
}

TEST(Cvas, StepErrorNamesLowestCounter) {
  Cvas cvas(2, {{"t", {-1, -1}}});
  try {
    step(cvas, {0, 0}, 0, q(1, 2));
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.counter(), 0);
  }
  EXPECT_THROW(step(cvas, {1, 1}, 0, q(3, 2)), StepError);
  EXPECT_THROW(step(cvas, {1, 1}, 0, q(0)), StepError);
}

TEST(Cvas, MembershipOfListedWords) {
  Cvas cvas = running_cvas();
  for (const char* w : {"abbc", "abcabc", "aabbccaabbcc", "abcbacabc", "abcb"})
    EXPECT_TRUE(member(cvas, cvas.parse_word(w), running_source(), running_target())) << w;
  for (const char* w : {"bbc", "babcabc", "cabcabc", "acbcabc", "abcabca", "abcabac", ""})
    EXPECT_FALSE(member(cvas, cvas.parse_word(w), running_source(), running_target())) << w;
}

TEST(Cvas, MemberWitnessValidates) {
  Cvas cvas = running_cvas();
  auto w = cvas.parse_word("abcbacabc");
  auto fr = member(cvas, w, running_source(), running_target());
  ASSERT_TRUE(fr);
  EXPECT_TRUE(run_reaches(cvas, make_run(running_source(), w, *fr), running_target()));
}

TEST(Cvas, ZeroDimension) {
  Cvas cvas(0, {{"a", {}}, {"b", {}}});
  EXPECT_TRUE(member(cvas, cvas.parse_word("ab"), {}, {}));
  EXPECT_TRUE(member(cvas, {}, {}, {}));
}

TEST(Cvas, WordSyntax) {
  Cvas multi(1, {{"t1", {1}}, {"t2", {-1}}});
  EXPECT_EQ(multi.format_word(multi.parse_word("t1.t2.t1")), "t1.t2.t1");
  EXPECT_THROW(multi.parse_word("t3"), UnknownLetter);
  EXPECT_THROW(Cvas(1, {{"a", {1}}, {"a", {2}}}), std::invalid_argument);
}

// Membership is closed under duplicating every letter (halve each step).
TEST(CvasProperty, DuplicationPreservesMembership) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> eff(-2, 2), len(1, 6), den(1, 4);
  for (int trial = 0; trial < 150; ++trial) {
    int d = 1 + trial % 3;
    std::vector<Transition> ts;
    for (int t = 0; t < 3; ++t) {
      std::vector<long> e(d);
      for (auto& v : e) v = eff(rng);
      ts.push_back({std::string(1, char('a' + t)), e});
    }
    Cvas cvas(d, ts);
    Word w;
    int n = len(rng);
    for (int i = 0; i < n; ++i) w.push_back(rng() % 3);
    Configuration x(d);
    for (auto& v : x) v = q(rng() % 5, den(rng));
    // simulate a random run with small fractions to obtain a reachable target
    cvasreg::Run r{x, {}};
    Configuration cur = x;
    bool ok = true;
    for (int l : w) {
      Rational f(1, 1 + rng() % 8);
      try {
        cur = step(cvas, cur, l, f);
      } catch (const StepError&) {
        ok = false;
        break;
      }
      r.steps.push_back({l, f});
    }
    if (!ok) continue;
    auto fr = member(cvas, w, x, cur);
    ASSERT_TRUE(fr);
    auto dup = lift_duplication(r);
    EXPECT_TRUE(run_reaches(cvas, dup, cur));
    EXPECT_TRUE(member(cvas, dup.word(), x, cur));
  }
}
