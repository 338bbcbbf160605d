#ifndef CVASREG_TESTS_COMMON_HPP
#define CVASREG_TESTS_COMMON_HPP

#include <cvasreg/cvas.hpp>

#include <functional>
#include <vector>

namespace testing_support {

using cvasreg::Configuration;
using cvasreg::Cvas;
using cvasreg::Rational;
using cvasreg::Word;

// The three-letter running example: a fills counter 0, b moves a unit from
// counter 0 to 1, c from counter 1 to 2.
inline Cvas running_cvas() {
  return Cvas(3, {{"a", {1, 0, 0}}, {"b", {-1, 1, 0}}, {"c", {0, -1, 1}}});
}
inline Configuration running_source() { return {0, 0, 0}; }
inline Configuration running_target() { return {0, Rational(1, 4), Rational(1, 4)}; }

// Words over 0..k-1 of length at most max_len, in length-lexicographic order.
inline std::vector<Word> all_words(int k, int max_len) {
  std::vector<Word> out{{}};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (int l = 0; l < k; ++l) {
        Word w = out[i];
        w.push_back(l);
        out.push_back(std::move(w));
      }
    begin = end;
  }
  return out;
}

inline Rational q(long p, long r = 1) {
  Rational v(p, r);
  v.canonicalize();
  return v;
}

}  // namespace testing_support

#endif
