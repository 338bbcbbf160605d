#ifndef CVASREG_SCHEME_HPP
#define CVASREG_SCHEME_HPP

#include <cvasreg/automata.hpp>
#include <cvasreg/cvas.hpp>

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvasreg {

using LetterSet = std::uint64_t;

inline LetterSet letter_bit(int l) { return LetterSet(1) << l; }
inline int set_size(LetterSet s) { return std::popcount(s); }

inline LetterSet letters_of(const Word& w) {
  LetterSet s = 0;
  for (int l : w) s |= letter_bit(l);
  return s;
}

// Either a star B^* over a letter set, or a gathering given by its
// first-appearance and last-appearance records (two orderings of the same
// letter set).
struct Bubble {
  enum class Kind { Star, Gathering };
  Kind kind = Kind::Star;
  LetterSet letters = 0;
  std::vector<int> first, last;

  static Bubble star(LetterSet s) { return Bubble{Kind::Star, s, {}, {}}; }

  static Bubble gathering(std::vector<int> first, std::vector<int> last) {
    LetterSet a = letters_of(first);
    if (first.empty() || a != letters_of(last) || set_size(a) != static_cast<int>(first.size()) ||
        first.size() != last.size())
      throw std::invalid_argument("gathering records must be orderings of the same non-empty letter set");
    return Bubble{Kind::Gathering, a, std::move(first), std::move(last)};
  }

  bool is_star() const { return kind == Kind::Star; }
  bool is_gathering() const { return kind == Kind::Gathering; }
  int size() const { return set_size(letters); }

  auto operator<=>(const Bubble&) const = default;
  bool operator==(const Bubble&) const = default;
};

// u0 X1 u1 ... Xn un. words.size() == bubbles.size() + 1 always holds.
struct PathScheme {
  std::vector<Word> words{Word{}};
  std::vector<Bubble> bubbles;

  static PathScheme of_word(Word w) {
    PathScheme p;
    p.words[0] = std::move(w);
    return p;
  }

  static PathScheme of_bubble(Bubble b) {
    PathScheme p;
    p.bubbles.push_back(std::move(b));
    p.words.emplace_back();
    return p;
  }

  void append(const PathScheme& other) {
    words.back().insert(words.back().end(), other.words[0].begin(), other.words[0].end());
    for (std::size_t i = 0; i < other.bubbles.size(); ++i) {
      bubbles.push_back(other.bubbles[i]);
      words.push_back(other.words[i + 1]);
    }
  }

  bool pre_perfect() const {
    for (const auto& b : bubbles)
      if (!b.is_gathering()) return false;
    return true;
  }

  std::size_t length() const {
    std::size_t n = bubbles.size();
    for (const auto& w : words) n += w.size();
    return n;
  }

  auto operator<=>(const PathScheme&) const = default;
  bool operator==(const PathScheme&) const = default;
};

inline PathScheme concat_schemes(std::initializer_list<PathScheme> parts) {
  PathScheme out;
  for (const auto& p : parts) out.append(p);
  return out;
}

// ---------------------------------------------------------------------------
// gatherings on words

struct AppearanceRecords {
  std::vector<int> first, last;
  std::vector<std::size_t> first_pos, last_pos;
};

// Letters in order of first and of last appearance, with their positions.
inline AppearanceRecords appearance_records(const Word& w) {
  AppearanceRecords r;
  std::map<int, std::size_t> last_at;
  LetterSet seen = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(seen & letter_bit(w[i]))) {
      seen |= letter_bit(w[i]);
      r.first.push_back(w[i]);
      r.first_pos.push_back(i);
    }
    last_at[w[i]] = i;
  }
  std::vector<std::pair<std::size_t, int>> by_pos;
  for (auto [l, p] : last_at) by_pos.emplace_back(p, l);
  std::sort(by_pos.begin(), by_pos.end());
  for (auto [p, l] : by_pos) {
    r.last.push_back(l);
    r.last_pos.push_back(p);
  }
  return r;
}

inline bool matches_gathering(const Word& w, const Bubble& g) {
  if (!g.is_gathering() || w.empty()) return false;
  auto r = appearance_records(w);
  if (r.first != g.first || r.last != g.last) return false;
  return r.first_pos.back() < r.last_pos.front();
}

// The segment strictly between the first occurrence of the last letter of
// the first-appearance record and the last occurrence of the first letter of
// the last-appearance record.
inline Word gathering_center(const Word& w, const Bubble& g) {
  if (!matches_gathering(w, g)) throw std::invalid_argument("word does not match the gathering");
  auto r = appearance_records(w);
  return Word(w.begin() + static_cast<long>(r.first_pos.back()) + 1, w.begin() + static_cast<long>(r.last_pos.front()));
}

inline bool bubble_accepts(const Bubble& b, const Word& w) {
  if (b.is_star()) return (letters_of(w) & ~b.letters) == 0;
  return matches_gathering(w, b);
}

// ---------------------------------------------------------------------------
// weights

using WeightVector = std::vector<int>;

// Component i-1 counts the bubbles over exactly i letters, i = 1..k.
inline WeightVector weight(const PathScheme& p, int k) {
  WeightVector v(k, 0);
  for (const auto& b : p.bubbles) {
    int s = b.size();
    if (s > k) throw std::invalid_argument("bubble larger than the alphabet");
    if (s > 0) ++v[s - 1];
  }
  return v;
}

// Lexicographic order reading from the largest bubble size downwards.
inline bool lex_less(const WeightVector& a, const WeightVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("weight vectors of different length");
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

inline bool lex_leq(const WeightVector& a, const WeightVector& b) { return !lex_less(b, a); }

// ---------------------------------------------------------------------------
// automata

inline Nfa bubble_nfa(const Bubble& b, int k) {
  if (b.is_star()) return star_of_subalphabet(k, b.letters);
  return gathering_nfa(k, b.first, b.last);
}

inline Nfa scheme_to_nfa(const PathScheme& p, int k) {
  Nfa a = from_word(k, p.words[0]);
  for (std::size_t i = 0; i < p.bubbles.size(); ++i) {
    a = concat(a, bubble_nfa(p.bubbles[i], k));
    if (!p.words[i + 1].empty()) a = concat(a, from_word(k, p.words[i + 1]));
  }
  return a;
}

// Membership by direct factorisation, without building an automaton.
inline bool scheme_accepts(const PathScheme& p, const Word& w);

// ---------------------------------------------------------------------------
// decomposition of stars into gatherings

class DecompositionCapExceeded : public std::runtime_error {
 public:
  DecompositionCapExceeded() : std::runtime_error("star decomposition exceeds its scheme cap") {}
};

inline std::vector<int> letters_in_order(LetterSet s) {
  std::vector<int> out;
  for (int l = 0; l < 64; ++l)
    if (s >> l & 1) out.push_back(l);
  return out;
}

inline std::vector<std::vector<int>> permutations_of(LetterSet s) {
  std::vector<std::vector<int>> out;
  auto p = letters_in_order(s);
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline std::vector<LetterSet> subsets_of(LetterSet s, bool proper) {
  std::vector<LetterSet> out;
  for (LetterSet b = s;; b = (b - 1) & s) {
    if (!(proper && b == s)) out.push_back(b);
    if (b == 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The single-level terms of the decomposition of A^*: every gathering over
// A, X_B X_C for proper subsets B, C of A, and X_B a X_C for a in A and
// B, C subsets of A without a. The empty star has the single term epsilon.
inline std::vector<PathScheme> star_expansion_terms(LetterSet a, std::size_t cap = 0) {
  std::vector<PathScheme> out;
  auto check = [&] {
    if (cap && out.size() > cap) throw DecompositionCapExceeded();
  };
  if (a == 0) return {PathScheme{}};
  if (cap && set_size(a) > 8) throw DecompositionCapExceeded();
  auto perms = permutations_of(a);
  for (const auto& f : perms)
    for (const auto& l : perms) {
      out.push_back(PathScheme::of_bubble(Bubble::gathering(f, l)));
      check();
    }
  auto proper = subsets_of(a, true);
  for (LetterSet b : proper)
    for (LetterSet c : proper) {
      out.push_back(concat_schemes({PathScheme::of_bubble(Bubble::star(b)), PathScheme::of_bubble(Bubble::star(c))}));
      check();
    }
  for (int l : letters_in_order(a)) {
    auto rest = subsets_of(a & ~letter_bit(l), false);
    for (LetterSet b : rest)
      for (LetterSet c : rest) {
        out.push_back(concat_schemes({PathScheme::of_bubble(Bubble::star(b)), PathScheme::of_word({l}),
                                      PathScheme::of_bubble(Bubble::star(c))}));
        check();
      }
  }
  return out;
}

inline void sort_unique(std::vector<PathScheme>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Memoised full decomposition of stars into pre-perfect schemes.
class StarDecomposer {
 public:
  explicit StarDecomposer(std::size_t cap = 0) : cap_(cap) {}

  const std::vector<PathScheme>& decompose(LetterSet a) {
    auto it = memo_.find(a);
    if (it != memo_.end()) return it->second;
    std::vector<PathScheme> out;
    for (const auto& term : star_expansion_terms(a, cap_)) {
      for (auto& s : expand(term)) {
        out.push_back(std::move(s));
        if (cap_ && out.size() > cap_) throw DecompositionCapExceeded();
      }
    }
    sort_unique(out);
    return memo_.emplace(a, std::move(out)).first->second;
  }

  // Replaces every star in the scheme by each of its decompositions.
  std::vector<PathScheme> expand(const PathScheme& p) {
    std::vector<PathScheme> partial{PathScheme::of_word(p.words[0])};
    for (std::size_t i = 0; i < p.bubbles.size(); ++i) {
      const auto& b = p.bubbles[i];
      std::vector<PathScheme> next;
      if (b.is_gathering()) {
        for (auto& q : partial) {
          q.append(PathScheme::of_bubble(b));
          q.append(PathScheme::of_word(p.words[i + 1]));
          next.push_back(std::move(q));
        }
      } else {
        const auto& options = decompose(b.letters);
        for (const auto& q : partial)
          for (const auto& o : options) {
            PathScheme r = q;
            r.append(o);
            r.append(PathScheme::of_word(p.words[i + 1]));
            next.push_back(std::move(r));
            if (cap_ && next.size() > cap_) throw DecompositionCapExceeded();
          }
      }
      partial = std::move(next);
    }
    sort_unique(partial);
    return partial;
  }

 private:
  std::size_t cap_;
  std::map<LetterSet, std::vector<PathScheme>> memo_;
};

inline std::vector<PathScheme> star_decompose(LetterSet a, std::size_t cap = 0) {
  StarDecomposer d(cap);
  return d.decompose(a);
}

inline std::vector<PathScheme> decompose_to_preperfect(const PathScheme& p, std::size_t cap = 0) {
  StarDecomposer d(cap);
  return d.expand(p);
}

// Same result as filtering decompose_to_preperfect by `keep`, provided keep
// is monotone (keep(p) and L(p) contained in L(q) imply keep(q)). Stars are
// expanded one level at a time and branches failing `keep` are cut.
inline std::vector<PathScheme> decompose_pruned(const PathScheme& p, const std::function<bool(const PathScheme&)>& keep,
                                                std::size_t cap = 0) {
  std::vector<PathScheme> out;
  std::set<PathScheme> visited;
  std::size_t generated = 0;
  std::function<void(const PathScheme&)> visit = [&](const PathScheme& q) {
    if (!visited.insert(q).second) return;
    std::size_t star = q.bubbles.size();
    for (std::size_t i = 0; i < q.bubbles.size(); ++i)
      if (q.bubbles[i].is_star()) {
        star = i;
        break;
      }
    if (star == q.bubbles.size()) {
      out.push_back(q);
      return;
    }
    for (const auto& term : star_expansion_terms(q.bubbles[star].letters, cap)) {
      if (cap && ++generated > cap) throw DecompositionCapExceeded();
      PathScheme r;
      r.words[0] = q.words[0];
      for (std::size_t i = 0; i < q.bubbles.size(); ++i) {
        if (i == star)
          r.append(term);
        else
          r.append(PathScheme::of_bubble(q.bubbles[i]));
        r.append(PathScheme::of_word(q.words[i + 1]));
      }
      if (visited.count(r)) continue;
      if (keep(r)) visit(r);
    }
  };
  if (keep(p)) visit(p);
  sort_unique(out);
  return out;
}

// ---------------------------------------------------------------------------
// flattening, substitution, upward closure and complement

// a1 X{a1} a2 X{a1a2} ... an X_A b1 X{A-b1} ... X{A-b1..b(n-1)} bn; the
// n-th bubble (index n-1) is the central one.
inline PathScheme flatten(const Bubble& g) {
  if (!g.is_gathering()) throw std::invalid_argument("flatten expects a gathering");
  const std::size_t n = g.first.size();
  PathScheme out;
  LetterSet s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s |= letter_bit(g.first[i]);
    out.append(PathScheme::of_word({g.first[i]}));
    out.append(PathScheme::of_bubble(Bubble::star(s)));
  }
  for (std::size_t j = 0; j < n; ++j) {
    out.append(PathScheme::of_word({g.last[j]}));
    s &= ~letter_bit(g.last[j]);
    if (j + 1 < n) out.append(PathScheme::of_bubble(Bubble::star(s)));
  }
  return out;
}

// Splices `inner` in place of bubble j (0-based).
inline PathScheme substitute(const PathScheme& p, std::size_t j, const PathScheme& inner) {
  if (j >= p.bubbles.size()) throw std::out_of_range("no such bubble");
  PathScheme out = PathScheme::of_word(p.words[0]);
  for (std::size_t i = 0; i < p.bubbles.size(); ++i) {
    out.append(i == j ? inner : PathScheme::of_bubble(p.bubbles[i]));
    out.append(PathScheme::of_word(p.words[i + 1]));
  }
  return out;
}

// X_A c1 X_A c2 ... cm X_A.
inline PathScheme center_closure(LetterSet a, const Word& center) {
  PathScheme xi = PathScheme::of_bubble(Bubble::star(a));
  for (int c : center) {
    xi.append(PathScheme::of_word({c}));
    xi.append(PathScheme::of_bubble(Bubble::star(a)));
  }
  return xi;
}

inline void check_center(const Bubble& g, const Word& center) {
  if (!g.is_gathering()) throw std::invalid_argument("expected a gathering");
  if (letters_of(center) & ~g.letters) throw std::invalid_argument("center uses letters outside the gathering");
}

// Words of the gathering whose center contains `center` as a subword.
inline PathScheme upward_closure_scheme(const Bubble& g, const Word& center) {
  check_center(g, center);
  return substitute(flatten(g), g.first.size() - 1, center_closure(g.letters, center));
}

// Words of the gathering whose center avoids `center` as a subword: for
// i = 1..m, the central bubble becomes
// X{A-c1} c1 X{A-c2} c2 ... X{A-ci}. Empty stars are dropped.
inline std::vector<PathScheme> complement_schemes(const Bubble& g, const Word& center) {
  check_center(g, center);
  std::vector<PathScheme> out;
  PathScheme fl = flatten(g);
  for (std::size_t i = 0; i < center.size(); ++i) {
    PathScheme sigma;
    for (std::size_t j = 0; j <= i; ++j) {
      LetterSet rest = g.letters & ~letter_bit(center[j]);
      if (rest != 0) sigma.append(PathScheme::of_bubble(Bubble::star(rest)));
      if (j < i) sigma.append(PathScheme::of_word({center[j]}));
    }
    out.push_back(substitute(fl, g.first.size() - 1, sigma));
  }
  return out;
}

// Per-bubble upward closure of a pre-perfect scheme; centers[i] is the
// center chosen for bubble i.
inline PathScheme scheme_upward_closure(const PathScheme& p, const std::vector<Word>& centers) {
  if (!p.pre_perfect()) throw std::invalid_argument("scheme is not pre-perfect");
  if (centers.size() != p.bubbles.size()) throw std::invalid_argument("one center per bubble expected");
  PathScheme out = PathScheme::of_word(p.words[0]);
  for (std::size_t i = 0; i < p.bubbles.size(); ++i) {
    out.append(upward_closure_scheme(p.bubbles[i], centers[i]));
    out.append(PathScheme::of_word(p.words[i + 1]));
  }
  return out;
}

// The family p[sigma_i^j / i]: bubble i replaced by its j-th complement
// scheme, every other bubble kept.
inline std::vector<PathScheme> scheme_complement(const PathScheme& p, const std::vector<Word>& centers) {
  if (!p.pre_perfect()) throw std::invalid_argument("scheme is not pre-perfect");
  if (centers.size() != p.bubbles.size()) throw std::invalid_argument("one center per bubble expected");
  std::vector<PathScheme> out;
  for (std::size_t i = 0; i < p.bubbles.size(); ++i)
    for (const auto& s : complement_schemes(p.bubbles[i], centers[i])) out.push_back(substitute(p, i, s));
  return out;
}

// A factorisation of a word along a scheme: the infix matched by each
// bubble, plus the start offsets of those infixes.
struct RhoFactor {
  std::vector<Word> parts;
  std::vector<std::size_t> offsets;
};

inline std::vector<RhoFactor> factorize(const Word& w, const PathScheme& p, std::size_t limit = 0) {
  std::vector<RhoFactor> out;
  RhoFactor cur;
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t pos, std::size_t i) {
    if (limit && out.size() >= limit) return;
    const Word& u = p.words[i];
    if (pos + u.size() > w.size() || !std::equal(u.begin(), u.end(), w.begin() + static_cast<long>(pos))) return;
    pos += u.size();
    if (i == p.bubbles.size()) {
      if (pos == w.size()) out.push_back(cur);
      return;
    }
    for (std::size_t end = pos; end <= w.size(); ++end) {
      Word part(w.begin() + static_cast<long>(pos), w.begin() + static_cast<long>(end));
      if (p.bubbles[i].is_star() && end > pos && !(p.bubbles[i].letters & letter_bit(w[end - 1]))) break;
      if (!bubble_accepts(p.bubbles[i], part)) continue;
      cur.parts.push_back(part);
      cur.offsets.push_back(pos);
      go(end, i + 1);
      cur.parts.pop_back();
      cur.offsets.pop_back();
    }
  };
  go(0, 0);
  return out;
}

inline bool scheme_accepts(const PathScheme& p, const Word& w) { return !factorize(w, p, 1).empty(); }

// ---------------------------------------------------------------------------
// text notation: words as letter strings, stars as [A:abc], gatherings as
// [G:abc/bca]. With multi-character labels letters are separated by '.'.

inline std::string format_letters(const Cvas& cvas, const Word& w) { return cvas.format_word(w); }

inline std::string format_scheme(const PathScheme& p, const Cvas& cvas) {
  if (p.bubbles.empty() && p.words[0].empty()) return "<eps>";
  bool multi = !cvas.single_char_labels();
  std::string out;
  auto word = [&](const Word& w) {
    if (w.empty()) return;
    if (multi && !out.empty() && out.back() != ']') out += '.';
    out += cvas.format_word(w);
  };
  word(p.words[0]);
  for (std::size_t i = 0; i < p.bubbles.size(); ++i) {
    const auto& b = p.bubbles[i];
    if (b.is_star())
      out += "[A:" + cvas.format_word(letters_in_order(b.letters)) + "]";
    else
      out += "[G:" + cvas.format_word(b.first) + "/" + cvas.format_word(b.last) + "]";
    word(p.words[i + 1]);
  }
  return out;
}

inline PathScheme parse_scheme(std::string_view text, const Cvas& cvas) {
  PathScheme out;
  if (text == "<eps>") return out;
  std::size_t i = 0;
  auto letters = [&](std::string_view s, std::size_t at) {
    try {
      return cvas.parse_word(s);
    } catch (const UnknownLetter& e) {
      throw ParseError(e.what(), at);
    }
  };
  while (i < text.size()) {
    if (text[i] == '[') {
      std::size_t close = text.find(']', i);
      if (close == std::string_view::npos || i + 3 > close || text[i + 2] != ':')
        throw ParseError("malformed bubble", i);
      char kind = text[i + 1];
      std::string_view body = text.substr(i + 3, close - i - 3);
      if (kind == 'A') {
        out.append(PathScheme::of_bubble(Bubble::star(letters_of(letters(body, i + 3)))));
      } else if (kind == 'G') {
        std::size_t slash = body.find('/');
        if (slash == std::string_view::npos) throw ParseError("gathering needs two records", i);
        try {
          out.append(PathScheme::of_bubble(
              Bubble::gathering(letters(body.substr(0, slash), i + 3), letters(body.substr(slash + 1), i + 4 + slash))));
        } catch (const std::invalid_argument& e) {
          throw ParseError(e.what(), i);
        }
      } else {
        throw ParseError("unknown bubble kind", i + 1);
      }
      i = close + 1;
      if (i < text.size() && text[i] == '.') ++i;
    } else {
      std::size_t next = text.find('[', i);
      std::string_view chunk = text.substr(i, next == std::string_view::npos ? std::string_view::npos : next - i);
      if (!chunk.empty() && chunk.back() == '.') chunk.remove_suffix(1);
      out.append(PathScheme::of_word(letters(chunk, i)));
      i = next == std::string_view::npos ? text.size() : next;
    }
  }
  return out;
}

}  // namespace cvasreg

#endif  // CVASREG_SCHEME_HPP
