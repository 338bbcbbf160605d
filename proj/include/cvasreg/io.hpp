#ifndef CVASREG_IO_HPP
#define CVASREG_IO_HPP

#include <cvasreg/automata.hpp>
#include <cvasreg/cvas.hpp>
#include <cvasreg/rational.hpp>

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cvasreg {

// Instance text format, one directive per line, '#' starts a comment:
//
//   dimension 3
//   transition a 1 0 0
//   transition b -1 1 0
//   source 0 0 0
//   target 0 1/4 1/4
//
// `dimension` comes first; `source` and `target` appear exactly once.
struct Instance {
  Cvas cvas;
  Configuration source;
  Configuration target;
};

namespace detail {

struct Token {
  std::string text;
  std::size_t offset;  // byte offset into the whole document
};

struct Line {
  std::size_t number;
  std::size_t offset;
  std::vector<Token> tokens;
};

inline std::vector<Line> tokenize_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t pos = 0, number = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    Line l{number, pos, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) l.tokens.push_back({std::string(line.substr(i, j - i)), pos + i});
      i = j;
    }
    if (!l.tokens.empty()) out.push_back(std::move(l));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

inline ParseError error_at(const Line& line, const Token& tok, const std::string& what) {
  return ParseError("line " + std::to_string(line.number) + ", column " +
                        std::to_string(tok.offset - line.offset + 1) + ": " + what,
                    tok.offset);
}

inline ParseError error_at(const Line& line, const std::string& what) {
  return ParseError("line " + std::to_string(line.number) + ": " + what, line.offset);
}

inline long parse_integer(const Line& line, const Token& tok) {
  const std::string& s = tok.text;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw error_at(line, tok, "expected an integer, got '" + s + "'");
  for (std::size_t j = i; j < s.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) throw error_at(line, tok, "expected an integer, got '" + s + "'");
  try {
    return std::stol(s);
  } catch (const std::out_of_range&) {
    throw error_at(line, tok, "integer out of range '" + s + "'");
  }
}

inline Rational parse_token_rational(const Line& line, const Token& tok) {
  try {
    return parse_rational(tok.text, tok.offset);
  } catch (const ParseError& e) {
    std::string what = e.what();
    what = what.substr(0, what.rfind(" at position"));
    throw error_at(line, tok, what);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace detail

inline Instance parse_instance(std::string_view text) {
  int dim = -1;
  std::vector<Transition> transitions;
  std::optional<Configuration> source, target;
  for (const auto& line : detail::tokenize_lines(text)) {
    const auto& head = line.tokens[0];
    const std::size_t args = line.tokens.size() - 1;
    if (head.text == "dimension") {
      if (dim >= 0) throw detail::error_at(line, head, "duplicate 'dimension'");
      if (args != 1) throw detail::error_at(line, head, "'dimension' takes one integer");
      long d = detail::parse_integer(line, line.tokens[1]);
      if (d < 0 || d > 63) throw detail::error_at(line, line.tokens[1], "dimension must lie in 0..63");
      dim = static_cast<int>(d);
      continue;
    }
    if (dim < 0) throw detail::error_at(line, head, "'dimension' must come first");
    if (head.text == "transition") {
      if (args < 1) throw detail::error_at(line, head, "'transition' needs a label");
      const auto& label = line.tokens[1];
      if (!valid_label(label.text)) throw detail::error_at(line, label, "invalid label '" + label.text + "'");
      for (const auto& t : transitions)
        if (t.label == label.text) throw detail::error_at(line, label, "duplicate label '" + label.text + "'");
      if (args - 1 != static_cast<std::size_t>(dim))
        throw detail::error_at(line, label, "expected " + std::to_string(dim) + " effect entries");
      Transition t{label.text, {}};
      for (std::size_t i = 2; i < line.tokens.size(); ++i) t.effect.push_back(detail::parse_integer(line, line.tokens[i]));
      transitions.push_back(std::move(t));
      if (transitions.size() > 64) throw detail::error_at(line, label, "at most 64 transitions are supported");
    } else if (head.text == "source" || head.text == "target") {
      auto& slot = head.text == "source" ? source : target;
      if (slot) throw detail::error_at(line, head, "duplicate '" + head.text + "'");
      if (args != static_cast<std::size_t>(dim))
        throw detail::error_at(line, head, "expected " + std::to_string(dim) + " entries");
      Configuration c;
      for (std::size_t i = 1; i < line.tokens.size(); ++i) {
        c.push_back(detail::parse_token_rational(line, line.tokens[i]));
        if (c.back() < 0) throw detail::error_at(line, line.tokens[i], "configuration entries must be non-negative");
      }
      slot = std::move(c);
    } else {
      throw detail::error_at(line, head, "unknown directive '" + head.text + "'");
    }
  }
  if (dim < 0) throw ParseError("missing 'dimension'", text.size());
  if (!source) throw ParseError("missing 'source'", text.size());
  if (!target) throw ParseError("missing 'target'", text.size());
  return {Cvas(dim, std::move(transitions)), std::move(*source), std::move(*target)};
}

inline std::string format_instance(const Cvas& cvas, const Configuration& source, const Configuration& target) {
  std::ostringstream os;
  os << "dimension " << cvas.dimension() << "\n";
  for (const auto& t : cvas.transitions()) {
    os << "transition " << t.label;
    for (long e : t.effect) os << ' ' << e;
    os << "\n";
  }
  auto config = [&](const char* key, const Configuration& c) {
    os << key;
    for (const auto& v : c) os << ' ' << to_string(v);
    os << "\n";
  };
  config("source", source);
  config("target", target);
  return os.str();
}

inline std::string format_instance(const Instance& inst) { return format_instance(inst.cvas, inst.source, inst.target); }

inline Instance load_instance(const std::string& path) { return parse_instance(detail::read_file(path)); }

// Regular-expression sugar over the declared labels: union '|', star '*',
// parentheses, and concatenation by juxtaposition or '.'. With single
// character labels "abc" is three letters; otherwise labels are separated by
// '.' or whitespace. "()" denotes the empty word.
namespace detail {

class RegexParser {
 public:
  RegexParser(const Cvas& cvas, std::string_view text, std::size_t base)
      : cvas_(cvas), text_(text), base_(base), single_(cvas.single_char_labels()) {}

  Nfa parse() {
    Nfa a = alternation();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return a;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("regex column " + std::to_string(pos_ + 1) + ": " + what, base_ + pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  static bool label_char(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; }

  Nfa alternation() {
    Nfa a = concatenation();
    for (;;) {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '|') {
        ++pos_;
        a = nfa_union(a, concatenation());
      } else {
        return a;
      }
    }
  }

  Nfa concatenation() {
    Nfa a = from_word(cvas_.size(), {});
    for (;;) {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '.') {
        ++pos_;
        skip_space();
        if (pos_ >= text_.size() || !(label_char(text_[pos_]) || text_[pos_] == '(')) fail("expected an operand after '.'");
      }
      if (pos_ >= text_.size() || !(label_char(text_[pos_]) || text_[pos_] == '(')) return a;
      a = concat(a, repetition());
    }
  }

  Nfa repetition() {
    Nfa a = atom();
    for (;;) {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '*') {
        ++pos_;
        a = nfa_star(a);
      } else {
        return a;
      }
    }
  }

  Nfa atom() {
    if (text_[pos_] == '(') {
      ++pos_;
      Nfa a = alternation();
      skip_space();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return a;
    }
    std::size_t start = pos_;
    if (single_) {
      ++pos_;
    } else {
      while (pos_ < text_.size() && label_char(text_[pos_])) ++pos_;
    }
    std::string label(text_.substr(start, pos_ - start));
    const Transition* t = cvas_.find(label);
    if (!t) {
      pos_ = start;
      fail("unknown letter '" + label + "'");
    }
    return from_word(cvas_.size(), {cvas_.index_of(label)});
  }

  const Cvas& cvas_;
  std::string_view text_;
  std::size_t base_;
  bool single_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Nfa parse_regex(const Cvas& cvas, std::string_view text, std::size_t base = 0) {
  return detail::RegexParser(cvas, text, base).parse();
}

// Automaton text format over the labels of `cvas`:
//
//   states 3
//   initial 0
//   accepting 2
//   edge 0 a 1
//
// or a single line "regex EXPR". Letters must be declared by the instance.
inline Nfa parse_automaton(const Cvas& cvas, std::string_view text) {
  auto lines = detail::tokenize_lines(text);
  if (!lines.empty() && lines[0].tokens[0].text == "regex") {
    if (lines.size() != 1) throw detail::error_at(lines[1], "nothing may follow a 'regex' line");
    const auto& head = lines[0].tokens[0];
    std::size_t start = head.offset + head.text.size();
    std::size_t end = text.find('\n', start);
    std::string_view expr = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    expr = expr.substr(0, expr.find('#'));
    return parse_regex(cvas, expr, start);
  }
  Nfa a(cvas.size());
  bool sized = false;
  auto state = [&](const detail::Line& line, const detail::Token& tok) {
    long s = detail::parse_integer(line, tok);
    if (s < 0 || s >= a.num_states()) throw detail::error_at(line, tok, "state " + tok.text + " out of range");
    return static_cast<int>(s);
  };
  for (const auto& line : lines) {
    const auto& head = line.tokens[0];
    const std::size_t args = line.tokens.size() - 1;
    if (head.text == "states") {
      if (sized) throw detail::error_at(line, head, "duplicate 'states'");
      if (args != 1) throw detail::error_at(line, head, "'states' takes one integer");
      long n = detail::parse_integer(line, line.tokens[1]);
      if (n < 0 || n > 1000000) throw detail::error_at(line, line.tokens[1], "state count out of range");
      for (long s = 0; s < n; ++s) a.add_state();
      sized = true;
      continue;
    }
    if (!sized) throw detail::error_at(line, head, "'states' must come first");
    if (head.text == "initial" || head.text == "accepting") {
      for (std::size_t i = 1; i < line.tokens.size(); ++i) {
        int s = state(line, line.tokens[i]);
        head.text == "initial" ? a.set_initial(s) : a.set_accepting(s);
      }
    } else if (head.text == "edge") {
      if (args != 3) throw detail::error_at(line, head, "'edge' takes source, letter, target");
      int src = state(line, line.tokens[1]);
      const auto& label = line.tokens[2];
      if (!cvas.find(label.text)) throw detail::error_at(line, label, "unknown letter '" + label.text + "'");
      int dst = state(line, line.tokens[3]);
      a.add_edge(src, cvas.index_of(label.text), dst);
    } else {
      throw detail::error_at(line, head, "unknown directive '" + head.text + "'");
    }
  }
  if (!sized) throw ParseError("missing 'states'", text.size());
  return a;
}

inline std::string format_automaton(const Cvas& cvas, const Nfa& a) {
  std::ostringstream os;
  os << "states " << a.num_states() << "\n";
  auto list = [&](const char* key, const std::vector<int>& states) {
    if (states.empty()) return;
    os << key;
    for (int s : states) os << ' ' << s;
    os << "\n";
  };
  list("initial", a.initial_states());
  list("accepting", a.accepting_states());
  for (const auto& e : a.edges()) os << "edge " << e.src << ' ' << cvas.label(e.letter) << ' ' << e.dst << "\n";
  return os.str();
}

inline Nfa load_automaton(const Cvas& cvas, const std::string& path) {
  return parse_automaton(cvas, detail::read_file(path));
}

inline std::string nfa_to_dot(const Cvas& cvas, const Nfa& a) {
  return to_dot(a, [&](int l) { return cvas.label(l); });
}

}  // namespace cvasreg

#endif  // CVASREG_IO_HPP
