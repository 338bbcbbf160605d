#ifndef CVASREG_RATIONAL_HPP
#define CVASREG_RATIONAL_HPP

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cvasreg {

using Rational = mpq_class;

// Raised by every text parser in the library; `pos` is a byte offset into the
// parsed input (or a column when the caller works line by line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at position " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

// Accepts "n", "-n", "p/q" with q > 0. The result is canonical.
inline Rational parse_rational(std::string_view text, std::size_t offset = 0) {
  if (text.empty()) throw ParseError("empty rational", offset);
  std::size_t i = 0;
  auto digits = [&](std::size_t start) {
    std::size_t j = start;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    return j;
  };
  if (text[0] == '-' || text[0] == '+') i = 1;
  std::size_t num_end = digits(i);
  if (num_end == i) throw ParseError("expected digits in rational '" + std::string(text) + "'", offset + i);
  mpz_class num(std::string(text.substr(i, num_end - i)));
  if (text[0] == '-') num = -num;
  mpz_class den = 1;
  if (num_end < text.size()) {
    if (text[num_end] != '/') throw ParseError("unexpected character in rational '" + std::string(text) + "'", offset + num_end);
    std::size_t den_end = digits(num_end + 1);
    if (den_end == num_end + 1 || den_end != text.size())
      throw ParseError("malformed denominator in rational '" + std::string(text) + "'", offset + num_end + 1);
    den = mpz_class(std::string(text.substr(num_end + 1, den_end - num_end - 1)));
    if (den == 0) throw ParseError("zero denominator in rational '" + std::string(text) + "'", offset + num_end + 1);
  }
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline std::string to_string(const std::vector<Rational>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += v[i].get_str();
  }
  return out + ")";
}

}  // namespace cvasreg

#endif  // CVASREG_RATIONAL_HPP
