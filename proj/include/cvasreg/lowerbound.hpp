#ifndef CVASREG_LOWERBOUND_HPP
#define CVASREG_LOWERBOUND_HPP

#include <cvasreg/cvas.hpp>
#include <cvasreg/linear.hpp>

#include <gmpxx.h>

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvasreg {

class ScaleCapExceeded : public std::runtime_error {
 public:
  explicit ScaleCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// exp_0(n) = n, exp_{h+1}(n) = 2^{exp_h(n)}; throws when the exponent
// exceeds `max_bits`.
inline mpz_class tower(unsigned h, const mpz_class& n, unsigned long max_bits = 1u << 20) {
  mpz_class v = n;
  for (unsigned i = 0; i < h; ++i) {
    if (!v.fits_ulong_p() || v.get_ui() > max_bits) throw ScaleCapExceeded("tower value too large");
    mpz_class next;
    mpz_ui_pow_ui(next.get_mpz_t(), 2, v.get_ui());
    v = next;
  }
  return v;
}

// The family of systems with 5h counters laid out as
// x_1..x_h, y_1..y_h, xbar_1..xbar_h, ybar_1..ybar_h, step_1..step_h.
struct LowerBoundInstance {
  int h = 0;
  Cvas cvas{0, {}};

  int x(int i) const { return i - 1; }
  int y(int i) const { return h + i - 1; }
  int xbar(int i) const { return 2 * h + i - 1; }
  int ybar(int i) const { return 3 * h + i - 1; }
  int step(int i) const { return 4 * h + i - 1; }

  int t(int i, int j) const { return cvas.index_of("t_" + std::to_string(i) + "_" + std::to_string(j)); }
  int r(int i) const { return cvas.index_of("r_" + std::to_string(i)); }
  int f(int j) const { return cvas.index_of("f_" + std::to_string(j)); }
  int g(int j) const { return cvas.index_of("g_" + std::to_string(j)); }

  Word w(int i) const {
    Word out;
    for (int j = 1; j <= 6; ++j) out.push_back(t(i, j));
    return out;
  }

  Word reset_all() const {
    Word out;
    for (int j = 1; j <= h; ++j) {
      out.push_back(f(j));
      out.push_back(g(j));
    }
    return out;
  }

  // w_1^{l_1} r_1 ... w_h^{l_h} r_h u
  Word word(const std::vector<long>& exponents) const {
    if (static_cast<int>(exponents.size()) != h) throw std::invalid_argument("one exponent per stage expected");
    Word out;
    for (int i = 1; i <= h; ++i) {
      Word wi = w(i);
      for (long e = 0; e < exponents[i - 1]; ++e) out.insert(out.end(), wi.begin(), wi.end());
      out.push_back(r(i));
    }
    Word u = reset_all();
    out.insert(out.end(), u.begin(), u.end());
    return out;
  }
};

inline LowerBoundInstance generate_lower_bound(int h) {
  if (h < 1) throw std::invalid_argument("h must be at least 1");
  LowerBoundInstance inst;
  inst.h = h;
  const int d = 5 * h;
  std::vector<Transition> ts;
  auto blank = [&] { return std::vector<long>(d, 0); };
  // hat(x_i) adds to x_i and takes from xbar_i
  auto hat_x = [&](std::vector<long>& e, int i, long c) {
    e[inst.x(i)] += c;
    e[inst.xbar(i)] -= c;
  };
  auto hat_y = [&](std::vector<long>& e, int i, long c) {
    e[inst.y(i)] += c;
    e[inst.ybar(i)] -= c;
  };
  for (int i = 1; i <= h; ++i) {
    auto name = [&](int j) { return "t_" + std::to_string(i) + "_" + std::to_string(j); };
    auto e1 = blank();
    hat_x(e1, i, -2);
    hat_y(e1, i, -1);
    for (int j = i + 1; j <= h; ++j) {
      hat_x(e1, j, -2);
      hat_y(e1, j, -2);
    }
    auto e2 = blank();
    hat_x(e2, i, 1);
    e2[inst.step(i)] = 1;
    auto e3 = blank();
    hat_x(e3, i, -1);
    e3[inst.step(i)] = 1;
    auto e4 = blank();
    for (int j = i; j <= h; ++j) {
      hat_x(e4, j, 1);
      hat_y(e4, j, 1);
    }
    auto e5 = blank();
    hat_y(e5, i, -1);
    e5[inst.step(i)] = 1;
    auto e6 = blank();
    hat_y(e6, i, 1);
    e6[inst.step(i)] = 1;
    ts.push_back({name(1), e1});
    ts.push_back({name(2), e2});
    ts.push_back({name(3), e3});
    ts.push_back({name(4), e4});
    ts.push_back({name(5), e5});
    ts.push_back({name(6), e6});
  }
  for (int i = 1; i <= h; ++i) {
    auto e = blank();
    e[inst.xbar(i)] = -1;
    for (int j = i + 1; j <= h; ++j) {
      e[inst.xbar(j)] = -1;
      e[inst.ybar(j)] = -1;
    }
    ts.push_back({"r_" + std::to_string(i), e});
  }
  for (int j = 1; j <= h; ++j) {
    auto ef = blank(), eg = blank();
    ef[inst.x(j)] = -1;
    eg[inst.y(j)] = -1;
    ts.push_back({"f_" + std::to_string(j), ef});
    ts.push_back({"g_" + std::to_string(j), eg});
  }
  inst.cvas = Cvas(d, ts);
  return inst;
}

// Source: every x_i, y_i at 1/n. Target: every step_i at 4.
inline std::pair<Configuration, Configuration> lower_bound_configs(int h, long n) {
  if (h < 1) throw std::invalid_argument("h must be at least 1");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  Configuration src(5 * h, Rational(0)), dst(5 * h, Rational(0));
  Rational v(1, n);
  v.canonicalize();
  for (int i = 0; i < 2 * h; ++i) src[i] = v;
  for (int i = 0; i < h; ++i) dst[4 * h + i] = 4;
  return {src, dst};
}

namespace detail {

inline Rational frac(const mpz_class& num, const mpz_class& den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Appends the reset word u with fractions equal to the current values.
inline void append_reset(const LowerBoundInstance& inst, Run& run, Configuration& cur) {
  for (int j = 1; j <= inst.h; ++j) {
    for (int which = 0; which < 2; ++which) {
      int ctr = which == 0 ? inst.x(j) : inst.y(j);
      int letter = which == 0 ? inst.f(j) : inst.g(j);
      run.steps.push_back({letter, cur[ctr]});
      cur = step(inst.cvas, cur, letter, cur[ctr]);
    }
  }
}

inline void fire(const LowerBoundInstance& inst, Run& run, Configuration& cur, int letter, const Rational& f) {
  run.steps.push_back({letter, f});
  cur = step(inst.cvas, cur, letter, f);
}

}  // namespace detail

// Stage lengths M_1 = n, M_{i+1} = M_i 2^{M_i}.
inline std::vector<mpz_class> maxed_out_lengths(int h, long n) {
  std::vector<mpz_class> m{mpz_class(n)};
  for (int i = 1; i < h; ++i) {
    if (!m.back().fits_ulong_p() || m.back().get_ui() > 62) throw ScaleCapExceeded("stage length too large");
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, m.back().get_ui());
    m.push_back(m.back() * p);
  }
  return m;
}

// The run in which every step-transition fires at full capacity: in
// iteration j (from 0) of stage i with parameter k, t_{i,1} and t_{i,4} use
// 1/(2^{j+1} k), the step-transitions 1/k, and r_i uses 1/k - 1/(2^k k).
inline Run maxed_out_run(const LowerBoundInstance& inst, long n, std::size_t max_steps = 2000000) {
  auto [src, dst] = lower_bound_configs(inst.h, n);
  auto lengths = maxed_out_lengths(inst.h, n);
  mpz_class total = 2 * inst.h;
  for (const auto& m : lengths) total += 6 * m + 1;
  if (total > max_steps) throw ScaleCapExceeded("maxed out run too long");
  Run run{src, {}};
  Configuration cur = src;
  for (int i = 1; i <= inst.h; ++i) {
    const mpz_class k = lengths[i - 1];
    const unsigned long iters = k.get_ui();
    const Rational full = detail::frac(1, k);
    mpz_class pow2 = 2;  // 2^{j+1}
    for (unsigned long j = 0; j < iters; ++j, pow2 *= 2) {
      Rational small = detail::frac(1, pow2 * k);
      detail::fire(inst, run, cur, inst.t(i, 1), small);
      detail::fire(inst, run, cur, inst.t(i, 2), full);
      detail::fire(inst, run, cur, inst.t(i, 3), full);
      detail::fire(inst, run, cur, inst.t(i, 4), small);
      detail::fire(inst, run, cur, inst.t(i, 5), full);
      detail::fire(inst, run, cur, inst.t(i, 6), full);
    }
    mpz_class pk;
    mpz_ui_pow_ui(pk.get_mpz_t(), 2, iters);
    detail::fire(inst, run, cur, inst.r(i), full - detail::frac(1, pk * k));
  }
  detail::append_reset(inst, run, cur);
  return run;
}

// Solves gamma * 4 (1/(2k) + 1) = 4, the scaling that makes 2k rounds of
// stage i add exactly 4 to its step counter.
inline Rational exponential_gamma(const mpz_class& k) { return detail::frac(2 * k, 2 * k + 1); }

// The run over w_1^{2n} r_1 w_2^{4n} r_2 ... w_h^{2^h n} r_h u: stage i
// with parameter k iterates 2k times, t_{i,1} and t_{i,4} at 1/(4k^2),
// t_{i,2} and t_{i,3} at gamma/(2k^2), t_{i,5} and t_{i,6} at gamma/k, then
// r_i at 1/(2k).
inline Run exponential_run(const LowerBoundInstance& inst, long n, std::size_t max_steps = 2000000) {
  auto [src, dst] = lower_bound_configs(inst.h, n);
  mpz_class total = 2 * inst.h, k = n;
  for (int i = 1; i <= inst.h; ++i, k *= 2) total += 12 * k + 1;
  if (total > max_steps) throw ScaleCapExceeded("exponential run too long");
  Run run{src, {}};
  Configuration cur = src;
  k = n;
  for (int i = 1; i <= inst.h; ++i, k *= 2) {
    const Rational gamma = exponential_gamma(k);
    const Rational quarter = detail::frac(1, 4 * k * k);
    const Rational mid = gamma * detail::frac(1, 2 * k * k);
    const Rational big = gamma * detail::frac(1, k);
    const unsigned long iters = mpz_class(2 * k).get_ui();
    for (unsigned long j = 0; j < iters; ++j) {
      detail::fire(inst, run, cur, inst.t(i, 1), quarter);
      detail::fire(inst, run, cur, inst.t(i, 2), mid);
      detail::fire(inst, run, cur, inst.t(i, 3), mid);
      detail::fire(inst, run, cur, inst.t(i, 4), quarter);
      detail::fire(inst, run, cur, inst.t(i, 5), big);
      detail::fire(inst, run, cur, inst.t(i, 6), big);
    }
    detail::fire(inst, run, cur, inst.r(i), detail::frac(1, 2 * k));
  }
  detail::append_reset(inst, run, cur);
  return run;
}

// All exponent tuples with l_1 <= n and l_{i+1} <= l_i 2^{l_i} whose word
// admits a run from the source to the target.
inline std::vector<std::vector<long>> brute_force_short_runs(const LowerBoundInstance& inst, long n,
                                                             std::size_t max_tuples = 4096,
                                                             SolverBudget* budget = nullptr) {
  auto [src, dst] = lower_bound_configs(inst.h, n);
  std::vector<std::vector<long>> tuples{{}};
  for (int i = 0; i < inst.h; ++i) {
    std::vector<std::vector<long>> next;
    for (const auto& t : tuples) {
      long bound = n;
      if (i > 0) {
        long prev = t.back();
        if (prev > 20) throw ScaleCapExceeded("exponent bound too large");
        bound = prev * (1L << prev);
      }
      for (long l = 0; l <= bound; ++l) {
        auto e = t;
        e.push_back(l);
        next.push_back(std::move(e));
        if (next.size() > max_tuples) throw ScaleCapExceeded("too many exponent tuples");
      }
    }
    tuples = std::move(next);
  }
  std::vector<std::vector<long>> out;
  for (const auto& t : tuples)
    if (member(inst.cvas, inst.word(t), src, dst, budget)) out.push_back(t);
  return out;
}

struct PumpingReport {
  std::size_t removals_checked = 0;
  std::vector<std::string> accepted;  // removals that were wrongly accepted
  bool ok() const { return accepted.empty() && removals_checked > 0; }
};

// Removing r >= 1 consecutive copies of w_i from the maxed out word must
// leave a word without a run from the source to the target.
inline PumpingReport pumping_falsification(const LowerBoundInstance& inst, long n, SolverBudget* budget = nullptr) {
  auto [src, dst] = lower_bound_configs(inst.h, n);
  auto lengths = maxed_out_lengths(inst.h, n);
  std::vector<long> base;
  for (const auto& m : lengths) {
    if (!m.fits_slong_p() || m.get_si() > 4096) throw ScaleCapExceeded("stage too long for pumping check");
    base.push_back(m.get_si());
  }
  PumpingReport rep;
  for (int i = 0; i < inst.h; ++i)
    for (long r = 1; r <= base[i]; ++r) {
      auto e = base;
      e[i] -= r;
      ++rep.removals_checked;
      if (member(inst.cvas, inst.word(e), src, dst, budget)) {
        std::ostringstream s;
        s << "stage " << (i + 1) << " minus " << r;
        rep.accepted.push_back(s.str());
      }
    }
  return rep;
}

struct LowerBoundRow {
  int h;
  long n;
  std::size_t run_length;
  long nfa_states = -1;  // -1 when the automaton was not built
  long dfa_states = -1;
};

inline std::string lower_bound_csv(const std::vector<LowerBoundRow>& rows) {
  std::ostringstream out;
  out << "h,n,run_length,nfa_states,dfa_states\n";
  auto cell = [](long v) { return v < 0 ? std::string("NA") : std::to_string(v); };
  for (const auto& r : rows)
    out << r.h << ',' << r.n << ',' << r.run_length << ',' << cell(r.nfa_states) << ',' << cell(r.dfa_states) << '\n';
  return out.str();
}

}  // namespace cvasreg

#endif  // CVASREG_LOWERBOUND_HPP
