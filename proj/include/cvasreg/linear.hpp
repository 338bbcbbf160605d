#ifndef CVASREG_LINEAR_HPP
#define CVASREG_LINEAR_HPP

#include <cvasreg/rational.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cvasreg {

enum class Relation { LessEq, Less, Equal, GreaterEq, Greater };

struct LinearTerm {
  int var;
  Rational coeff;
};

struct LinearConstraint {
  std::vector<LinearTerm> terms;
  Relation rel;
  Rational rhs;

  bool strict() const { return rel == Relation::Less || rel == Relation::Greater; }
};

// A conjunction of linear (in)equalities over rational variables. Variables
// are either sign-free or constrained to be non-negative.
class LinearSystem {
 public:
  explicit LinearSystem(int num_vars = 0, bool nonneg = true) : nonneg_(num_vars, nonneg) {}

  int add_variable(bool nonneg = true) {
    nonneg_.push_back(nonneg);
    return static_cast<int>(nonneg_.size()) - 1;
  }

  int num_variables() const { return static_cast<int>(nonneg_.size()); }
  bool is_nonneg(int v) const { return nonneg_.at(v); }

  void add_constraint(std::vector<LinearTerm> terms, Relation rel, Rational rhs) {
    for (const auto& t : terms)
      if (t.var < 0 || t.var >= num_variables()) throw std::out_of_range("linear term refers to unknown variable");
    constraints_.push_back({std::move(terms), rel, std::move(rhs)});
  }

  const std::vector<LinearConstraint>& constraints() const { return constraints_; }

  bool has_strict() const {
    for (const auto& c : constraints_)
      if (c.strict()) return true;
    return false;
  }

  bool satisfied_by(const std::vector<Rational>& point) const {
    if (static_cast<int>(point.size()) != num_variables()) return false;
    for (int v = 0; v < num_variables(); ++v)
      if (nonneg_[v] && sgn(point[v]) < 0) return false;
    for (const auto& c : constraints_) {
      Rational lhs = 0;
      for (const auto& t : c.terms) lhs += t.coeff * point[t.var];
      int cmp_ = cmp(lhs, c.rhs);
      switch (c.rel) {
        case Relation::LessEq: if (cmp_ > 0) return false; break;
        case Relation::Less: if (cmp_ >= 0) return false; break;
        case Relation::Equal: if (cmp_ != 0) return false; break;
        case Relation::GreaterEq: if (cmp_ < 0) return false; break;
        case Relation::Greater: if (cmp_ <= 0) return false; break;
      }
    }
    return true;
  }

 private:
  std::vector<bool> nonneg_;
  std::vector<LinearConstraint> constraints_;
};

class SolverBudgetExceeded : public std::runtime_error {
 public:
  SolverBudgetExceeded() : std::runtime_error("solver step budget exceeded") {}
};

// Counts simplex pivots across calls; a limit of 0 means unlimited.
struct SolverBudget {
  long long limit = 0;
  long long used = 0;

  void charge() {
    ++used;
    if (limit > 0 && used > limit) throw SolverBudgetExceeded();
  }
};

enum class LpStatus { Infeasible, Optimal, Unbounded };

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Rational value;
  std::vector<Rational> point;
};

namespace detail {

// Dense tableau simplex with Bland's rule. Row i reads
// sum_j a[i][j] x_j = a[i][n]; obj holds reduced costs z_j - c_j for a
// maximisation, with the current objective value in obj[n].
class Tableau {
 public:
  Tableau(int columns, SolverBudget* budget) : n_(columns), allowed_(columns, true), budget_(budget) {}

  void add_row(std::vector<Rational> row, int basic) {
    a_.push_back(std::move(row));
    basis_.push_back(basic);
  }

  int rows() const { return static_cast<int>(a_.size()); }
  int basic(int r) const { return basis_[r]; }
  const Rational& rhs(int r) const { return a_[r][n_]; }
  const Rational& objective_value() const { return obj_[n_]; }
  void disallow(int c) { allowed_[c] = false; }

  void set_objective(const std::vector<Rational>& cost) {
    obj_.assign(n_ + 1, Rational(0));
    for (int j = 0; j < n_; ++j) obj_[j] = -cost[j];
    for (int i = 0; i < rows(); ++i) {
      Rational k = obj_[basis_[i]];
      if (sgn(k) == 0) continue;
      for (int j = 0; j <= n_; ++j)
        if (sgn(a_[i][j]) != 0) obj_[j] -= k * a_[i][j];
    }
  }

  // Returns false when the objective is unbounded.
  bool optimise() {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < n_; ++j)
        if (allowed_[j] && sgn(obj_[j]) < 0) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      Rational best;
      for (int i = 0; i < rows(); ++i) {
        if (sgn(a_[i][enter]) <= 0) continue;
        Rational ratio = a_[i][n_] / a_[i][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void pivot(int r, int c) {
    if (budget_) budget_->charge();
    auto& prow = a_[r];
    if (prow[c] != 1) {
      Rational p = prow[c];
      for (int j = 0; j <= n_; ++j)
        if (sgn(prow[j]) != 0) prow[j] /= p;
    }
    std::vector<int> nz;
    for (int j = 0; j <= n_; ++j)
      if (sgn(prow[j]) != 0) nz.push_back(j);
    Rational f, tmp;
    for (int i = 0; i < rows(); ++i) {
      if (i == r || sgn(a_[i][c]) == 0) continue;
      f = a_[i][c];
      auto& row = a_[i];
      for (int j : nz) {
        mpq_mul(tmp.get_mpq_t(), f.get_mpq_t(), prow[j].get_mpq_t());
        mpq_sub(row[j].get_mpq_t(), row[j].get_mpq_t(), tmp.get_mpq_t());
      }
    }
    if (!obj_.empty() && sgn(obj_[c]) != 0) {
      f = obj_[c];
      for (int j : nz) {
        mpq_mul(tmp.get_mpq_t(), f.get_mpq_t(), prow[j].get_mpq_t());
        mpq_sub(obj_[j].get_mpq_t(), obj_[j].get_mpq_t(), tmp.get_mpq_t());
      }
    }
    basis_[r] = c;
  }

  // Pivots basic columns in `banned` out of the basis where possible and
  // drops rows that turn out to be redundant.
  void expel(const std::vector<bool>& banned) {
    for (int i = 0; i < rows();) {
      if (!banned[basis_[i]]) {
        ++i;
        continue;
      }
      int col = -1;
      for (int j = 0; j < n_; ++j)
        if (!banned[j] && sgn(a_[i][j]) != 0) {
          col = j;
          break;
        }
      if (col >= 0) {
        pivot(i, col);
        ++i;
      } else {
        a_.erase(a_.begin() + i);
        basis_.erase(basis_.begin() + i);
      }
    }
  }

  std::vector<Rational> values() const {
    std::vector<Rational> x(n_, Rational(0));
    for (int i = 0; i < rows(); ++i) x[basis_[i]] = a_[i][n_];
    return x;
  }

 private:
  int n_;
  std::vector<std::vector<Rational>> a_;
  std::vector<int> basis_;
  std::vector<Rational> obj_;
  std::vector<bool> allowed_;
  SolverBudget* budget_;
};

// Optimises a system without strict constraints.
inline LpOutcome run_simplex(const LinearSystem& sys, const std::vector<LinearTerm>* objective, SolverBudget* budget) {
  const int nv = sys.num_variables();
  // column layout: structural (positive part, then negative part for free
  // variables), slacks, artificials
  std::vector<int> pos_col(nv), neg_col(nv, -1);
  int cols = 0;
  for (int v = 0; v < nv; ++v) pos_col[v] = cols++;
  for (int v = 0; v < nv; ++v)
    if (!sys.is_nonneg(v)) neg_col[v] = cols++;
  const int structural = cols;

  struct Row {
    std::vector<Rational> coeff;
    Relation rel;
    Rational rhs;
  };
  std::vector<Row> rows;
  for (const auto& c : sys.constraints()) {
    if (c.strict()) throw std::invalid_argument("run_simplex expects non-strict constraints");
    Row row{std::vector<Rational>(structural, Rational(0)), c.rel, c.rhs};
    bool any = false;
    for (const auto& t : c.terms) {
      if (sgn(t.coeff) == 0) continue;
      row.coeff[pos_col[t.var]] += t.coeff;
      if (neg_col[t.var] >= 0) row.coeff[neg_col[t.var]] -= t.coeff;
    }
    for (const auto& q : row.coeff)
      if (sgn(q) != 0) any = true;
    if (!any) {
      int s = sgn(row.rhs);
      bool ok = (row.rel == Relation::LessEq && s >= 0) || (row.rel == Relation::Equal && s == 0) ||
                (row.rel == Relation::GreaterEq && s <= 0);
      if (!ok) return {};
      continue;
    }
    if (sgn(row.rhs) < 0) {
      for (auto& q : row.coeff) q = -q;
      row.rhs = -row.rhs;
      if (row.rel == Relation::LessEq)
        row.rel = Relation::GreaterEq;
      else if (row.rel == Relation::GreaterEq)
        row.rel = Relation::LessEq;
    }
    rows.push_back(std::move(row));
  }

  int slack_count = 0, art_count = 0;
  for (const auto& r : rows) {
    if (r.rel != Relation::Equal) ++slack_count;
    if (r.rel != Relation::LessEq) ++art_count;
  }
  const int total = structural + slack_count + art_count;
  Tableau tab(total, budget);
  std::vector<bool> artificial(total, false);
  int next_slack = structural, next_art = structural + slack_count;
  for (auto& r : rows) {
    std::vector<Rational> full(total + 1, Rational(0));
    for (int j = 0; j < structural; ++j) full[j] = r.coeff[j];
    full[total] = r.rhs;
    int basic;
    if (r.rel == Relation::LessEq) {
      full[next_slack] = 1;
      basic = next_slack++;
    } else {
      if (r.rel == Relation::GreaterEq) full[next_slack++] = -1;
      full[next_art] = 1;
      artificial[next_art] = true;
      basic = next_art++;
    }
    tab.add_row(std::move(full), basic);
  }

  if (art_count > 0) {
    std::vector<Rational> cost(total, Rational(0));
    for (int j = 0; j < total; ++j)
      if (artificial[j]) cost[j] = -1;
    tab.set_objective(cost);
    tab.optimise();
    if (sgn(tab.objective_value()) < 0) return {};
    tab.expel(artificial);
    for (int j = 0; j < total; ++j)
      if (artificial[j]) tab.disallow(j);
  }

  std::vector<Rational> cost(total, Rational(0));
  if (objective) {
    for (const auto& t : *objective) {
      cost[pos_col[t.var]] += t.coeff;
      if (neg_col[t.var] >= 0) cost[neg_col[t.var]] -= t.coeff;
    }
  }
  tab.set_objective(cost);
  LpOutcome out;
  if (!tab.optimise()) {
    out.status = LpStatus::Unbounded;
    return out;
  }
  auto x = tab.values();
  out.status = LpStatus::Optimal;
  out.point.assign(nv, Rational(0));
  for (int v = 0; v < nv; ++v) {
    out.point[v] = x[pos_col[v]];
    if (neg_col[v] >= 0) out.point[v] -= x[neg_col[v]];
  }
  out.value = 0;
  if (objective)
    for (const auto& t : *objective) out.value += t.coeff * out.point[t.var];
  return out;
}

}  // namespace detail

// Maximises a linear objective. Strict constraints are not supported here.
inline LpOutcome maximize(const LinearSystem& sys, const std::vector<LinearTerm>& objective,
                          SolverBudget* budget = nullptr) {
  return detail::run_simplex(sys, &objective, budget);
}

// Returns a satisfying point, or nothing when the system is infeasible.
// Strict constraints share a single slack epsilon that is maximised (capped
// at 1); the system is feasible iff that maximum is positive.
inline std::optional<std::vector<Rational>> solve_feasibility(const LinearSystem& sys,
                                                              SolverBudget* budget = nullptr) {
  if (!sys.has_strict()) {
    auto out = detail::run_simplex(sys, nullptr, budget);
    if (out.status == LpStatus::Infeasible) return std::nullopt;
    return out.point;
  }
  LinearSystem relaxed(0);
  for (int v = 0; v < sys.num_variables(); ++v) relaxed.add_variable(sys.is_nonneg(v));
  const int eps = relaxed.add_variable(true);
  for (const auto& c : sys.constraints()) {
    auto terms = c.terms;
    switch (c.rel) {
      case Relation::Less:
        terms.push_back({eps, Rational(1)});
        relaxed.add_constraint(std::move(terms), Relation::LessEq, c.rhs);
        break;
      case Relation::Greater:
        terms.push_back({eps, Rational(-1)});
        relaxed.add_constraint(std::move(terms), Relation::GreaterEq, c.rhs);
        break;
      default:
        relaxed.add_constraint(std::move(terms), c.rel, c.rhs);
    }
  }
  relaxed.add_constraint({{eps, Rational(1)}}, Relation::LessEq, Rational(1));
  std::vector<LinearTerm> objective{{eps, Rational(1)}};
  auto out = detail::run_simplex(relaxed, &objective, budget);
  if (out.status != LpStatus::Optimal || sgn(out.value) <= 0) return std::nullopt;
  out.point.pop_back();
  return out.point;
}

}  // namespace cvasreg

#endif  // CVASREG_LINEAR_HPP
