#ifndef MOT_LP_HPP
#define MOT_LP_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "mot/errors.hpp"
#include "mot/scalar.hpp"

namespace mot {

enum class Relation { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Infeasible, Unbounded };

/**
 * Dense linear program in the form
 *
 *     maximize  c . x   subject to   A_i . x  (<= | = | >=)  b_i,   x >= lb
 *
 * with lb defaulting to zero. Sizes here are at most a few thousand
 * variables, so a dense tableau is used throughout.
 */
template <class S>
struct LinearProgram {
    struct Row {
        std::vector<S> coeffs;
        Relation rel;
        S rhs;
    };

    std::vector<S> objective;
    std::vector<Row> rows;
    std::vector<S> lower_bounds;  // empty means all zero

    std::size_t num_vars() const { return objective.size(); }

    void add_row(std::vector<S> coeffs, Relation rel, S rhs) {
        rows.push_back(Row{std::move(coeffs), rel, std::move(rhs)});
    }
};

template <class S>
struct LpOptions {
    S pivot_tol = scalar_traits<S>::solver_tol();  // reduced-cost threshold
    S feas_tol = scalar_traits<S>::solver_tol();
    // Pivot elements below this are never eligible; keeps the tableau from
    // blowing up on near-degenerate columns.
    S element_tol = scalar_traits<S>::exact ? S(0) : S(1e-7);
    int degeneracy_limit = 64;  // stalled pivots before switching to Bland's rule
    long max_iters = 0;         // 0 = derived from the problem size
};

template <class S>
struct LpOutcome {
    LpStatus status = LpStatus::Optimal;
    std::vector<S> x;
    std::vector<S> duals;  // one multiplier per constraint row
    S objective = S(0);
    S primal_residual = S(0);
    S dual_residual = S(0);
    S duality_gap = S(0);
};

/**
 * Two-phase primal simplex on a dense tableau. Dantzig pricing with Bland's
 * rule as the anti-cycling fallback once a degeneracy counter trips; duals
 * are read from the reduced costs of the slack/artificial columns in the
 * final basis. Deterministic for identical input.
 */
template <class S>
class SimplexSolver {
  public:
    SimplexSolver(const LinearProgram<S>& lp, LpOptions<S> opts = {})
        : lp_(lp), opts_(opts) {}

    LpOutcome<S> solve() {
        build();
        LpOutcome<S> out;
        if (!phase_one()) {
            out.status = LpStatus::Infeasible;
            return out;
        }
        if (!phase_two()) {
            out.status = LpStatus::Unbounded;
            return out;
        }
        extract(out);
        return out;
    }

  private:
    const LinearProgram<S>& lp_;
    LpOptions<S> opts_;

    std::size_t n_ = 0;       // structural variables
    std::size_t m_ = 0;       // rows
    std::size_t n_total_ = 0; // structural + slack/surplus + artificial
    std::size_t rhs_ = 0;     // rhs column index
    std::vector<S> tab_;      // m_ x (n_total_ + 1), row-major
    std::vector<S> cost_;     // reduced-cost row, n_total_ + 1 entries
    std::vector<int> basis_;  // basic column per row
    std::vector<int> slack_col_;  // per row, -1 if none
    std::vector<int> art_col_;    // per row, -1 if none
    std::vector<bool> flipped_;   // row was negated to make rhs nonnegative
    std::vector<bool> is_artificial_;
    std::vector<S> shift_;    // lower bounds
    S obj_shift_ = S(0);
    long iterations_ = 0;
    long max_iters_ = 0;

    S& at(std::size_t r, std::size_t c) { return tab_[r * (n_total_ + 1) + c]; }
    const S& at(std::size_t r, std::size_t c) const { return tab_[r * (n_total_ + 1) + c]; }

    void build() {
        n_ = lp_.num_vars();
        m_ = lp_.rows.size();
        shift_.assign(n_, S(0));
        if (!lp_.lower_bounds.empty()) {
            if (lp_.lower_bounds.size() != n_) throw Error("lp: lower bound size mismatch");
            shift_ = lp_.lower_bounds;
        }
        obj_shift_ = S(0);
        for (std::size_t j = 0; j < n_; ++j) obj_shift_ += lp_.objective[j] * shift_[j];

        std::size_t n_slack = 0, n_art = 0;
        for (const auto& row : lp_.rows) {
            if (row.rel != Relation::Equal) ++n_slack;
            if (row.rel != Relation::LessEq) ++n_art;
        }
        // Rows flipped to nonnegative rhs swap their relation, so the
        // slack/artificial census must use the flipped relations.
        std::vector<Relation> rel(m_);
        std::vector<S> rhs(m_);
        flipped_.assign(m_, false);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = lp_.rows[i];
            if (row.coeffs.size() != n_) throw Error("lp: row size mismatch");
            S b = row.rhs;
            for (std::size_t j = 0; j < n_; ++j) b -= row.coeffs[j] * shift_[j];
            rel[i] = row.rel;
            rhs[i] = b;
            if (b < 0) {
                flipped_[i] = true;
                rhs[i] = -b;
                if (row.rel == Relation::LessEq) rel[i] = Relation::GreaterEq;
                else if (row.rel == Relation::GreaterEq) rel[i] = Relation::LessEq;
            }
        }
        n_slack = n_art = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (rel[i] != Relation::Equal) ++n_slack;
            if (rel[i] != Relation::LessEq) ++n_art;
        }

        n_total_ = n_ + n_slack + n_art;
        rhs_ = n_total_;
        tab_.assign(m_ * (n_total_ + 1), S(0));
        basis_.assign(m_, -1);
        slack_col_.assign(m_, -1);
        art_col_.assign(m_, -1);
        is_artificial_.assign(n_total_, false);

        std::size_t next_slack = n_;
        std::size_t next_art = n_ + n_slack;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = lp_.rows[i];
            const S sign = flipped_[i] ? S(-1) : S(1);
            for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * row.coeffs[j];
            at(i, rhs_) = rhs[i];
            if (rel[i] == Relation::LessEq) {
                slack_col_[i] = static_cast<int>(next_slack);
                at(i, next_slack) = S(1);
                basis_[i] = static_cast<int>(next_slack);
                ++next_slack;
            } else if (rel[i] == Relation::GreaterEq) {
                slack_col_[i] = static_cast<int>(next_slack);
                at(i, next_slack) = S(-1);
                ++next_slack;
            }
            if (rel[i] != Relation::LessEq) {
                art_col_[i] = static_cast<int>(next_art);
                is_artificial_[next_art] = true;
                at(i, next_art) = S(1);
                basis_[i] = static_cast<int>(next_art);
                ++next_art;
            }
        }

        max_iters_ = opts_.max_iters > 0
                         ? opts_.max_iters
                         : 200 * static_cast<long>(m_ + n_total_) + 5000;
        iterations_ = 0;
    }

    void price_out_basis(const std::vector<S>& c) {
        cost_.assign(n_total_ + 1, S(0));
        for (std::size_t j = 0; j < c.size(); ++j) cost_[j] = c[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const int k = basis_[i];
            if (k < 0) continue;
            const S ck = c[static_cast<std::size_t>(k)];
            if (ck == 0) continue;
            for (std::size_t j = 0; j <= n_total_; ++j) cost_[j] -= ck * at(i, j);
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const S piv = at(row, col);
        if (piv != 1) {
            const S inv = S(1) / piv;
            for (std::size_t j = 0; j <= n_total_; ++j) at(row, j) *= inv;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            const S factor = at(i, col);
            if (factor == 0) continue;
            for (std::size_t j = 0; j <= n_total_; ++j) at(i, j) -= factor * at(row, j);
            at(i, col) = S(0);
        }
        const S cf = cost_[col];
        if (cf != 0) {
            for (std::size_t j = 0; j <= n_total_; ++j) cost_[j] -= cf * at(row, j);
            cost_[col] = S(0);
        }
        basis_[row] = static_cast<int>(col);
        ++iterations_;
    }

    // Returns false when the objective is unbounded above.
    bool iterate(bool allow_artificial_entering) {
        int stalled = 0;
        bool bland = false;
        S last_value = -cost_[rhs_];
        std::vector<bool> banned(n_total_, false);  // columns with only tiny pivots
        while (true) {
            if (iterations_ > max_iters_)
                throw NumericalFailure("simplex iteration limit exceeded");
            std::size_t enter = n_total_;
            if (!bland) {
                S best = opts_.pivot_tol;
                for (std::size_t j = 0; j < n_total_; ++j) {
                    if (banned[j] || (!allow_artificial_entering && is_artificial_[j])) continue;
                    if (cost_[j] > best) {
                        best = cost_[j];
                        enter = j;
                    }
                }
            } else {
                for (std::size_t j = 0; j < n_total_; ++j) {
                    if (banned[j] || (!allow_artificial_entering && is_artificial_[j])) continue;
                    if (cost_[j] > opts_.pivot_tol) {
                        enter = j;
                        break;
                    }
                }
            }
            if (enter == n_total_) return true;  // optimal

            std::size_t leave = m_;
            S best_ratio(0);
            bool any_positive = false;
            for (std::size_t i = 0; i < m_; ++i) {
                const S& a = at(i, enter);
                if (a > 0) any_positive = true;
                if (a <= opts_.element_tol) continue;
                const S ratio = at(i, rhs_) / a;
                if (leave == m_ || ratio < best_ratio) {
                    leave = i;
                    best_ratio = ratio;
                } else if (ratio == best_ratio) {
                    // stabilized tie-break: larger pivot element, Bland uses
                    // the smallest basic index instead
                    if (bland ? basis_[i] < basis_[leave] : a > at(leave, enter)) leave = i;
                }
            }
            if (leave == m_) {
                if (any_positive) {
                    // only numerically tiny pivots: shelve the column until
                    // the tableau changes rather than pivot on noise
                    banned[enter] = true;
                    continue;
                }
                return false;  // unbounded direction
            }

            pivot(leave, enter);
            banned.assign(n_total_, false);
            const S value = -cost_[rhs_];
            if (value > last_value) {
                stalled = 0;
                bland = false;
                last_value = value;
            } else if (++stalled >= opts_.degeneracy_limit) {
                bland = true;
            }
        }
    }

    bool phase_one() {
        bool any_artificial = false;
        for (std::size_t i = 0; i < m_; ++i) any_artificial |= art_col_[i] >= 0;
        if (!any_artificial) return true;

        std::vector<S> c(n_total_, S(0));
        for (std::size_t j = 0; j < n_total_; ++j)
            if (is_artificial_[j]) c[j] = S(-1);
        price_out_basis(c);
        if (!iterate(true)) throw NumericalFailure("phase one reported unbounded");
        const S infeasibility = cost_[rhs_];  // = -objective = sum of artificials
        if (infeasibility > opts_.feas_tol) return false;

        // Drive leftover artificials out of the basis where possible,
        // pivoting on the largest available element for stability.
        for (std::size_t i = 0; i < m_; ++i) {
            const int k = basis_[i];
            if (k < 0 || !is_artificial_[static_cast<std::size_t>(k)]) continue;
            std::size_t col = n_total_;
            S best(0);
            for (std::size_t j = 0; j < n_total_; ++j) {
                if (is_artificial_[j]) continue;
                const S mag = abs_value(at(i, j));
                if (mag > best) {
                    best = mag;
                    col = j;
                }
            }
            if (col < n_total_ && best > opts_.element_tol) pivot(i, col);
            // Otherwise the row is redundant; the artificial stays basic at
            // level zero and its row remains zero in all other columns.
        }
        return true;
    }

    bool phase_two() {
        std::vector<S> c(n_total_, S(0));
        for (std::size_t j = 0; j < n_; ++j) c[j] = lp_.objective[j];
        price_out_basis(c);
        return iterate(false);
    }

    void extract(LpOutcome<S>& out) {
        std::vector<S> xs(n_total_, S(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) xs[static_cast<std::size_t>(basis_[i])] = at(i, rhs_);

        out.x.assign(n_, S(0));
        for (std::size_t j = 0; j < n_; ++j) out.x[j] = xs[j] + shift_[j];
        out.objective = -cost_[rhs_] + obj_shift_;

        out.duals.assign(m_, S(0));
        for (std::size_t i = 0; i < m_; ++i) {
            S y(0);
            if (slack_col_[i] >= 0) {
                const std::size_t c = static_cast<std::size_t>(slack_col_[i]);
                // slack enters as +e_i, surplus as -e_i
                y = at_col_sign(i) * -cost_[c];
            } else if (art_col_[i] >= 0) {
                y = -cost_[static_cast<std::size_t>(art_col_[i])];
            }
            if (flipped_[i]) y = -y;
            out.duals[i] = y;
        }

        certify(out);
    }

    S at_col_sign(std::size_t row) const {
        // +1 when the registered column is a slack, -1 for a surplus
        Relation rel = lp_.rows[row].rel;
        if (flipped_[row]) {
            if (rel == Relation::LessEq) rel = Relation::GreaterEq;
            else if (rel == Relation::GreaterEq) rel = Relation::LessEq;
        }
        return rel == Relation::LessEq ? S(1) : S(-1);
    }

    void certify(LpOutcome<S>& out) {
        S primal(0);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = lp_.rows[i];
            S lhs(0);
            for (std::size_t j = 0; j < n_; ++j) lhs += row.coeffs[j] * out.x[j];
            S viol(0);
            if (row.rel == Relation::LessEq) viol = lhs - row.rhs;
            else if (row.rel == Relation::GreaterEq) viol = row.rhs - lhs;
            else viol = abs_value(lhs - row.rhs);
            if (viol > primal) primal = viol;
        }
        S dual(0);
        for (std::size_t j = 0; j < n_; ++j) {
            S rc = lp_.objective[j];
            for (std::size_t i = 0; i < m_; ++i) rc -= out.duals[i] * lp_.rows[i].coeffs[j];
            if (rc > dual) dual = rc;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (lp_.rows[i].rel == Relation::LessEq && -out.duals[i] > dual)
                dual = -out.duals[i];
            if (lp_.rows[i].rel == Relation::GreaterEq && out.duals[i] > dual)
                dual = out.duals[i];
        }
        S dual_obj = obj_shift_;
        for (std::size_t i = 0; i < m_; ++i) {
            S b = lp_.rows[i].rhs;
            for (std::size_t j = 0; j < n_; ++j) b -= lp_.rows[i].coeffs[j] * shift_[j];
            dual_obj += out.duals[i] * b;
        }
        out.primal_residual = primal;
        out.dual_residual = dual;
        out.duality_gap = abs_value(out.objective - dual_obj);
        const S scale = S(1) + abs_value(out.objective);
        if (primal > opts_.feas_tol * scale || dual > opts_.feas_tol * scale ||
            out.duality_gap > opts_.feas_tol * scale)
            throw NumericalFailure(
                "simplex optimality certificates out of tolerance (primal " +
                scalar_to_string(to_double(primal)) + ", dual " +
                scalar_to_string(to_double(dual)) + ", gap " +
                scalar_to_string(to_double(out.duality_gap)) + ")");
    }
};

template <class S>
LpOutcome<S> solve(const LinearProgram<S>& lp, LpOptions<S> opts = {}) {
    return SimplexSolver<S>(lp, opts).solve();
}

}  // namespace mot

#endif
