#ifndef MOT_AUXILIARY_HPP
#define MOT_AUXILIARY_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mot/convex_integral.hpp"
#include "mot/errors.hpp"
#include "mot/lp.hpp"
#include "mot/measure.hpp"
#include "mot/pwl.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Solution of the intermediate-law problem: the best law between the two
 * marginals in convex order together with the matching static hedge legs.
 * The optimum is searched over candidate atoms restricted to a grid; the
 * potential sandwich is imposed at grid points, which is exact because the
 * candidate law kinks only there.
 */
template <class S>
struct AuxiliarySolution {
    S value;
    DiscreteMeasure<S> theta;
    DualPair<S> dual;
    std::vector<S> grid;
};

template <class S>
struct AuxOptions {
    LpOptions<S> lp;
    S drop_tol = scalar_traits<S>::exact ? S(0) : S(1e-11);
    S check_tol = scalar_traits<S>::exact ? S(0) : S(1e-8);
    bool validate = true;
};

namespace detail {

template <class S>
void refine_once(std::vector<S>& grid) {
    std::vector<S> out;
    out.reserve(grid.size() * 2);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        out.push_back(grid[i]);
        out.push_back((grid[i] + grid[i + 1]) / S(2));
    }
    out.push_back(grid.back());
    grid = std::move(out);
}

}  // namespace detail

/**
 * Candidate-atom grid: both supports, the payoff breakpoints inside the
 * domain, and `refine` rounds of midpoint insertion.
 */
template <class S>
std::vector<S> build_grid(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                          const PiecewiseLinear<S>& payoff, const Domain<S>& dom,
                          int refine = 1, const std::vector<S>& extra = {}) {
    std::vector<S> grid = merged_support(mu, nu);
    for (const S& b : payoff.breakpoints())
        if (dom.left <= b && b <= dom.right) grid.push_back(b);
    for (const S& x : extra)
        if (dom.left <= x && x <= dom.right) grid.push_back(x);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (int r = 0; r < refine; ++r) detail::refine_once(grid);
    return grid;
}

namespace detail {

template <class S>
struct AuxProgram {
    LinearProgram<S> lp;
    std::vector<S> grid;
    std::vector<S> u_mu, u_nu;
};

// Rows in canonical order: mass, mean, then per grid point the upper
// (<= u_nu) and lower (>= u_mu) potential constraints.
template <class S>
AuxProgram<S> make_aux_program(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                               const std::vector<S>& grid) {
    AuxProgram<S> prog;
    prog.grid = grid;
    const std::size_t n = grid.size();
    prog.lp.objective.assign(n, S(0));
    prog.lp.add_row(std::vector<S>(n, S(1)), Relation::Equal, mu.mass());
    prog.lp.add_row(grid, Relation::Equal, mu.first_moment());
    prog.u_mu.reserve(n);
    prog.u_nu.reserve(n);
    for (const S& g : grid) {
        std::vector<S> row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = abs_value(grid[j] - g);
        prog.u_mu.push_back(mu.potential(g));
        prog.u_nu.push_back(nu.potential(g));
        prog.lp.add_row(row, Relation::LessEq, prog.u_nu.back());
        prog.lp.add_row(std::move(row), Relation::GreaterEq, prog.u_mu.back());
    }
    return prog;
}

template <class S>
void require_grid_covers(const std::vector<S>& grid, const DiscreteMeasure<S>& mu,
                         const DiscreteMeasure<S>& nu, const PiecewiseLinear<S>& payoff,
                         const Domain<S>& dom) {
    auto has = [&grid](const S& x) {
        return std::binary_search(grid.begin(), grid.end(), x);
    };
    for (const S& x : mu.support())
        if (!has(x)) throw GridTooCoarse("grid misses a support point of the lower marginal");
    for (const S& x : nu.support())
        if (!has(x)) throw GridTooCoarse("grid misses a support point of the upper marginal");
    const S kink_floor = scalar_traits<S>::exact ? S(0) : S(1e-10);
    for (const auto& [b, inc] : payoff.kinks())
        if (abs_value(inc) > kink_floor && dom.left <= b && b <= dom.right && !has(b))
            throw GridTooCoarse("grid misses a payoff kink inside the domain");
    for (const auto& jump : {payoff.jump_left(), payoff.jump_right()})
        if (jump && dom.left <= jump->first && jump->first <= dom.right && !has(jump->first))
            throw GridTooCoarse("grid misses a payoff jump inside the domain");
}

template <class S>
DiscreteMeasure<S> measure_from_lp(const std::vector<S>& grid, const std::vector<S>& x,
                                   const S& drop_tol) {
    std::vector<std::pair<S, S>> atoms;
    for (std::size_t j = 0; j < grid.size(); ++j)
        if (x[j] > drop_tol) atoms.emplace_back(grid[j], x[j]);
    return DiscreteMeasure<S>::from_atoms(std::move(atoms));
}

}  // namespace detail

/**
 * Assembles the static legs from the multipliers of a solved program with
 * the canonical row layout: the equality duals give the affine part, the
 * potential-constraint duals give absolute-value kinks. The concave leg
 * absorbs the affine part; in floating mode the convex leg is lifted by the
 * worst feasibility violation so that phi + psi >= payoff holds on the grid.
 */
template <class S>
DualPair<S> extract_dual(const LpOutcome<S>& outcome, const std::vector<S>& grid,
                         const PiecewiseLinear<S>& payoff, const Domain<S>& dom,
                         const S& drop_tol = scalar_traits<S>::exact ? S(0) : S(1e-11)) {
    (void)dom;
    if (outcome.status != LpStatus::Optimal) throw NotOptimal();
    if (outcome.duals.size() != 2 + 2 * grid.size())
        throw NotOptimal("dual vector does not match the canonical layout");

    const S rho = outcome.duals[0];
    const S sigma = outcome.duals[1];
    std::vector<std::pair<S, S>> phi_kinks, psi_kinks;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        S beta = outcome.duals[2 + 2 * k];       // upper rows carry beta >= 0
        S alpha = -outcome.duals[2 + 2 * k + 1]; // lower rows carry -alpha <= 0
        if (beta < 0 && -beta <= drop_tol) beta = S(0);
        if (alpha < 0 && -alpha <= drop_tol) alpha = S(0);
        if (abs_value(beta) > drop_tol) psi_kinks.emplace_back(grid[k], beta);
        if (abs_value(alpha) > drop_tol) phi_kinks.emplace_back(grid[k], -alpha);
    }
    DualPair<S> pair{PiecewiseLinear<S>::from_kinks(rho, sigma, std::move(phi_kinks)),
                     PiecewiseLinear<S>::from_kinks(S(0), S(0), std::move(psi_kinks))};

    if constexpr (!scalar_traits<S>::exact) {
        S worst(0);
        for (const S& g : grid) {
            const S slack = pair.phi(g) + pair.psi(g) - payoff(g);
            if (slack < worst) worst = slack;
        }
        if (worst < 0) pair.psi = pair.psi.shifted(-worst);
    }
    pair.validate(scalar_traits<S>::exact ? S(0) : S(1e-9));
    return pair;
}

/**
 * Maximizes the payoff expectation over laws in convex order between the two
 * marginals with atoms restricted to the grid.
 */
template <class S>
AuxiliarySolution<S> solve_primal(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                                  const PiecewiseLinear<S>& payoff, std::vector<S> grid,
                                  const AuxOptions<S>& opts = {}) {
    const Domain<S> dom = domain_of(mu, nu);
    detail::require_grid_covers(grid, mu, nu, payoff, dom);

    auto prog = detail::make_aux_program(mu, nu, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) prog.lp.objective[j] = payoff(grid[j]);
    LpOutcome<S> outcome = solve(prog.lp, opts.lp);
    if (outcome.status != LpStatus::Optimal)
        throw NumericalFailure("intermediate-law program did not solve");

    AuxiliarySolution<S> sol{outcome.objective,
                             detail::measure_from_lp(grid, outcome.x, opts.drop_tol),
                             extract_dual(outcome, grid, payoff, dom, opts.drop_tol),
                             std::move(grid)};

    if (opts.validate) {
        const S tol = opts.check_tol;
        if (!convex_order_leq(mu, sol.theta, tol) || !convex_order_leq(sol.theta, nu, tol))
            throw NumericalFailure("optimizer violates the convex-order sandwich");
        const S dual_value = pair_integral(mu, nu, sol.dual);
        if (abs_value(dual_value - sol.value) > tol * (S(1) + abs_value(sol.value)))
            throw NumericalFailure("dual value does not certify the primal value");
    }
    return sol;
}

template <class S>
AuxiliarySolution<S> solve_primal(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                                  const PiecewiseLinear<S>& payoff, int refine = 1,
                                  const AuxOptions<S>& opts = {}) {
    const Domain<S> dom = domain_of(mu, nu);
    return solve_primal(mu, nu, payoff, build_grid(mu, nu, payoff, dom, refine), opts);
}

/** Optimality structure report for a primal/dual optimizer pair. */
template <class S>
struct DiagnosticsReport {
    struct Clause {
        std::string name;
        bool pass;
        std::string witness;
    };
    std::vector<Clause> clauses;

    bool all_pass() const {
        for (const auto& c : clauses)
            if (!c.pass) return false;
        return true;
    }
};

/**
 * Checks the complementary-slackness structure of an optimizer pair: the
 * legs sum to the payoff on the optimizer's support, each leg is affine
 * where the corresponding potential gap is strict, and neither leg jumps at
 * a boundary atom that the optimizer keeps loaded (respectively not fully
 * loaded).
 */
template <class S>
DiagnosticsReport<S> dual_diagnostics(const AuxiliarySolution<S>& sol,
                                      const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                                      const PiecewiseLinear<S>& payoff, const Domain<S>& dom,
                                      const S& tol = scalar_traits<S>::exact ? S(0) : S(1e-8)) {
    DiagnosticsReport<S> rep;
    auto add = [&rep](std::string name, bool pass, std::string witness) {
        rep.clauses.push_back({std::move(name), pass, std::move(witness)});
    };

    const auto& theta = sol.theta;
    {
        bool ok = true;
        std::string witness;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const S& x = theta.support()[i];
            const S gap = sol.dual.phi(x) + sol.dual.psi(x) - payoff(x);
            if (abs_value(gap) > tol * (S(1) + abs_value(payoff(x)))) {
                ok = false;
                witness = "atom at " + scalar_to_string(x) +
                          ", gap " + scalar_to_string(gap);
                break;
            }
        }
        add("legs sum to payoff on optimizer support", ok, witness);
    }
    {
        bool ok = true;
        std::string witness;
        for (const auto& [p, inc] : sol.dual.phi.kinks()) {
            if (!dom.in_interior(p)) continue;
            if (theta.potential(p) - mu.potential(p) > tol) {
                ok = false;
                witness = "concave leg kinks at " + scalar_to_string(p);
                break;
            }
        }
        add("concave leg affine where lower potential gap is strict", ok, witness);
    }
    {
        bool ok = true;
        std::string witness;
        for (const auto& [p, inc] : sol.dual.psi.kinks()) {
            if (!dom.in_interior(p)) continue;
            if (nu.potential(p) - theta.potential(p) > tol) {
                ok = false;
                witness = "convex leg kinks at " + scalar_to_string(p);
                break;
            }
        }
        add("convex leg affine where upper potential gap is strict", ok, witness);
    }
    auto jump_at = [](const PiecewiseLinear<S>& f, const S& b) {
        S delta(0);
        if (f.jump_left() && f.jump_left()->first == b) delta += f.jump_left()->second;
        if (f.jump_right() && f.jump_right()->first == b) delta += f.jump_right()->second;
        return delta;
    };
    {
        bool ok = true;
        std::string witness;
        for (const S& b : {dom.left, dom.right}) {
            if (!dom.on_boundary(b)) continue;
            if (theta.atom(b) > tol && abs_value(jump_at(sol.dual.phi, b)) > tol) {
                ok = false;
                witness = "concave leg jumps at loaded boundary " + scalar_to_string(b);
            }
        }
        add("no concave-leg jump at a loaded boundary atom", ok, witness);
    }
    {
        bool ok = true;
        std::string witness;
        for (const S& b : {dom.left, dom.right}) {
            if (!dom.on_boundary(b)) continue;
            if (theta.atom(b) < nu.atom(b) - tol && abs_value(jump_at(sol.dual.psi, b)) > tol) {
                ok = false;
                witness = "convex leg jumps at partially loaded boundary " + scalar_to_string(b);
            }
        }
        add("no convex-leg jump at a partially loaded boundary atom", ok, witness);
    }
    return rep;
}

/**
 * Second-stage problem: among near-optimal laws, maximize a strictly convex
 * criterion. The returned law is maximal with respect to the convex order
 * inside the optimizer set (up to the lexicographic slack).
 */
template <class S>
DiscreteMeasure<S> secondary_optimize(const AuxiliarySolution<S>& primal,
                                      const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                                      const PiecewiseLinear<S>& payoff,
                                      const PiecewiseLinear<S>& criterion,
                                      const AuxOptions<S>& opts = {}) {
    if (primal.grid.empty()) throw PrimalNotSolved();
    const std::vector<S>& grid = primal.grid;
    auto prog = detail::make_aux_program(mu, nu, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) prog.lp.objective[j] = criterion(grid[j]);
    const S eps_lex = scalar_traits<S>::exact
                          ? S(0)
                          : S(1e-9) * (S(1) + abs_value(primal.value));
    std::vector<S> payoff_row(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) payoff_row[j] = payoff(grid[j]);
    prog.lp.add_row(std::move(payoff_row), Relation::GreaterEq, primal.value - eps_lex);

    LpOutcome<S> outcome = solve(prog.lp, opts.lp);
    if (outcome.status != LpStatus::Optimal)
        throw NumericalFailure("secondary program did not solve");
    return detail::measure_from_lp(grid, outcome.x, opts.drop_tol);
}

/** Per-component solution of a possibly reducible pair. */
template <class S>
struct NonIrreducibleSolution {
    std::vector<IrreducibleComponent<S>> components;
    std::vector<AuxiliarySolution<S>> solutions;  // aligned with components
    S static_value;
    S total;
};

/**
 * Decomposes the pair, solves each irreducible component on the induced
 * sub-grid, and adds the payoff mass carried by the immovable residue.
 */
template <class S>
NonIrreducibleSolution<S> solve_nonirreducible(const DiscreteMeasure<S>& mu,
                                               const DiscreteMeasure<S>& nu,
                                               const PiecewiseLinear<S>& payoff,
                                               const std::vector<S>& grid,
                                               const AuxOptions<S>& opts = {}) {
    Decomposition<S> dec = irreducible_components(mu, nu);
    NonIrreducibleSolution<S> out;
    out.static_value = dec.static_integral([&](const S& x) { return payoff(x); });
    out.total = out.static_value;
    for (auto& comp : dec.components) {
        std::vector<S> sub;
        for (const S& g : grid)
            if (comp.domain.left <= g && g <= comp.domain.right) sub.push_back(g);
        for (const S& x : comp.upper.support()) sub.push_back(x);
        for (const S& x : comp.lower.support()) sub.push_back(x);
        std::sort(sub.begin(), sub.end());
        sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
        AuxiliarySolution<S> sol = solve_primal(comp.lower, comp.upper, payoff, sub, opts);
        out.total += sol.value;
        out.solutions.push_back(std::move(sol));
        out.components.push_back(std::move(comp));
    }
    return out;
}

}  // namespace mot

#endif
