#ifndef MOT_SIMULATION_HPP
#define MOT_SIMULATION_HPP

#include <map>
#include <random>
#include <utility>
#include <vector>

#include "mot/auxiliary.hpp"
#include "mot/averaging.hpp"
#include "mot/convex_integral.hpp"
#include "mot/errors.hpp"
#include "mot/lp.hpp"
#include "mot/measure.hpp"
#include "mot/path.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Finite martingale coupling with three marginals, stored as weighted point
 * triples. Both transitions are mean-preserving.
 */
template <class S>
struct TwoStepCoupling {
    struct Atom {
        S y1, y2, y3;
        S weight;
    };
    std::vector<Atom> atoms;

    DiscreteMeasure<S> marginal(int stage) const {
        std::vector<std::pair<S, S>> acc;
        for (const auto& a : atoms)
            acc.emplace_back(stage == 0 ? a.y1 : (stage == 1 ? a.y2 : a.y3), a.weight);
        return DiscreteMeasure<S>::from_atoms(std::move(acc));
    }

    void validate(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& theta,
                  const DiscreteMeasure<S>& nu,
                  const S& tol = scalar_traits<S>::exact ? S(0) : S(1e-10)) const {
        auto close = [&tol](const DiscreteMeasure<S>& a, const DiscreteMeasure<S>& b) {
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (abs_value(a.support()[i] - b.support()[i]) > tol) return false;
                if (abs_value(a.weights()[i] - b.weights()[i]) > tol) return false;
            }
            return true;
        };
        if (!close(marginal(0), mu) || !close(marginal(1), theta) || !close(marginal(2), nu))
            throw NumericalFailure("coupling marginals drifted");
        OneStepCoupling<S> first, second;
        for (const auto& a : atoms) {
            first.atoms.push_back({a.y1, a.y2, a.weight});
            second.atoms.push_back({a.y2, a.y3, a.weight});
        }
        first.validate_martingale(tol);
        // The second transition must be mean-preserving given the whole past.
        std::map<std::pair<S, S>, std::pair<S, S>> by_pair;
        for (const auto& a : atoms) {
            auto& [mass, moment] = by_pair[{a.y1, a.y2}];
            mass += a.weight;
            moment += a.weight * a.y3;
        }
        for (const auto& [key, agg] : by_pair) {
            const auto& [mass, moment] = agg;
            if (abs_value(moment - key.second * mass) >
                tol * (S(1) + abs_value(key.second) * mass))
                throw KernelNotMartingale("second transition is not mean-preserving");
        }
        second.validate_martingale(tol);
    }
};

namespace detail {

template <class S>
OneStepCoupling<S> transport_core(const DiscreteMeasure<S>& src, const DiscreteMeasure<S>& dst,
                                  const LpOptions<S>& lp_opts, OneStepCoupling<S> seed);

// Martingale transport between two measures in convex order, selected by
// minimal quadratic displacement. Source atoms at potential-contact points
// cannot move under any martingale plan (no admissible spread exists), so
// they are pinned as identity moves before the LP; this keeps solver noise
// off the immovable atoms. Variables live on the product of supports.
template <class S>
OneStepCoupling<S> transport_step(const DiscreteMeasure<S>& src, const DiscreteMeasure<S>& dst,
                                  const LpOptions<S>& lp_opts) {
    const S contact_tol =
        scalar_traits<S>::exact ? S(0) : S(1e-11) * (S(1) + src.mass());
    OneStepCoupling<S> pinned;
    std::vector<std::pair<S, S>> movable, remaining;
    for (std::size_t i = 0; i < dst.size(); ++i)
        remaining.emplace_back(dst.support()[i], dst.weights()[i]);
    for (std::size_t i = 0; i < src.size(); ++i) {
        const S& p = src.support()[i];
        const S w = src.weights()[i];
        const S gap = dst.potential(p) - src.potential(p);
        bool pinned_here = false;
        if (gap <= contact_tol) {
            for (auto& [x, r] : remaining)
                if (x == p && r >= w - contact_tol) {
                    pinned.atoms.push_back({p, p, w});
                    r -= w;
                    pinned_here = true;
                    break;
                }
        }
        if (!pinned_here) movable.emplace_back(p, w);
    }
    if (movable.empty()) return pinned;
    std::vector<std::pair<S, S>> dst_atoms;
    for (auto& [x, r] : remaining)
        if (r > contact_tol) dst_atoms.emplace_back(x, r);
    return transport_core(DiscreteMeasure<S>::from_atoms(std::move(movable)),
                          DiscreteMeasure<S>::from_atoms(std::move(dst_atoms)), lp_opts,
                          std::move(pinned));
}

template <class S>
OneStepCoupling<S> transport_core(const DiscreteMeasure<S>& src, const DiscreteMeasure<S>& dst,
                                  const LpOptions<S>& lp_opts, OneStepCoupling<S> seed) {
    const std::size_t n = src.size(), m = dst.size();
    LinearProgram<S> lp;
    lp.objective.assign(n * m, S(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const S d = dst.support()[j] - src.support()[i];
            lp.objective[i * m + j] = -d * d;
        }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<S> mass_row(n * m, S(0)), mean_row(n * m, S(0));
        for (std::size_t j = 0; j < m; ++j) {
            mass_row[i * m + j] = S(1);
            mean_row[i * m + j] = dst.support()[j] - src.support()[i];
        }
        lp.add_row(std::move(mass_row), Relation::Equal, src.weights()[i]);
        lp.add_row(std::move(mean_row), Relation::Equal, S(0));
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<S> row(n * m, S(0));
        for (std::size_t i = 0; i < n; ++i) row[i * m + j] = S(1);
        lp.add_row(std::move(row), Relation::Equal, dst.weights()[j]);
    }
    LpOutcome<S> out = solve(lp, lp_opts);
    if (out.status == LpStatus::Infeasible) throw NotInConvexOrder();
    if (out.status != LpStatus::Optimal) throw NumericalFailure("transport step did not solve");
    OneStepCoupling<S> q = std::move(seed);
    const S drop = scalar_traits<S>::exact ? S(0) : S(1e-13);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (out.x[i * m + j] > drop)
                q.atoms.push_back({src.support()[i], dst.support()[j], out.x[i * m + j]});
    return q;
}

}  // namespace detail

/** Minimal-quadratic-cost martingale transport between ordered marginals. */
template <class S>
OneStepCoupling<S> martingale_transport(const DiscreteMeasure<S>& src,
                                        const DiscreteMeasure<S>& dst,
                                        const LpOptions<S>& lp_opts = {}) {
    return detail::transport_step(src, dst, lp_opts);
}

/**
 * Composes two martingale transport plans into a three-marginal coupling;
 * each step is the minimal-quadratic-cost plan, which makes the construction
 * deterministic. Feasibility is exactly the convex-order sandwich.
 */
template <class S>
TwoStepCoupling<S> build_two_step(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& theta,
                                  const DiscreteMeasure<S>& nu, const LpOptions<S>& lp_opts = {},
                                  const S& order_tol = scalar_traits<S>::exact ? S(0) : S(1e-8)) {
    if (!convex_order_leq(mu, theta, order_tol) || !convex_order_leq(theta, nu, order_tol))
        throw NotInConvexOrder();
    OneStepCoupling<S> first = detail::transport_step(mu, theta, lp_opts);
    OneStepCoupling<S> second = detail::transport_step(theta, nu, lp_opts);

    TwoStepCoupling<S> q;
    const S drop = scalar_traits<S>::exact ? S(0) : S(1e-12) * mu.mass();
    for (const auto& a : first.atoms) {
        const S theta_mass = theta.atom(a.to);
        if (theta_mass == 0) continue;
        for (const auto& b : second.atoms) {
            if (b.from != a.to) continue;
            const S w = a.weight * b.weight / theta_mass;
            if (w > drop) q.atoms.push_back({a.from, a.to, b.to, w});
        }
    }
    return q;
}

/**
 * Embeds the coupling into step paths jumping at 1/n and at the horizon:
 * the first coordinate until 1/n, the second until T, the third at T.
 */
template <class S>
std::vector<WeightedPath<S>> embed_paths(const TwoStepCoupling<S>& q, int n, const S& horizon) {
    if (n < 2) throw BadHorizon("need n >= 2");
    const S t1 = S(1) / S(n);
    if (!(t1 < horizon)) throw BadHorizon("need 1/n < T");
    std::vector<WeightedPath<S>> out;
    out.reserve(q.atoms.size());
    for (const auto& a : q.atoms)
        out.push_back(
            {SteppedPath<S>(horizon, {t1, horizon}, {a.y1, a.y2, a.y3}), a.weight});
    return out;
}

/**
 * Exact model price: the payoff of the averaged spot, enumerated over the
 * coupling atoms (no sampling).
 */
template <class S, class Payoff>
S price(const TwoStepCoupling<S>& q, int n, const S& horizon, Payoff&& payoff,
        const AveragingProcess<S>& a) {
    S acc(0);
    for (const auto& wp : embed_paths(q, n, horizon))
        acc += wp.weight * payoff(average_along(wp.path, a));
    return acc;
}

template <class S>
struct LowerBoundReport {
    S aux_value;        // optimal value over intermediate laws
    S model_price;      // exact price under the embedded optimal coupling
    S gap;              // aux_value - model_price (vanishes for strict interiority)
    bool interior;
    bool strictly_interior;
    AuxiliarySolution<S> solution;
};

/**
 * Realizes the optimal intermediate law as a model price: solve, couple,
 * embed, price, and report the attainment gap for the chosen exercise
 * rights.
 */
template <class S>
LowerBoundReport<S> lower_bound_report(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                                       const PiecewiseLinear<S>& payoff,
                                       const AveragingProcess<S>& a, const std::vector<S>& grid,
                                       int n, const AuxOptions<S>& opts = {}) {
    AuxiliarySolution<S> sol = solve_primal(mu, nu, payoff, grid, opts);
    TwoStepCoupling<S> q = build_two_step(mu, sol.theta, nu, opts.lp);
    const S p = price(q, n, a.horizon(), payoff, a);
    LowerBoundReport<S> rep{sol.value, p, sol.value - p, a.interior(), a.strictly_interior(),
                            std::move(sol)};
    return rep;
}

/**
 * Demonstration sampler: multinomial draws from the coupling, each sampled
 * path carrying equal weight. Exact pricing never uses this.
 */
template <class S>
std::vector<WeightedPath<S>> sample_paths(const TwoStepCoupling<S>& q, int n, const S& horizon,
                                          std::size_t count, unsigned long seed) {
    std::vector<WeightedPath<S>> all = embed_paths(q, n, horizon);
    std::vector<double> cumulative;
    double total = 0;
    for (const auto& wp : all) {
        total += to_double(wp.weight);
        cumulative.push_back(total);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, total);
    std::vector<WeightedPath<S>> out;
    const S w = S(1) / S(static_cast<int>(count));
    for (std::size_t k = 0; k < count; ++k) {
        const double u = unif(rng);
        std::size_t i = 0;
        while (i + 1 < cumulative.size() && cumulative[i] < u) ++i;
        out.push_back({all[i].path, w});
    }
    return out;
}

}  // namespace mot

#endif
