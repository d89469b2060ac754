#ifndef MOT_CONVEX_INTEGRAL_HPP
#define MOT_CONVEX_INTEGRAL_HPP

#include <map>
#include <tuple>
#include <vector>

#include "mot/errors.hpp"
#include "mot/measure.hpp"
#include "mot/pwl.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * One-step martingale transport plan as a finite list of weighted moves
 * (source, target, weight). The kernel at each source atom must be
 * mean-preserving.
 */
template <class S>
struct OneStepCoupling {
    struct Atom {
        S from;
        S to;
        S weight;
    };
    std::vector<Atom> atoms;

    DiscreteMeasure<S> source_marginal() const {
        std::vector<std::pair<S, S>> acc;
        for (const auto& a : atoms) acc.emplace_back(a.from, a.weight);
        return DiscreteMeasure<S>::from_atoms(std::move(acc));
    }

    DiscreteMeasure<S> target_marginal() const {
        std::vector<std::pair<S, S>> acc;
        for (const auto& a : atoms) acc.emplace_back(a.to, a.weight);
        return DiscreteMeasure<S>::from_atoms(std::move(acc));
    }

    static OneStepCoupling identity(const DiscreteMeasure<S>& m) {
        OneStepCoupling q;
        for (std::size_t i = 0; i < m.size(); ++i)
            q.atoms.push_back({m.support()[i], m.support()[i], m.weights()[i]});
        return q;
    }

    void validate_martingale(const S& tol = scalar_traits<S>::default_tol()) const {
        std::map<S, std::pair<S, S>> by_source;  // from -> (mass, moment)
        for (const auto& a : atoms) {
            if (a.weight < 0) throw KernelNotMartingale("negative kernel weight");
            auto& [mass, moment] = by_source[a.from];
            mass += a.weight;
            moment += a.weight * a.to;
        }
        for (const auto& [from, agg] : by_source) {
            const auto& [mass, moment] = agg;
            if (mass == 0) continue;
            if (abs_value(moment - from * mass) > tol * (S(1) + abs_value(from) * mass))
                throw KernelNotMartingale("kernel is not mean-preserving");
        }
    }
};

/**
 * Integral of a concave function's curvature against the gap between two
 * potential functions, plus the boundary-jump terms. Nonnegative whenever
 * the marginals are in convex order.
 */
template <class S>
S concave_diff_integral(const DiscreteMeasure<S>& t1, const DiscreteMeasure<S>& t2,
                        const PiecewiseLinear<S>& chi, const Domain<S>& dom,
                        const S& tol = scalar_traits<S>::default_tol()) {
    if (!convex_order_leq(t1, t2, tol)) throw NotInConvexOrder();
    if (!chi.is_concave(tol)) throw ModeratorInvalid("moderator must be concave");
    S acc(0);
    // Curvature term: one half of (u1 - u2) against the slope increments.
    // Both factors are nonpositive at interior kinks of a concave function.
    for (const auto& [p, inc] : chi.kinks()) {
        if (!dom.in_interior(p)) continue;
        acc += (t1.potential(p) - t2.potential(p)) * inc / S(2);
    }
    auto jump_term = [&](const std::optional<std::pair<S, S>>& jump) {
        if (!jump) return;
        const auto& [pos, delta] = *jump;
        if (!dom.on_boundary(pos)) return;
        acc += abs_value(delta) * (t2.atom(pos) - t1.atom(pos));
    };
    jump_term(chi.jump_left());
    jump_term(chi.jump_right());
    return acc;
}

/**
 * Same quantity computed through a disintegration of a one-step martingale
 * coupling: the expected loss of the concave function along the transport.
 */
template <class S>
S disintegration_integral(const OneStepCoupling<S>& q, const PiecewiseLinear<S>& chi,
                          const S& tol = scalar_traits<S>::default_tol()) {
    q.validate_martingale(tol);
    S acc(0);
    for (const auto& a : q.atoms) acc += a.weight * (chi(a.from) - chi(a.to));
    return acc;
}

/**
 * Generalized joint integral of a concave/convex pair: the moderator makes
 * the two legs individually integrable and the curvature term restores the
 * total. The value does not depend on the moderator choice.
 */
template <class S>
S generalized_pair_integral(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                            const DualPair<S>& pair, const PiecewiseLinear<S>& moderator,
                            const Domain<S>& dom,
                            const S& tol = scalar_traits<S>::default_tol()) {
    if (!moderator.is_concave(tol)) throw ModeratorInvalid("moderator must be concave");
    S acc(0);
    acc += mu.integrate([&](const S& x) { return pair.phi(x) - moderator(x); });
    acc += nu.integrate([&](const S& x) { return pair.psi(x) + moderator(x); });
    acc += concave_diff_integral(mu, nu, moderator, dom, tol);
    return acc;
}

// Plain-sum evaluation (zero moderator).
template <class S>
S pair_integral(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                const DualPair<S>& pair) {
    return mu.integrate([&](const S& x) { return pair.phi(x); }) +
           nu.integrate([&](const S& x) { return pair.psi(x); });
}

}  // namespace mot

#endif
