#ifndef MOT_HEDGING_HPP
#define MOT_HEDGING_HPP

#include <string>
#include <utility>
#include <vector>

#include "mot/averaging.hpp"
#include "mot/convex_integral.hpp"
#include "mot/errors.hpp"
#include "mot/measure.hpp"
#include "mot/path.hpp"
#include "mot/pwl.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Dynamic hedge evaluated along one path: the time-zero position plus the
 * holdings traded at the atoms of the averaging measure (the running-average
 * part is atomized per path segment, where the integrand is constant).
 */
template <class S>
struct HedgeSpec {
    S h0;
    std::vector<S> atom_times;
    std::vector<S> atom_weights;
    std::vector<S> h_values;
};

namespace detail {

// Derivative selections with the zero-outside-interior convention. When a
// tail is flagged unbounded the chord toward the boundary value substitutes
// for the tail slope (finite interpolation of the steep leg).
template <class S>
S clipped_left_derivative(const PiecewiseLinear<S>& f, const S& x, const Domain<S>& dom) {
    if (!dom.in_interior(x)) return S(0);
    if (f.unbounded_right() && x > f.breakpoints().back()) {
        const S& edge = f.breakpoints().back();
        return (f(dom.right) - f(edge)) / (dom.right - edge);
    }
    if (f.unbounded_left() && x < f.breakpoints().front()) {
        const S& edge = f.breakpoints().front();
        return (f(edge) - f(dom.left)) / (edge - dom.left);
    }
    return f.left_derivative(x);
}

}  // namespace detail

/**
 * Builds the dynamic hedge induced by the static legs: the holding traded at
 * time t is determined by the slopes of the legs at the spot. The time-zero
 * position splits between the two legs according to the averaging mass at
 * zero.
 */
template <class S>
HedgeSpec<S> dynamic_part(const DualPair<S>& pair, const SteppedPath<S>& path,
                          const AveragingProcess<S>& a, const Domain<S>& dom) {
    if (!path_in_domain(path, dom)) throw PathOutsideOmega();
    const S x0 = path.initial();
    const S dphi0 = detail::clipped_left_derivative(pair.phi, x0, dom);
    const S dpsi0 = detail::clipped_left_derivative(pair.psi, x0, dom);
    const S a0 = a.mass_at_zero();

    HedgeSpec<S> h;
    h.h0 = dphi0 * (S(1) - a0) - dpsi0 * a0;
    auto push = [&](const S& t, const S& w, const S& x) {
        if (w == 0) return;
        h.atom_times.push_back(t);
        h.atom_weights.push_back(w);
        h.h_values.push_back(-dphi0 - detail::clipped_left_derivative(pair.psi, x, dom));
    };
    for (const auto& [t, w] : a.atoms()) {
        if (t == S(0)) continue;  // carried by h0
        push(t, w, path.at(t));
    }
    if (a.has_lebesgue_part()) {
        for (const auto& seg : path.segments()) {
            const S len = seg.end - seg.start;
            if (len == 0) continue;
            push((seg.start + seg.end) / S(2), len / a.horizon(), seg.value);
        }
    }
    return h;
}

/**
 * Gains of the dynamic part: terminal-increment form of the pathwise
 * integral, a finite sum over the hedge atoms.
 */
template <class S>
S pathwise_integral(const HedgeSpec<S>& hedge, const SteppedPath<S>& path) {
    const S xT = path.terminal();
    S acc = (xT - path.initial()) * hedge.h0;
    for (std::size_t i = 0; i < hedge.atom_times.size(); ++i)
        acc += (xT - path.at(hedge.atom_times[i])) * hedge.h_values[i] * hedge.atom_weights[i];
    return acc;
}

template <class S>
struct SuperhedgeRow {
    std::size_t path_id;
    S x0;
    S xT;
    S average;
    S payoff;
    S static_leg;
    S dynamic_leg;
    S slack;
};

template <class S>
struct SuperhedgeReport {
    std::vector<SuperhedgeRow<S>> rows;
    S min_slack = S(0);
    S portfolio_mean = S(0);     // weighted average of static + dynamic legs
    S static_cost = S(0);        // joint integral of the legs against the marginals
    S admissibility_gap = S(0);  // portfolio_mean - static_cost (should vanish)
    bool pathwise_ok = true;
    bool admissible = true;

    bool ok() const { return pathwise_ok && admissible; }
};

/**
 * Pathwise verification of the superhedging inequality: on every admissible
 * path the static legs plus the dynamic gains dominate the payoff of the
 * averaged spot, and the weighted portfolio value books back to the initial
 * cost of the static legs.
 */
template <class S, class Payoff>
SuperhedgeReport<S> verify_superhedge(const DualPair<S>& pair, Payoff&& payoff,
                                      const AveragingProcess<S>& a,
                                      const std::vector<WeightedPath<S>>& paths,
                                      const Domain<S>& dom, const DiscreteMeasure<S>& mu,
                                      const DiscreteMeasure<S>& nu,
                                      const S& tol = scalar_traits<S>::exact ? S(0) : S(1e-9)) {
    SuperhedgeReport<S> rep;
    rep.static_cost = pair_integral(mu, nu, pair);
    S mean(0), total_weight(0);
    bool first = true;
    for (std::size_t id = 0; id < paths.size(); ++id) {
        const auto& [path, weight] = paths[id];
        if (!path_in_domain(path, dom)) throw PathOutsideOmega();
        const S avg = average_along(path, a);
        const S pay = payoff(avg);
        const S stat = pair.phi(path.initial()) + pair.psi(path.terminal());
        const S dyn = pathwise_integral(dynamic_part(pair, path, a, dom), path);
        const S slack = stat + dyn - pay;
        rep.rows.push_back({id, path.initial(), path.terminal(), avg, pay, stat, dyn, slack});
        if (first || slack < rep.min_slack) rep.min_slack = slack;
        first = false;
        mean += weight * (stat + dyn);
        total_weight += weight;
    }
    if (!paths.empty() &&
        abs_value(total_weight - mu.mass()) >
            (scalar_traits<S>::exact ? S(0) : S(1e-9)) * (S(1) + mu.mass()))
        throw Error("superhedge verification: path weights must sum to the marginal mass");
    rep.portfolio_mean = mean;
    rep.admissibility_gap = mean - rep.static_cost;
    rep.pathwise_ok = rep.rows.empty() || rep.min_slack >= -tol;
    rep.admissible = abs_value(rep.admissibility_gap) <= tol * (S(1) + abs_value(rep.static_cost));
    return rep;
}

}  // namespace mot

#endif
