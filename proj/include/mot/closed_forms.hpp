#ifndef MOT_CLOSED_FORMS_HPP
#define MOT_CLOSED_FORMS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "mot/auxiliary.hpp"
#include "mot/errors.hpp"
#include "mot/measure.hpp"
#include "mot/pwl.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Extremal line through a point on the lower potential graph staying below
 * the upper potential graph: either tangent at a support point or the
 * asymptote of the upper potential.
 */
template <class S>
struct TangentResult {
    enum class Kind { Tangent, Asymptote };
    Kind kind;
    S slope;
    std::optional<S> touch_point;  // set for tangents
};

/**
 * Maximal-slope (direction +1) or minimal-slope (direction -1) line through
 * (a, u_mu(a)) lying weakly below u_nu. Tangency candidates are the atoms of
 * nu on the relevant side; a slope matching the asymptote slope classifies
 * as the asymptote case, which forces the lower marginal to sit entirely on
 * the opposite side of a.
 */
template <class S>
TangentResult<S> max_slope_tangent(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                                   const S& a, int direction,
                                   const S& tol = scalar_traits<S>::default_tol()) {
    const Domain<S> dom = domain_of(mu, nu);
    if (!dom.in_interior(a)) throw PointOutsideInterior();
    const S m0 = mu.mass();
    const S ua = mu.potential(a);

    std::optional<S> best_slope;
    std::optional<S> best_z;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const S& z = nu.support()[i];
        if (direction > 0 ? !(z > a) : !(z < a)) continue;
        const S ratio = (nu.potential(z) - ua) / (z - a);
        if (direction > 0) {
            if (!best_slope || ratio < *best_slope) {
                best_slope = ratio;
                best_z = z;
            }
        } else {
            if (!best_slope || ratio > *best_slope) {
                best_slope = ratio;
                best_z = z;
            }
        }
    }
    if (!best_slope) throw PointOutsideInterior("no support point beyond the anchor");

    const S cap = direction > 0 ? m0 : -m0;
    const bool asymptotic = direction > 0 ? (*best_slope >= cap - tol * (S(1) + m0))
                                          : (*best_slope <= cap + tol * (S(1) + m0));
    if (asymptotic) {
        const S stray =
            direction > 0 ? mu.mass_right_of(a) : mu.mass_left_of(a);
        if (stray > tol * (S(1) + m0))
            throw Error("tangent search: asymptote slope reached but the lower marginal "
                        "has mass beyond the anchor");
        return TangentResult<S>{TangentResult<S>::Kind::Asymptote, cap, std::nullopt};
    }
    return TangentResult<S>{TangentResult<S>::Kind::Tangent, *best_slope, best_z};
}

template <class S>
PiecewiseLinear<S> risk_reversal_payoff(const S& a, const S& b) {
    // -(a-x)_+ + (x-b)_+ rewritten through absolute values
    return PiecewiseLinear<S>::from_kinks(-(a + b) / S(2), S(1),
                                          {{a, S(-1) / S(2)}, {b, S(1) / S(2)}});
}

template <class S>
PiecewiseLinear<S> butterfly_payoff(const S& a, const S& h) {
    return PiecewiseLinear<S>::from_kinks(
        S(0), S(0), {{a - h, S(1) / S(2)}, {a, S(-1)}, {a + h, S(1) / S(2)}});
}

namespace detail {

// Left derivative of the lower-marginal potential just before x.
template <class S>
S potential_left_slope(const DiscreteMeasure<S>& m, const S& x) {
    return S(2) * m.mass_left_of(x) - m.mass();
}

// Right derivative of the upper-marginal potential just after x.
template <class S>
S potential_right_slope(const DiscreteMeasure<S>& m, const S& x) {
    return m.mass() - S(2) * m.mass_right_of(x);
}

template <class S>
DiscreteMeasure<S> measure_from_kink_list(std::vector<std::pair<S, S>> kinks, const S& tol) {
    std::vector<std::pair<S, S>> atoms;
    for (auto& [x, jump] : kinks) {
        S w = jump / S(2);
        if (w < 0) {
            if (w < -tol) throw NumericalFailure("potential construction is not convex");
            continue;
        }
        if (w > 0) atoms.emplace_back(x, w);
    }
    return DiscreteMeasure<S>::from_atoms(std::move(atoms));
}

}  // namespace detail

/**
 * Closed-form optimizer for the risk reversal -(a-x)_+ + (x-b)_+.
 *
 * Tangent case: the optimal law keeps the lower potential left of a, follows
 * the tangent line on [a, z], and the upper potential beyond z. Asymptote
 * case: the lower marginal itself is optimal and the convex leg is a
 * forward.
 */
template <class S>
AuxiliarySolution<S> risk_reversal_closed_form(const DiscreteMeasure<S>& mu,
                                               const DiscreteMeasure<S>& nu, const S& a,
                                               const S& b,
                                               const S& tol = scalar_traits<S>::default_tol()) {
    if (!(a < b)) throw ConfigError("risk reversal requires a < b");
    const Domain<S> dom = domain_of(mu, nu);
    if (!dom.in_interior(a)) throw PointOutsideInterior();
    const S m0 = mu.mass();
    const S m1 = mu.first_moment();

    const TangentResult<S> t = max_slope_tangent(mu, nu, a, +1, tol);

    AuxiliarySolution<S> sol{S(0), mu, DualPair<S>{PiecewiseLinear<S>::constant(S(0)),
                                                   PiecewiseLinear<S>::constant(S(0))},
                             {}};
    std::vector<S> extra{a, b};

    if (t.kind == TangentResult<S>::Kind::Asymptote) {
        sol.value = m1 - a * m0;
        sol.theta = mu;
        sol.dual.phi = PiecewiseLinear<S>::constant(S(0));
        sol.dual.psi = PiecewiseLinear<S>::affine(-a, S(1));
    } else {
        const S z = *t.touch_point;
        const S r = z > b ? z : b;
        const S alpha = (b - a) / (r - a);
        sol.value = m1 - (a + b) / S(2) * m0 +
                    (b - a) / S(2) * (nu.potential(r) - mu.potential(a)) / (r - a);
        // phi = -alpha (x-a)_+ ; psi = x - a + alpha (x-r)_+
        sol.dual.phi = PiecewiseLinear<S>::from_kinks(alpha * a / S(2), -alpha / S(2),
                                                      {{a, -alpha / S(2)}});
        sol.dual.psi = PiecewiseLinear<S>::from_kinks(-a - alpha * r / S(2), S(1) + alpha / S(2),
                                                      {{r, alpha / S(2)}});

        std::vector<std::pair<S, S>> kinks;
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (mu.support()[i] < a) kinks.emplace_back(mu.support()[i], S(2) * mu.weights()[i]);
        kinks.emplace_back(a, t.slope - detail::potential_left_slope(mu, a));
        kinks.emplace_back(z, detail::potential_right_slope(nu, z) - t.slope);
        for (std::size_t i = 0; i < nu.size(); ++i)
            if (nu.support()[i] > z) kinks.emplace_back(nu.support()[i], S(2) * nu.weights()[i]);
        sol.theta = detail::measure_from_kink_list(std::move(kinks), tol * (S(1) + m0));
        extra.push_back(z);
    }
    sol.grid = build_grid(mu, nu, risk_reversal_payoff(a, b), dom, 1, extra);
    return sol;
}

/**
 * Closed-form optimizer for the butterfly spread. Two extremal lines through
 * (a, u_mu(a)) determine the optimal law; asymptote cases use the limiting
 * hedge legs.
 */
template <class S>
AuxiliarySolution<S> butterfly_closed_form(const DiscreteMeasure<S>& mu,
                                           const DiscreteMeasure<S>& nu, const S& a, const S& h,
                                           const S& tol = scalar_traits<S>::default_tol()) {
    if (!(h > 0)) throw ConfigError("butterfly requires h > 0");
    const Domain<S> dom = domain_of(mu, nu);
    if (!dom.in_interior(a)) throw PointOutsideInterior();
    const S m0 = mu.mass();
    const S ua = mu.potential(a);

    const TangentResult<S> tp = max_slope_tangent(mu, nu, a, +1, tol);
    const TangentResult<S> tm = max_slope_tangent(mu, nu, a, -1, tol);
    const bool tangent_p = tp.kind == TangentResult<S>::Kind::Tangent;
    const bool tangent_m = tm.kind == TangentResult<S>::Kind::Tangent;

    S s_plus, s_minus, alpha(0), beta(0);
    S big_l(0), big_r(0);
    if (tangent_p) {
        big_r = *tp.touch_point > a + h ? *tp.touch_point : a + h;
        s_plus = (nu.potential(big_r) - ua) / (big_r - a);
        beta = h / (big_r - a);
    } else {
        s_plus = m0;
    }
    if (tangent_m) {
        big_l = *tm.touch_point < a - h ? *tm.touch_point : a - h;
        s_minus = (nu.potential(big_l) - ua) / (a - big_l);
        alpha = h / (a - big_l);
    } else {
        s_minus = m0;  // the limiting chord slope of the left asymptote
    }

    AuxiliarySolution<S> sol{h / S(2) * (s_plus + s_minus), mu,
                             DualPair<S>{PiecewiseLinear<S>::constant(S(0)),
                                         PiecewiseLinear<S>::constant(S(0))},
                             {}};

    // phi = -(alpha+beta)(x-a)_+ ; psi = alpha (x-L)_+ + beta (x-R)_+ with the
    // alpha term degenerating to the constant h in the left asymptote case.
    const S ab = alpha + beta;
    sol.dual.phi = PiecewiseLinear<S>::from_kinks(ab * a / S(2), -ab / S(2), {{a, -ab / S(2)}});
    {
        std::vector<std::pair<S, S>> kinks;
        S c0(0), c1(0);
        if (tangent_m) {
            kinks.emplace_back(big_l, alpha / S(2));
            c0 += -alpha * big_l / S(2);
            c1 += alpha / S(2);
        } else {
            c0 += h;
        }
        if (tangent_p) {
            kinks.emplace_back(big_r, beta / S(2));
            c0 += -beta * big_r / S(2);
            c1 += beta / S(2);
        }
        sol.dual.psi = PiecewiseLinear<S>::from_kinks(c0, c1, std::move(kinks));
    }

    const S left_seg = tangent_m ? (ua - nu.potential(*tm.touch_point)) / (a - *tm.touch_point)
                                 : -m0;
    const S right_seg = tangent_p ? (nu.potential(*tp.touch_point) - ua) / (*tp.touch_point - a)
                                  : m0;
    std::vector<std::pair<S, S>> kinks;
    if (tangent_m) {
        const S zm = *tm.touch_point;
        for (std::size_t i = 0; i < nu.size(); ++i)
            if (nu.support()[i] < zm) kinks.emplace_back(nu.support()[i], S(2) * nu.weights()[i]);
        kinks.emplace_back(zm, left_seg - detail::potential_left_slope(nu, zm));
    }
    kinks.emplace_back(a, right_seg - left_seg);
    if (tangent_p) {
        const S zp = *tp.touch_point;
        kinks.emplace_back(zp, detail::potential_right_slope(nu, zp) - right_seg);
        for (std::size_t i = 0; i < nu.size(); ++i)
            if (nu.support()[i] > zp) kinks.emplace_back(nu.support()[i], S(2) * nu.weights()[i]);
    }
    sol.theta = detail::measure_from_kink_list(std::move(kinks), tol * (S(1) + m0));

    std::vector<S> extra{a, a - h, a + h};
    if (tangent_m) extra.push_back(*tm.touch_point);
    if (tangent_p) extra.push_back(*tp.touch_point);
    sol.grid = build_grid(mu, nu, butterfly_payoff(a, h), dom, 1, extra);
    return sol;
}

}  // namespace mot

#endif
