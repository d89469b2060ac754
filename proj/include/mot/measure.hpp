#ifndef MOT_MEASURE_HPP
#define MOT_MEASURE_HPP

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "mot/errors.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Finite nonnegative measure on the real line with finite support.
 *
 * The support is strictly increasing, the weights are nonnegative and at
 * least one of them is positive. Instances are immutable after construction
 * and safe to share between threads.
 */
template <class S>
class DiscreteMeasure {
  public:
    DiscreteMeasure(std::vector<S> support, std::vector<S> weights)
        : support_(std::move(support)), weights_(std::move(weights)) {
        if (support_.empty() || support_.size() != weights_.size())
            throw Error("measure: support/weights size mismatch");
        mass_ = S(0);
        first_moment_ = S(0);
        for (std::size_t i = 0; i < support_.size(); ++i) {
            if (i > 0 && !(support_[i - 1] < support_[i]))
                throw Error("measure: support must be strictly increasing");
            if (weights_[i] < 0) throw Error("measure: negative weight");
            mass_ += weights_[i];
            first_moment_ += weights_[i] * support_[i];
        }
        if (!(mass_ > 0)) throw Error("measure: total mass must be positive");
    }

    // Sorts, merges duplicate positions, and drops zero-weight atoms.
    static DiscreteMeasure from_atoms(std::vector<std::pair<S, S>> atoms) {
        std::sort(atoms.begin(), atoms.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<S> xs, ws;
        for (const auto& [x, w] : atoms) {
            if (w == 0) continue;
            if (!xs.empty() && xs.back() == x)
                ws.back() += w;
            else {
                xs.push_back(x);
                ws.push_back(w);
            }
        }
        return DiscreteMeasure(std::move(xs), std::move(ws));
    }

    static DiscreteMeasure point_mass(S x, S w = S(1)) {
        return DiscreteMeasure({x}, {w});
    }

    const std::vector<S>& support() const { return support_; }
    const std::vector<S>& weights() const { return weights_; }
    std::size_t size() const { return support_.size(); }

    S mass() const { return mass_; }
    S first_moment() const { return first_moment_; }
    S barycenter() const { return first_moment_ / mass_; }

    S min_support() const { return support_.front(); }
    S max_support() const { return support_.back(); }

    // Mass of the atom at x (zero if x is not a support point).
    S atom(const S& x) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), x);
        if (it != support_.end() && *it == x)
            return weights_[static_cast<std::size_t>(it - support_.begin())];
        return S(0);
    }

    // u(x) = integral of |x - y| against the measure.
    S potential(const S& x) const {
        S acc(0);
        for (std::size_t i = 0; i < support_.size(); ++i)
            acc += weights_[i] * abs_value(x - support_[i]);
        return acc;
    }

    template <class F>
    S integrate(F&& f) const {
        S acc(0);
        for (std::size_t i = 0; i < support_.size(); ++i) acc += weights_[i] * f(support_[i]);
        return acc;
    }

    S mass_in_open(const S& left, const S& right) const {
        S acc(0);
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (left < support_[i] && support_[i] < right) acc += weights_[i];
        return acc;
    }

    S mass_right_of(const S& x) const {
        S acc(0);
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (support_[i] > x) acc += weights_[i];
        return acc;
    }

    S mass_left_of(const S& x) const {
        S acc(0);
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (support_[i] < x) acc += weights_[i];
        return acc;
    }

    bool operator==(const DiscreteMeasure& other) const {
        return support_ == other.support_ && weights_ == other.weights_;
    }

  private:
    std::vector<S> support_;
    std::vector<S> weights_;
    S mass_;
    S first_moment_;
};

template <class S>
S potential_eval(const DiscreteMeasure<S>& m, const S& x) {
    return m.potential(x);
}

/**
 * Interval domain of an irreducible pair: the open interval (left, right)
 * plus any finite endpoint flagged closed. Closed endpoints carry atoms of
 * the dominating marginal. Endpoints are always finite here because every
 * measure has finite support.
 */
template <class S>
struct Domain {
    S left;
    S right;
    bool left_closed = false;
    bool right_closed = false;

    bool in_interior(const S& x) const { return left < x && x < right; }

    bool contains(const S& x) const {
        if (in_interior(x)) return true;
        if (left_closed && x == left) return true;
        if (right_closed && x == right) return true;
        return false;
    }

    bool on_boundary(const S& x) const {
        return (left_closed && x == left) || (right_closed && x == right);
    }
};

template <class S>
std::vector<S> merged_support(const DiscreteMeasure<S>& m1, const DiscreteMeasure<S>& m2) {
    std::vector<S> pts;
    pts.reserve(m1.size() + m2.size());
    std::merge(m1.support().begin(), m1.support().end(), m2.support().begin(),
               m2.support().end(), std::back_inserter(pts));
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/**
 * Decides the convex order by comparing mass, barycenter, and the potential
 * functions on the union of both supports. Both potentials are piecewise
 * linear with kinks exactly at the support points, so pointwise comparison
 * there is equivalent to global comparison.
 */
template <class S>
bool convex_order_leq(const DiscreteMeasure<S>& m1, const DiscreteMeasure<S>& m2,
                      const S& tol = scalar_traits<S>::default_tol()) {
    if (abs_value(m1.mass() - m2.mass()) > tol) return false;
    if (abs_value(m1.first_moment() - m2.first_moment()) > tol) return false;
    for (const S& p : merged_support(m1, m2))
        if (m1.potential(p) > m2.potential(p) + tol) return false;
    return true;
}

template <class S>
struct IrreducibleComponent {
    Domain<S> domain;
    DiscreteMeasure<S> lower;  // restriction of the smaller marginal
    DiscreteMeasure<S> upper;  // matched restriction of the larger marginal
};

template <class S>
struct Decomposition {
    std::vector<IrreducibleComponent<S>> components;
    // Immovable part: atoms shared by both marginals at potential-contact
    // points. Empty when the pair is irreducible.
    std::vector<std::pair<S, S>> static_residue;

    S static_mass() const {
        S acc(0);
        for (const auto& [x, w] : static_residue) acc += w;
        return acc;
    }

    template <class F>
    S static_integral(F&& f) const {
        S acc(0);
        for (const auto& [x, w] : static_residue) acc += w * f(x);
        return acc;
    }
};

/**
 * Splits mu <=c nu into irreducible components. The set where the potentials
 * differ decomposes into maximal open intervals; mu restricts to each, and nu
 * splits into interior restrictions plus uniquely determined boundary-atom
 * allocations (matching mass and mean per component). Atoms of mu sitting at
 * potential-contact points never move and are returned as the static residue.
 */
template <class S>
Decomposition<S> irreducible_components(const DiscreteMeasure<S>& mu,
                                        const DiscreteMeasure<S>& nu,
                                        const S& tol = scalar_traits<S>::default_tol()) {
    if (!convex_order_leq(mu, nu, tol)) throw NotInConvexOrder();

    const std::vector<S> pts = merged_support(mu, nu);
    std::vector<bool> positive(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        positive[i] = nu.potential(pts[i]) - mu.potential(pts[i]) > tol;

    Decomposition<S> out;
    std::map<S, S> boundary_usage;  // nu mass claimed at contact points

    std::size_t i = 0;
    while (i < pts.size()) {
        if (!positive[i]) {
            ++i;
            continue;
        }
        std::size_t first = i;
        while (i < pts.size() && positive[i]) ++i;
        // The strict-inequality run opens at the previous contact point and
        // closes at the next one; both exist because the potentials agree at
        // the extremes of the merged support.
        if (first == 0 || i == pts.size())
            throw NotIrreducible("potential gap does not close at the support hull");
        const S left = pts[first - 1];
        const S right = pts[i];

        std::vector<std::pair<S, S>> mu_atoms, nu_atoms;
        S nu_mass(0), nu_moment(0);
        for (std::size_t k = 0; k < mu.size(); ++k)
            if (left < mu.support()[k] && mu.support()[k] < right)
                mu_atoms.emplace_back(mu.support()[k], mu.weights()[k]);
        for (std::size_t k = 0; k < nu.size(); ++k)
            if (left < nu.support()[k] && nu.support()[k] < right) {
                nu_atoms.emplace_back(nu.support()[k], nu.weights()[k]);
                nu_mass += nu.weights()[k];
                nu_moment += nu.weights()[k] * nu.support()[k];
            }
        if (mu_atoms.empty())
            throw NotIrreducible("component without any mass of the smaller marginal");

        S mu_mass(0), mu_moment(0);
        for (const auto& [x, w] : mu_atoms) {
            mu_mass += w;
            mu_moment += w * x;
        }

        // Boundary masses solve: w_l + w_r = dm, w_l*left + w_r*right = ds.
        const S dm = mu_mass - nu_mass;
        const S ds = mu_moment - nu_moment;
        S w_right = (ds - dm * left) / (right - left);
        S w_left = dm - w_right;
        const S mass_tol = tol * (S(1) + mu.mass());
        if (w_left < -mass_tol || w_right < -mass_tol)
            throw NotIrreducible("boundary atom allocation is infeasible");
        if (w_left < 0) w_left = S(0);
        if (w_right < 0) w_right = S(0);
        if (w_left > 0) {
            nu_atoms.emplace_back(left, w_left);
            boundary_usage[left] += w_left;
        }
        if (w_right > 0) {
            nu_atoms.emplace_back(right, w_right);
            boundary_usage[right] += w_right;
        }

        Domain<S> dom{left, right, w_left > mass_tol, w_right > mass_tol};
        out.components.push_back(IrreducibleComponent<S>{
            dom, DiscreteMeasure<S>::from_atoms(std::move(mu_atoms)),
            DiscreteMeasure<S>::from_atoms(std::move(nu_atoms))});
    }

    // Static residue and consistency of the split: at every contact point the
    // remaining nu mass after component allocations must match mu's atom.
    const S mass_tol = tol * (S(1) + mu.mass());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (positive[k]) continue;
        const S& p = pts[k];
        const S mu_w = mu.atom(p);
        S used(0);
        if (auto it = boundary_usage.find(p); it != boundary_usage.end()) used = it->second;
        const S leftover = nu.atom(p) - used;
        if (abs_value(leftover - mu_w) > mass_tol)
            throw NotIrreducible("atom split at a component boundary is inconsistent");
        if (mu_w > 0) out.static_residue.emplace_back(p, mu_w);
    }
    return out;
}

/**
 * Domain of an irreducible pair. Fails with NotIrreducible when the
 * potential-gap set is empty or disconnected, or when mu is not concentrated
 * on it; the caller must then decompose via irreducible_components.
 */
template <class S>
Domain<S> domain_of(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                    const S& tol = scalar_traits<S>::default_tol()) {
    Decomposition<S> dec = irreducible_components(mu, nu, tol);
    if (dec.components.empty()) throw NotIrreducible("potential gap set is empty");
    if (dec.components.size() > 1) throw NotIrreducible("potential gap set is disconnected");
    if (dec.static_mass() > tol * (S(1) + mu.mass()))
        throw NotIrreducible("smaller marginal has mass outside the gap interval");
    Domain<S> dom = dec.components.front().domain;
    // Closedness flags come directly from atoms of nu at the endpoints.
    dom.left_closed = nu.atom(dom.left) > tol;
    dom.right_closed = nu.atom(dom.right) > tol;
    return dom;
}

}  // namespace mot

#endif
