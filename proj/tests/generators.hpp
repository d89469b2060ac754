// Shared random-instance generators for the property tests. All draws come
// from dyadic lattices so floating potentials evaluate without rounding
// surprises.
#ifndef MOT_TESTS_GENERATORS_HPP
#define MOT_TESTS_GENERATORS_HPP

#include <random>
#include <utility>
#include <vector>

#include "mot/auxiliary.hpp"
#include "mot/measure.hpp"
#include "mot/pwl.hpp"

namespace mot::testgen {

using Rng = std::mt19937_64;

inline double lattice(Rng& rng, double lo, double hi, int denom = 64) {
    std::uniform_int_distribution<long> d(static_cast<long>(lo * denom),
                                          static_cast<long>(hi * denom));
    return static_cast<double>(d(rng)) / denom;
}

inline DiscreteMeasure<double> random_measure(Rng& rng, int max_atoms, double lo = -8,
                                              double hi = 8, int min_atoms = 2) {
    std::uniform_int_distribution<int> count(min_atoms, std::max(min_atoms, max_atoms));
    const int n = count(rng);
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < n; ++i)
        atoms.emplace_back(lattice(rng, lo, hi, 256), lattice(rng, 0.25, 4.0, 16));
    auto m = DiscreteMeasure<double>::from_atoms(std::move(atoms));
    // normalize to unit mass on the lattice scale
    std::vector<double> w = m.weights();
    for (double& x : w) x /= m.mass();
    return DiscreteMeasure<double>(m.support(), w);
}

// Affine contraction toward the barycenter: strictly smaller in convex order.
template <class S>
DiscreteMeasure<S> shrink_toward_mean(const DiscreteMeasure<S>& m, const S& c) {
    const S b = m.barycenter();
    std::vector<S> xs;
    xs.reserve(m.size());
    for (const S& x : m.support()) xs.push_back(c * x + (S(1) - c) * b);
    return DiscreteMeasure<S>(std::move(xs), m.weights());
}

struct Pair {
    DiscreteMeasure<double> mu;
    DiscreteMeasure<double> nu;
    Domain<double> dom;
};

// Irreducible pair: a random upper marginal and a contracted lower one,
// resampled until the potential gap is a single interval carrying all of mu.
inline Pair random_irreducible_pair(Rng& rng, int max_atoms = 12, int min_atoms = 2) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        auto nu = random_measure(rng, max_atoms, -8, 8, min_atoms);
        if (nu.size() < 2) continue;
        std::uniform_int_distribution<int> cd(3, 7);
        const double c = cd(rng) / 8.0;
        auto mu = shrink_toward_mean(nu, c);
        try {
            return Pair{mu, nu, domain_of(mu, nu)};
        } catch (const Error&) {
            continue;
        }
    }
    throw std::runtime_error("could not draw an irreducible pair");
}

// Piecewise-linear payoff with breakpoints inside the domain.
inline PiecewiseLinear<double> random_payoff(Rng& rng, const Domain<double>& dom,
                                             int max_breaks = 6, double lo = 0, double hi = 5) {
    std::uniform_int_distribution<int> count(2, max_breaks);
    const int n = count(rng);
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(lattice(rng, dom.left, dom.right));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.size() < 2) xs = {dom.left, dom.right};
    std::vector<double> ys;
    for (std::size_t i = 0; i < xs.size(); ++i) ys.push_back(lattice(rng, lo, hi, 16));
    return PiecewiseLinear<double>::interpolate(std::move(xs), std::move(ys));
}

// Concave moderator on the domain, possibly with downward boundary jumps.
inline PiecewiseLinear<double> random_moderator(Rng& rng, const Domain<double>& dom) {
    std::uniform_int_distribution<int> count(1, 4);
    const int n = count(rng);
    std::vector<std::pair<double, double>> kinks;
    for (int i = 0; i < n; ++i)
        kinks.emplace_back(lattice(rng, dom.left, dom.right), -lattice(rng, 0.0, 2.0, 16));
    auto chi = PiecewiseLinear<double>::from_kinks(lattice(rng, -2, 2, 16),
                                                   lattice(rng, -1, 1, 16), std::move(kinks));
    std::uniform_int_distribution<int> coin(0, 3);
    if (dom.left_closed && coin(rng) == 1 && chi.breakpoints().front() > dom.left)
        chi.set_jump(dom.left, -lattice(rng, 0.0, 1.0, 16));
    if (dom.right_closed && coin(rng) == 2 && chi.breakpoints().back() < dom.right)
        chi.set_jump(dom.right, -lattice(rng, 0.0, 1.0, 16));
    return chi;
}

// A law between the two marginals: optimizer of a random linear objective.
inline DiscreteMeasure<double> random_between(Rng& rng, const Pair& p) {
    auto f = random_payoff(rng, p.dom, 5, -3, 3);
    auto sol = solve_primal(p.mu, p.nu, f, 1);
    return sol.theta;
}

}  // namespace mot::testgen

#endif
