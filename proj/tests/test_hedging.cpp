#include <doctest.h>

#include "generators.hpp"
#include "mot/hedging.hpp"
#include "mot/simulation.hpp"

using namespace mot;
using Rat = Rational;
using MeasQ = DiscreteMeasure<Rat>;
using PwlQ = PiecewiseLinear<Rat>;
using PathQ = SteppedPath<Rat>;

namespace {

Rat frac(long n, long d) { return Rat(n) / Rat(d); }

struct Worked {
    MeasQ mu = MeasQ::point_mass(Rat(0));
    MeasQ nu = MeasQ({Rat(-1), Rat(0), Rat(1)}, {frac(1, 3), frac(1, 3), frac(1, 3)});
    PwlQ f = PwlQ::interpolate({Rat(-1), frac(-1, 2), Rat(0), frac(1, 2), Rat(1)},
                               {Rat(3), Rat(2), Rat(0), Rat(2), Rat(3)});
    // the known optimal static legs: zero and the convex interpolation
    DualPair<Rat> pair{PwlQ::constant(Rat(0)),
                       PwlQ::interpolate({Rat(-1), Rat(0), Rat(1)}, {Rat(3), Rat(1), Rat(3)})};
    Domain<Rat> dom{Rat(-1), Rat(1), true, true};
};

// independent evaluator via the plain product-rule form of the integral
template <class S>
S integration_by_parts(const HedgeSpec<S>& h, const SteppedPath<S>& path) {
    S holdings_terminal = h.h0;
    S sum_x_dh(0);
    for (std::size_t i = 0; i < h.atom_times.size(); ++i) {
        holdings_terminal += h.h_values[i] * h.atom_weights[i];
        sum_x_dh += path.at(h.atom_times[i]) * h.h_values[i] * h.atom_weights[i];
    }
    return path.terminal() * holdings_terminal - path.initial() * h.h0 - sum_x_dh;
}

}  // namespace

TEST_CASE("path membership in the admissible set") {
    Domain<Rat> dom{Rat(-1), Rat(1), true, true};
    CHECK(path_in_domain(PathQ::constant(Rat(1), frac(1, 2)), dom));
    // jump to the boundary atom and stay
    CHECK(path_in_domain(PathQ(Rat(1), {frac(1, 4)}, {Rat(0), Rat(1)}), dom));
    CHECK(path_in_domain(PathQ(Rat(1), {frac(1, 4), frac(1, 2)}, {Rat(0), Rat(1), Rat(1)}), dom));
    // touching the boundary and coming back violates the capture rule
    CHECK_FALSE(
        path_in_domain(PathQ(Rat(1), {frac(1, 4), frac(1, 2)}, {Rat(0), Rat(1), Rat(0)}), dom));
    // must start in the interior
    CHECK_FALSE(path_in_domain(PathQ::constant(Rat(1), Rat(1)), dom));
    // open domain excludes its endpoints entirely
    Domain<Rat> open{Rat(-1), Rat(1), false, false};
    CHECK_FALSE(path_in_domain(PathQ(Rat(1), {frac(1, 2)}, {Rat(0), Rat(1)}), open));
}

TEST_CASE("holdings for affine convex leg are constant") {
    Worked w;
    DualPair<Rat> pair{PwlQ::constant(Rat(0)), PwlQ::affine(Rat(2), Rat(5))};
    PathQ path(Rat(1), {frac(1, 4)}, {Rat(0), frac(1, 2)});
    auto a = AveragingProcess<Rat>::fixed_time(frac(1, 2), Rat(1));
    auto h = dynamic_part(pair, path, a, w.dom);
    CHECK(h.h0 == Rat(0));
    REQUIRE(h.h_values.size() == 1);
    CHECK(h.h_values[0] == Rat(-5));
}

TEST_CASE("time-zero holding reduces to the concave slope when no initial mass") {
    Worked w;
    DualPair<Rat> pair{PwlQ::affine(Rat(0), Rat(3)), PwlQ::affine(Rat(0), Rat(-1))};
    PathQ path = PathQ::constant(Rat(1), frac(1, 4));
    auto a = AveragingProcess<Rat>::asian(Rat(1));
    CHECK(a.mass_at_zero() == Rat(0));
    auto h = dynamic_part(pair, path, a, w.dom);
    CHECK(h.h0 == Rat(3));
}

TEST_CASE("initial averaging mass splits the time-zero holding") {
    Worked w;
    DualPair<Rat> pair{PwlQ::affine(Rat(0), Rat(3)), PwlQ::affine(Rat(0), Rat(-1))};
    PathQ path = PathQ::constant(Rat(1), frac(1, 4));
    auto a = AveragingProcess<Rat>::terminal_half(Rat(1));
    auto h = dynamic_part(pair, path, a, w.dom);
    // h0 = phi'(x0)(1 - 1/2) - psi'(x0) * 1/2
    CHECK(h.h0 == frac(3, 2) + frac(1, 2));
}

TEST_CASE("worked example holdings along a visiting path") {
    Worked w;
    PathQ path(Rat(1), {frac(1, 4), frac(3, 4)}, {Rat(0), frac(-1, 2), frac(1, 2)});
    auto a = AveragingProcess<Rat>::custom_atoms({{frac(1, 2), frac(1, 2)}, {frac(7, 8), frac(1, 2)}},
                                                 Rat(1));
    auto h = dynamic_part(w.pair, path, a, w.dom);
    REQUIRE(h.h_values.size() == 2);
    CHECK(h.h_values[0] == Rat(2));   // -psi'(-1/2) = 2
    CHECK(h.h_values[1] == Rat(-2));  // -psi'(1/2) = -2
}

TEST_CASE("holdings vanish once the path is absorbed at a closed boundary") {
    // slope selections are zero outside the interior, so the traded quantity
    // at an absorbed spot is the negated concave slope only
    Worked w;
    PathQ path(Rat(1), {frac(1, 4)}, {Rat(0), Rat(1)});
    auto a = AveragingProcess<Rat>::custom_atoms({{frac(1, 2), Rat(1)}}, Rat(1));
    auto h = dynamic_part(w.pair, path, a, w.dom);
    REQUIRE(h.h_values.size() == 1);
    CHECK(h.h_values[0] == Rat(0));  // phi' = psi' = 0 at the boundary atom
    CHECK(pathwise_integral(h, path) == Rat(0));
}

TEST_CASE("pathwise integral basics") {
    Worked w;
    SUBCASE("constant path produces zero gains") {
        PathQ path = PathQ::constant(Rat(1), frac(1, 3));
        auto a = AveragingProcess<Rat>::asian(Rat(1));
        auto h = dynamic_part(w.pair, path, a, w.dom);
        CHECK(pathwise_integral(h, path) == Rat(0));
    }
    SUBCASE("single-jump running average by hand") {
        // path: 0 on [0,1/4), 1/2 on [1/4,1]; holdings -psi'
        PathQ path(Rat(1), {frac(1, 4)}, {Rat(0), frac(1, 2)});
        auto a = AveragingProcess<Rat>::asian(Rat(1));
        auto h = dynamic_part(w.pair, path, a, w.dom);
        // segment [0,1/4): h = -psi'(0) = 2, (X_T - 0) * 2 * 1/4 = 1/4
        // segment [1/4,1]: X_T - X_t = 0
        CHECK(pathwise_integral(h, path) == frac(1, 4));
    }
}

TEST_CASE("pathwise integral equals the integration-by-parts evaluation") {
    testgen::Rng rng(67);
    for (int trial = 0; trial < 40; ++trial) {
        auto p = testgen::random_irreducible_pair(rng, 8);
        auto f = testgen::random_payoff(rng, p.dom);
        auto sol = solve_primal(p.mu, p.nu, f, 1);
        auto q = build_two_step(p.mu, sol.theta, p.nu);
        auto a = trial % 2 == 0 ? AveragingProcess<double>::asian(1.0)
                                : AveragingProcess<double>::fixed_time(0.5, 1.0);
        for (const auto& wp : embed_paths(q, 4, 1.0)) {
            auto h = dynamic_part(sol.dual, wp.path, a, p.dom);
            const double lhs = pathwise_integral(h, wp.path);
            const double rhs = integration_by_parts(h, wp.path);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("dynamic gains average to zero under martingale couplings") {
    testgen::Rng rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = testgen::random_irreducible_pair(rng, 8);
        auto f = testgen::random_payoff(rng, p.dom);
        auto sol = solve_primal(p.mu, p.nu, f, 1);
        auto q = build_two_step(p.mu, sol.theta, p.nu);
        auto a = AveragingProcess<double>::asian(1.0);
        double mean = 0;
        for (const auto& wp : embed_paths(q, 8, 1.0))
            mean += wp.weight * pathwise_integral(dynamic_part(sol.dual, wp.path, a, p.dom),
                                                  wp.path);
        CHECK(std::fabs(mean) <= 1e-9 * (1 + std::fabs(sol.value)));
    }
}

TEST_CASE("superhedge verification on the worked example") {
    Worked w;
    MeasQ theta({frac(-1, 2), Rat(1)}, {frac(2, 3), frac(1, 3)});
    auto q = build_two_step(w.mu, theta, w.nu);
    auto paths = embed_paths(q, 4, Rat(1));
    auto a = AveragingProcess<Rat>::fixed_time(frac(1, 2), Rat(1));
    auto rep = verify_superhedge(w.pair, w.f, a, paths, w.dom, w.mu, w.nu);
    CHECK(rep.ok());
    CHECK(rep.min_slack >= Rat(0));
    CHECK(rep.min_slack == Rat(0));  // tight on the optimizer support
    CHECK(rep.admissibility_gap == Rat(0));
    CHECK(rep.static_cost == frac(7, 3));
}

TEST_CASE("convex payoff hedged by its own convex leg") {
    Worked w;
    std::vector<Rat> grid{Rat(-1), frac(-1, 2), Rat(0), frac(1, 2), Rat(1)};
    std::vector<Rat> fy;
    for (const Rat& g : grid) fy.push_back(g * g);
    auto f = PwlQ::interpolate(grid, fy);
    DualPair<Rat> pair{PwlQ::constant(Rat(0)), f};
    auto q = build_two_step(w.mu, w.nu, w.nu);
    auto rep = verify_superhedge(pair, f, AveragingProcess<Rat>::asian(Rat(1)),
                                 embed_paths(q, 4, Rat(1)), w.dom, w.mu, w.nu);
    CHECK(rep.pathwise_ok);
    CHECK(rep.min_slack >= Rat(0));
}

TEST_CASE("deliberately lowered convex leg produces a negative slack") {
    Worked w;
    MeasQ theta({frac(-1, 2), Rat(1)}, {frac(2, 3), frac(1, 3)});
    auto q = build_two_step(w.mu, theta, w.nu);
    DualPair<Rat> bad{w.pair.phi, w.pair.psi.shifted(Rat(-1))};
    auto rep = verify_superhedge(bad, w.f, AveragingProcess<Rat>::fixed_time(frac(1, 2), Rat(1)),
                                 embed_paths(q, 4, Rat(1)), w.dom, w.mu, w.nu);
    CHECK_FALSE(rep.pathwise_ok);
    CHECK(rep.min_slack < Rat(0));
}

TEST_CASE("paths outside the admissible set are rejected") {
    Worked w;
    std::vector<WeightedPath<Rat>> paths{
        {PathQ(Rat(1), {frac(1, 2)}, {Rat(0), Rat(2)}), Rat(1)}};
    CHECK_THROWS_AS(
        verify_superhedge(w.pair, w.f, AveragingProcess<Rat>::asian(Rat(1)), paths, w.dom,
                          w.mu, w.nu),
        PathOutsideOmega);
}

TEST_CASE("slack is invariant under affine reshuffling of the legs") {
    testgen::Rng rng(73);
    for (int trial = 0; trial < 15; ++trial) {
        auto p = testgen::random_irreducible_pair(rng, 8);
        auto f = testgen::random_payoff(rng, p.dom);
        auto sol = solve_primal(p.mu, p.nu, f, 1);
        auto q = build_two_step(p.mu, sol.theta, p.nu);
        auto paths = embed_paths(q, 4, 1.0);
        auto a = AveragingProcess<double>::fixed_time(0.5, 1.0);
        const double g0 = testgen::lattice(rng, -2, 2, 16);
        const double g1 = testgen::lattice(rng, -1, 1, 16);
        DualPair<double> moved{sol.dual.phi + PiecewiseLinear<double>::affine(g0, g1),
                               sol.dual.psi - PiecewiseLinear<double>::affine(g0, g1)};
        auto base = verify_superhedge(sol.dual, f, a, paths, p.dom, p.mu, p.nu);
        auto shuf = verify_superhedge(moved, f, a, paths, p.dom, p.mu, p.nu);
        for (std::size_t i = 0; i < base.rows.size(); ++i)
            CHECK(base.rows[i].slack == doctest::Approx(shuf.rows[i].slack).epsilon(1e-9));
        CHECK(base.static_cost == doctest::Approx(shuf.static_cost).epsilon(1e-9));
    }
}

TEST_CASE("exercise-time decomposition of the portfolio value") {
    // the portfolio value equals the averaged stopped-portfolio expression
    testgen::Rng rng(79);
    for (int trial = 0; trial < 15; ++trial) {
        auto p = testgen::random_irreducible_pair(rng, 8);
        auto f = testgen::random_payoff(rng, p.dom);
        auto sol = solve_primal(p.mu, p.nu, f, 1);
        auto q = build_two_step(p.mu, sol.theta, p.nu);
        auto a = AveragingProcess<double>::custom_atoms({{0.25, 0.5}, {0.75, 0.25}, {1.0, 0.25}},
                                                        1.0);
        for (const auto& wp : embed_paths(q, 4, 1.0)) {
            const auto& path = wp.path;
            const double x0 = path.initial(), xT = path.terminal();
            const double dphi0 = detail::clipped_left_derivative(sol.dual.phi, x0, p.dom);
            const double stat = sol.dual.phi(x0) + sol.dual.psi(xT);
            const double lhs =
                stat + pathwise_integral(dynamic_part(sol.dual, path, a, p.dom), path);
            double rhs = 0;
            for (const auto& [t, wgt] : a.atoms()) {
                const double xt = path.at(t);
                const double dpsi = detail::clipped_left_derivative(sol.dual.psi, xt, p.dom);
                rhs += wgt * (stat + dphi0 * (xt - x0) - dpsi * (xT - xt));
            }
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("steep convex leg near a closed boundary is interpolated") {
    Worked w;
    // convex leg with an unbounded-slope sentinel on the right tail
    PwlQ psi = PwlQ::interpolate({Rat(-1), Rat(0), frac(1, 2)}, {Rat(3), Rat(1), Rat(2)});
    psi.mark_unbounded_right();
    DualPair<Rat> pair{PwlQ::constant(Rat(0)), psi};
    PathQ path(Rat(1), {frac(1, 4)}, {Rat(0), frac(3, 4)});
    auto a = AveragingProcess<Rat>::fixed_time(frac(1, 2), Rat(1));
    auto h = dynamic_part(pair, path, a, w.dom);
    REQUIRE(h.h_values.size() == 1);
    // chord between the last breakpoint and the boundary value replaces the
    // unbounded tail slope: (psi(1) - psi(1/2)) / (1/2)
    const Rat chord = (psi(Rat(1)) - psi(frac(1, 2))) / frac(1, 2);
    CHECK(h.h_values[0] == -chord);
}
