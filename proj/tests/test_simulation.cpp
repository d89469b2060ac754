#include <doctest.h>

#include "generators.hpp"
#include "mot/hedging.hpp"
#include <map>

#include "mot/simulation.hpp"

using namespace mot;
using Rat = Rational;
using MeasQ = DiscreteMeasure<Rat>;
using PwlQ = PiecewiseLinear<Rat>;

namespace {
Rat frac(long n, long d) { return Rat(n) / Rat(d); }

struct Worked {
    MeasQ mu = MeasQ::point_mass(Rat(0));
    MeasQ theta = MeasQ({frac(-1, 2), Rat(1)}, {frac(2, 3), frac(1, 3)});
    MeasQ nu = MeasQ({Rat(-1), Rat(0), Rat(1)}, {frac(1, 3), frac(1, 3), frac(1, 3)});
    PwlQ f = PwlQ::interpolate({Rat(-1), frac(-1, 2), Rat(0), frac(1, 2), Rat(1)},
                               {Rat(3), Rat(2), Rat(0), Rat(2), Rat(3)});
};
}  // namespace

TEST_CASE("coupling construction") {
    Worked w;
    SUBCASE("lower marginal as the middle law forces the identity first step") {
        auto q = build_two_step(w.mu, w.mu, w.nu);
        q.validate(w.mu, w.mu, w.nu);
        for (const auto& a : q.atoms) CHECK(a.y1 == a.y2);
    }
    SUBCASE("upper marginal as the middle law forces the identity second step") {
        auto q = build_two_step(w.mu, w.nu, w.nu);
        q.validate(w.mu, w.nu, w.nu);
        for (const auto& a : q.atoms) CHECK(a.y2 == a.y3);
    }
    SUBCASE("worked middle law yields exact marginals and martingale steps") {
        auto q = build_two_step(w.mu, w.theta, w.nu);
        q.validate(w.mu, w.theta, w.nu);  // exact in rational mode
    }
    SUBCASE("order violation is rejected") {
        CHECK_THROWS_AS(build_two_step(w.nu, w.mu, w.nu), NotInConvexOrder);
    }
}

TEST_CASE("embedding into step paths") {
    Worked w;
    auto q = build_two_step(w.mu, w.theta, w.nu);
    SUBCASE("bad horizons are rejected") {
        CHECK_THROWS_AS(embed_paths(q, 1, Rat(1)), BadHorizon);
        CHECK_THROWS_AS(embed_paths(q, 4, frac(1, 8)), BadHorizon);
    }
    auto paths = embed_paths(q, 4, Rat(1));
    REQUIRE(paths.size() == q.atoms.size());
    SUBCASE("jump structure and marginals") {
        std::vector<std::pair<Rat, Rat>> starts, ends;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            const auto& path = paths[i].path;
            CHECK(path.jump_times() == std::vector<Rat>{frac(1, 4), Rat(1)});
            CHECK(path.values()[0] == q.atoms[i].y1);
            CHECK(path.values()[1] == q.atoms[i].y2);
            CHECK(path.values()[2] == q.atoms[i].y3);
            starts.emplace_back(path.initial(), paths[i].weight);
            ends.emplace_back(path.terminal(), paths[i].weight);
        }
        CHECK(MeasQ::from_atoms(starts) == w.mu);
        CHECK(MeasQ::from_atoms(ends) == w.nu);
    }
    SUBCASE("every embedded path is admissible") {
        Domain<Rat> dom = domain_of(w.mu, w.nu);
        for (const auto& wp : paths) CHECK(path_in_domain(wp.path, dom));
    }
    SUBCASE("constant atom embeds to a constant-valued path") {
        TwoStepCoupling<Rat> single;
        single.atoms = {{Rat(0), Rat(0), Rat(0), Rat(1)}};
        auto ps = embed_paths(single, 4, Rat(1));
        CHECK(ps[0].path.at(frac(1, 8)) == Rat(0));
        CHECK(ps[0].path.at(frac(7, 8)) == Rat(0));
        CHECK(ps[0].path.terminal() == Rat(0));
    }
}

TEST_CASE("averaging along step paths") {
    SteppedPath<Rat> path(Rat(1), {frac(1, 4)}, {Rat(2), Rat(7)});
    SUBCASE("probability measures average a constant path to itself") {
        auto c = SteppedPath<Rat>::constant(Rat(1), frac(5, 3));
        CHECK(average_along(c, AveragingProcess<Rat>::asian(Rat(1))) == frac(5, 3));
        CHECK(average_along(c, AveragingProcess<Rat>::terminal_half(Rat(1))) == frac(5, 3));
    }
    SUBCASE("running average weighs segment lengths") {
        CHECK(average_along(path, AveragingProcess<Rat>::asian(Rat(1))) ==
              frac(1, 4) * Rat(2) + frac(3, 4) * Rat(7));
    }
    SUBCASE("fixed exercise reads the spot") {
        CHECK(average_along(path, AveragingProcess<Rat>::fixed_time(frac(1, 2), Rat(1))) ==
              Rat(7));
        CHECK(average_along(path, AveragingProcess<Rat>::european_at(frac(1, 8), Rat(1))) ==
              Rat(2));
    }
}

TEST_CASE("interiority classification") {
    auto asian = AveragingProcess<double>::asian(1.0);
    CHECK(asian.interior());
    CHECK_FALSE(asian.strictly_interior());
    auto fixed = AveragingProcess<double>::fixed_time(0.5, 1.0);
    CHECK(fixed.strictly_interior());
    auto terminal = AveragingProcess<double>::terminal_half(1.0);
    CHECK_FALSE(terminal.interior());
    auto at_end = AveragingProcess<double>::fixed_time(1.0, 1.0);
    CHECK_FALSE(at_end.interior());
}

TEST_CASE("strictly interior exercise prices the middle law exactly") {
    Worked w;
    auto q = build_two_step(w.mu, w.theta, w.nu);
    const Rat expected = w.theta.integrate([&](const Rat& x) { return w.f(x); });
    REQUIRE(expected == frac(7, 3));
    for (int n : {4, 16}) {
        for (Rat t0 : {frac(1, 3), frac(1, 2), frac(3, 4)}) {
            const Rat p =
                price(q, n, Rat(1), w.f, AveragingProcess<Rat>::fixed_time(t0, Rat(1)));
            CHECK(p == expected);
        }
    }
}

TEST_CASE("running-average price converges at first order") {
    Worked w;
    auto q = build_two_step(w.mu, w.theta, w.nu);
    const Rat target = frac(7, 3);
    Rat last_gap(1);
    for (int n : {4, 16, 64, 256}) {
        const Rat p = price(q, n, Rat(1), w.f, AveragingProcess<Rat>::asian(Rat(1)));
        const Rat gap = abs_value(target - p);
        CHECK(gap < last_gap);
        last_gap = gap;
    }
    CHECK(last_gap == Rat(2) / Rat(256));  // exact 2/n decay for this payoff
}

TEST_CASE("initial/terminal split prices by the martingale identity") {
    Worked w;
    auto square = [](const Rat& x) { return x * x; };
    for (const MeasQ& theta : {w.mu, w.theta, w.nu}) {
        auto q = build_two_step(w.mu, theta, w.nu);
        const Rat p =
            price(q, 8, Rat(1), square, AveragingProcess<Rat>::terminal_half(Rat(1)));
        const Rat expected =
            (Rat(3) * w.mu.integrate(square) + w.nu.integrate(square)) / Rat(4);
        CHECK(p == expected);
    }
}

TEST_CASE("lower-bound report closes the gap for strict interiority") {
    Worked w;
    std::vector<Rat> grid{Rat(-1), frac(-1, 2), Rat(0), frac(1, 2), Rat(1)};
    auto rep = lower_bound_report(w.mu, w.nu, w.f, AveragingProcess<Rat>::fixed_time(
                                                        frac(1, 2), Rat(1)),
                                  grid, 16);
    CHECK(rep.strictly_interior);
    CHECK(rep.aux_value == frac(7, 3));
    CHECK(rep.gap == Rat(0));
}

TEST_CASE("lower-bound report shows shrinking gap for the running average") {
    Worked w;
    std::vector<Rat> grid{Rat(-1), frac(-1, 2), Rat(0), frac(1, 2), Rat(1)};
    auto a = AveragingProcess<Rat>::asian(Rat(1));
    auto coarse = lower_bound_report(w.mu, w.nu, w.f, a, grid, 16);
    auto fine = lower_bound_report(w.mu, w.nu, w.f, a, grid, 256);
    CHECK(coarse.interior);
    CHECK(abs_value(fine.gap) < abs_value(coarse.gap));
    CHECK(abs_value(coarse.gap) > Rat(0));
}

TEST_CASE("non-interior split prices strictly below the intermediate value") {
    Worked w;
    std::vector<Rat> grid{Rat(-1), frac(-1, 2), Rat(0), frac(1, 2), Rat(1)};
    std::vector<Rat> fy;
    for (const Rat& g : grid) fy.push_back(g * g);
    auto fsq = PwlQ::interpolate(grid, fy);
    auto rep = lower_bound_report(w.mu, w.nu, fsq,
                                  AveragingProcess<Rat>::terminal_half(Rat(1)), grid, 16);
    CHECK_FALSE(rep.interior);
    CHECK(rep.model_price < rep.aux_value);  // necessity of interiority
    CHECK(rep.aux_value == w.nu.integrate([&](const Rat& x) { return fsq(x); }));
}

TEST_CASE("averaged law stays in convex order between the marginals") {
    testgen::Rng rng(83);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = testgen::random_irreducible_pair(rng, 8);
        auto f = testgen::random_payoff(rng, p.dom);
        auto sol = solve_primal(p.mu, p.nu, f, 1);
        auto q = build_two_step(p.mu, sol.theta, p.nu);
        for (const auto& a :
             {AveragingProcess<double>::asian(1.0), AveragingProcess<double>::fixed_time(0.5, 1.0),
              AveragingProcess<double>::terminal_half(1.0)}) {
            std::vector<std::pair<double, double>> atoms;
            for (const auto& wp : embed_paths(q, 8, 1.0))
                atoms.emplace_back(average_along(wp.path, a), wp.weight);
            auto law = DiscreteMeasure<double>::from_atoms(std::move(atoms));
            CHECK(convex_order_leq(p.mu, law, 1e-8));
            CHECK(convex_order_leq(law, p.nu, 1e-8));
        }
    }
}

namespace {

// Brute-force optimal stopping over the three decision epochs of a coupling:
// stop immediately, stop after the first move, or hold to the end.
template <class S, class F>
S best_stopped_value(const TwoStepCoupling<S>& q, F&& f) {
    std::map<std::pair<S, S>, std::pair<S, S>> stage2;  // (y1,y2) -> mass, E f(y3)
    for (const auto& a : q.atoms) {
        auto& [mass, acc] = stage2[{a.y1, a.y2}];
        mass += a.weight;
        acc += a.weight * f(a.y3);
    }
    std::map<S, std::pair<S, S>> stage1;
    for (const auto& [key, agg] : stage2) {
        const S hold = agg.second / agg.first;
        const S v2 = f(key.second) > hold ? f(key.second) : hold;
        auto& [mass, acc] = stage1[key.first];
        mass += agg.first;
        acc += agg.first * v2;
    }
    S total(0);
    for (const auto& [y1, agg] : stage1) {
        const S hold = agg.second / agg.first;
        total += agg.first * (f(y1) > hold ? f(y1) : hold);
    }
    return total;
}

}  // namespace

TEST_CASE("optimal stopping on the optimizer coupling recovers the LP value") {
    // the stopped law stays sandwiched in convex order with atoms on the
    // grid, so no stopping rule beats the optimal intermediate law, and
    // exercising right after the first move attains it
    Worked w;
    std::vector<Rat> grid{Rat(-1), frac(-1, 2), Rat(0), frac(1, 2), Rat(1)};
    auto sol = solve_primal(w.mu, w.nu, w.f, grid);
    auto q = build_two_step(w.mu, sol.theta, w.nu);
    CHECK(best_stopped_value(q, [&](const Rat& x) { return w.f(x); }) == sol.value);

    testgen::Rng rng(97);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = testgen::random_irreducible_pair(rng, 8);
        auto f = testgen::random_payoff(rng, p.dom);
        auto dsol = solve_primal(p.mu, p.nu, f, 1);
        auto dq = build_two_step(p.mu, dsol.theta, p.nu);
        const double stopped = best_stopped_value(dq, [&](double x) { return f(x); });
        CHECK(stopped == doctest::Approx(dsol.value).epsilon(1e-9));
        // and the fixed-date price agrees, making the exercise style immaterial
        const double fixed =
            price(dq, 8, 1.0, [&](double x) { return f(x); },
                  AveragingProcess<double>::fixed_time(0.5, 1.0));
        CHECK(fixed == doctest::Approx(stopped).epsilon(1e-9));
    }
}

TEST_CASE("demonstration sampler returns admissible paths") {
    Worked w;
    auto q = build_two_step(w.mu, w.theta, w.nu);
    auto sample = sample_paths(q, 4, Rat(1), 32, 2024);
    REQUIRE(sample.size() == 32);
    Domain<Rat> dom = domain_of(w.mu, w.nu);
    for (const auto& wp : sample) {
        CHECK(wp.weight == frac(1, 32));
        CHECK(path_in_domain(wp.path, dom));
    }
}
