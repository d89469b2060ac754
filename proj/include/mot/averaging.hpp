#ifndef MOT_AVERAGING_HPP
#define MOT_AVERAGING_HPP

#include <utility>
#include <vector>

#include "mot/errors.hpp"
#include "mot/path.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Exercise-right descriptor: a probability measure on [0, T] against which
 * the path is averaged. Variants cover the running average, exercise at a
 * fixed intermediate date, the initial/terminal split, and arbitrary atom
 * lists.
 */
template <class S>
class AveragingProcess {
  public:
    enum class Variant { Asian, EuropeanAt, FixedTime, TerminalHalf, CustomAtoms };

    static AveragingProcess asian(S horizon) {
        AveragingProcess a(Variant::Asian, std::move(horizon));
        return a;
    }

    static AveragingProcess european_at(S maturity, S horizon) {
        if (!(S(0) < maturity && maturity < horizon))
            throw ConfigError("intermediate maturity must lie strictly inside (0, T)");
        AveragingProcess a(Variant::EuropeanAt, std::move(horizon));
        a.atoms_.emplace_back(std::move(maturity), S(1));
        return a;
    }

    static AveragingProcess fixed_time(S t0, S horizon) {
        if (!(S(0) <= t0 && t0 <= horizon)) throw ConfigError("exercise time outside [0, T]");
        AveragingProcess a(Variant::FixedTime, std::move(horizon));
        a.atoms_.emplace_back(std::move(t0), S(1));
        return a;
    }

    // Half the mass at time zero, half at the horizon.
    static AveragingProcess terminal_half(S horizon) {
        AveragingProcess a(Variant::TerminalHalf, std::move(horizon));
        a.atoms_.emplace_back(S(0), S(1) / S(2));
        a.atoms_.emplace_back(a.horizon_, S(1) / S(2));
        return a;
    }

    static AveragingProcess custom_atoms(std::vector<std::pair<S, S>> atoms, S horizon) {
        AveragingProcess a(Variant::CustomAtoms, std::move(horizon));
        S total(0);
        S prev(-1);
        for (const auto& [t, w] : atoms) {
            if (w < 0) throw ConfigError("averaging atoms must be nonnegative");
            if (!(t >= S(0)) || t > a.horizon_) throw ConfigError("averaging atom outside [0, T]");
            if (!(t > prev)) throw ConfigError("averaging atoms must be strictly increasing");
            prev = t;
            total += w;
        }
        if (total != S(1) && abs_value(total - S(1)) > scalar_traits<S>::default_tol())
            throw ConfigError("averaging atoms must sum to one");
        a.atoms_ = std::move(atoms);
        return a;
    }

    Variant variant() const { return variant_; }
    const S& horizon() const { return horizon_; }
    bool has_lebesgue_part() const { return variant_ == Variant::Asian; }
    const std::vector<std::pair<S, S>>& atoms() const { return atoms_; }

    S mass_at_zero() const {
        for (const auto& [t, w] : atoms_)
            if (t == S(0)) return w;
        return S(0);
    }

    S mass_at_horizon() const {
        for (const auto& [t, w] : atoms_)
            if (t == horizon_) return w;
        return S(0);
    }

    bool interior() const { return mass_at_zero() == S(0) && mass_at_horizon() == S(0); }

    // Interior with no mass before some positive time, uniformly over paths.
    bool strictly_interior() const {
        if (!interior()) return false;
        if (has_lebesgue_part()) return false;
        for (const auto& [t, w] : atoms_)
            if (w > 0) return t > S(0);
        return false;
    }

  private:
    AveragingProcess(Variant v, S horizon) : variant_(v), horizon_(std::move(horizon)) {
        if (!(horizon_ > 0)) throw ConfigError("horizon must be positive");
    }

    Variant variant_;
    S horizon_;
    std::vector<std::pair<S, S>> atoms_;
};

/**
 * Exact Stieltjes integral of a step path against the averaging measure:
 * atom masses hit the right-continuous path value and the running-average
 * part is plain segment-length arithmetic.
 */
template <class S>
S average_along(const SteppedPath<S>& path, const AveragingProcess<S>& a) {
    if (path.horizon() != a.horizon())
        throw ConfigError("path and averaging process disagree on the horizon");
    S acc(0);
    for (const auto& [t, w] : a.atoms()) acc += w * path.at(t);
    if (a.has_lebesgue_part()) {
        for (const auto& seg : path.segments())
            acc += seg.value * (seg.end - seg.start) / a.horizon();
    }
    return acc;
}

}  // namespace mot

#endif
