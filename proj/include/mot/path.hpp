#ifndef MOT_PATH_HPP
#define MOT_PATH_HPP

#include <utility>
#include <vector>

#include "mot/errors.hpp"
#include "mot/measure.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Piecewise-constant right-continuous path with finitely many jumps: value
 * values()[i] on [jump_times()[i], jump_times()[i+1]) and the last value on
 * the closing interval up to (and including) the horizon.
 */
template <class S>
class SteppedPath {
  public:
    SteppedPath(S horizon, std::vector<S> jump_times, std::vector<S> values)
        : horizon_(std::move(horizon)),
          times_(std::move(jump_times)),
          values_(std::move(values)) {
        if (values_.size() != times_.size() + 1)
            throw Error("path: need one more value than jump times");
        S prev(0);
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!(times_[i] > prev)) throw Error("path: jump times must be increasing in (0, T]");
            prev = times_[i];
        }
        if (!times_.empty() && times_.back() > horizon_)
            throw Error("path: jump beyond the horizon");
    }

    static SteppedPath constant(S horizon, S value) {
        return SteppedPath(std::move(horizon), {}, {std::move(value)});
    }

    const S& horizon() const { return horizon_; }
    const std::vector<S>& jump_times() const { return times_; }
    const std::vector<S>& values() const { return values_; }

    const S& initial() const { return values_.front(); }
    const S& terminal() const { return values_.back(); }

    S at(const S& t) const {
        std::size_t i = 0;
        while (i < times_.size() && t >= times_[i]) ++i;
        return values_[i];
    }

    // Segment decomposition [start, end) x value; the final segment closes at
    // the horizon.
    struct Segment {
        S start;
        S end;
        S value;
    };

    std::vector<Segment> segments() const {
        std::vector<Segment> out;
        S start(0);
        for (std::size_t i = 0; i < times_.size(); ++i) {
            out.push_back({start, times_[i], values_[i]});
            start = times_[i];
        }
        out.push_back({start, horizon_, values_.back()});
        return out;
    }

  private:
    S horizon_;
    std::vector<S> times_;
    std::vector<S> values_;
};

template <class S>
struct WeightedPath {
    SteppedPath<S> path;
    S weight;
};

/**
 * Membership in the admissible path set of an irreducible pair: start in the
 * interior, evolve inside the domain, and freeze after touching a closed
 * boundary point.
 */
template <class S>
bool path_in_domain(const SteppedPath<S>& path, const Domain<S>& dom) {
    const auto& values = path.values();
    if (!dom.in_interior(values.front())) return false;
    bool captured = false;
    S capture_value(0);
    for (const S& v : values) {
        if (captured) {
            if (v != capture_value) return false;
            continue;
        }
        if (!dom.contains(v)) return false;
        if (dom.on_boundary(v)) {
            captured = true;
            capture_value = v;
        }
    }
    return true;
}

}  // namespace mot

#endif
