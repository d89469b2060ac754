#ifndef MOT_PWL_HPP
#define MOT_PWL_HPP

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "mot/errors.hpp"
#include "mot/measure.hpp"
#include "mot/scalar.hpp"

namespace mot {

/**
 * Continuous piecewise-linear function with optional jump values at the two
 * endpoints of the working domain. Represents payoffs, static hedge legs,
 * concave moderators, and potential functions.
 *
 * The continuous part is defined by breakpoints, values at breakpoints, and
 * two tail slopes. A jump (position, delta) changes the value at exactly that
 * point; jumps are only meaningful at domain endpoints that carry an atom of
 * the dominating marginal. Tail slopes may be flagged unbounded, in which
 * case evaluation beyond the last breakpoint is disallowed and hedge
 * construction falls back to chord slopes near the boundary.
 */
template <class S>
class PiecewiseLinear {
  public:
    PiecewiseLinear(std::vector<S> xs, std::vector<S> ys, S slope_left, S slope_right)
        : xs_(std::move(xs)),
          ys_(std::move(ys)),
          slope_left_(std::move(slope_left)),
          slope_right_(std::move(slope_right)) {
        if (xs_.empty() || xs_.size() != ys_.size())
            throw Error("pwl: breakpoints/values size mismatch");
        for (std::size_t i = 1; i < xs_.size(); ++i)
            if (!(xs_[i - 1] < xs_[i]))
                throw Error("pwl: breakpoints must be strictly increasing");
    }

    static PiecewiseLinear constant(S c) { return affine(std::move(c), S(0)); }

    static PiecewiseLinear affine(S intercept, S slope) {
        std::vector<S> xs{S(0)};
        std::vector<S> ys{std::move(intercept)};
        return PiecewiseLinear(std::move(xs), std::move(ys), slope, slope);
    }

    // c0 + c1*x + sum a_i * |x - p_i|. Negative a_i bend the graph downward.
    static PiecewiseLinear from_kinks(const S& c0, const S& c1,
                                      std::vector<std::pair<S, S>> kinks) {
        std::sort(kinks.begin(), kinks.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<S, S>> merged;
        for (auto& [p, a] : kinks) {
            if (a == 0) continue;
            if (!merged.empty() && merged.back().first == p)
                merged.back().second += a;
            else
                merged.emplace_back(p, a);
        }
        if (merged.empty()) return affine(c0, c1);
        S total(0);
        for (const auto& [p, a] : merged) total += a;
        std::vector<S> xs, ys;
        xs.reserve(merged.size());
        ys.reserve(merged.size());
        for (const auto& [p, a] : merged) {
            S y = c0 + c1 * p;
            for (const auto& [q, b] : merged) y += b * abs_value(p - q);
            xs.push_back(p);
            ys.push_back(y);
        }
        return PiecewiseLinear(std::move(xs), std::move(ys), c1 - total, c1 + total);
    }

    // Interpolates through the given points; the tails continue the first and
    // last segment slopes (constant when there is a single point).
    static PiecewiseLinear interpolate(std::vector<S> xs, std::vector<S> ys) {
        if (xs.size() == 1) return PiecewiseLinear(std::move(xs), std::move(ys), S(0), S(0));
        S sl = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        std::size_t n = xs.size();
        S sr = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return PiecewiseLinear(std::move(xs), std::move(ys), std::move(sl), std::move(sr));
    }

    const std::vector<S>& breakpoints() const { return xs_; }
    const std::vector<S>& values() const { return ys_; }
    const S& slope_left() const { return slope_left_; }
    const S& slope_right() const { return slope_right_; }

    void set_jump(const S& position, const S& delta) {
        if (delta == 0) return;
        if (position <= xs_.front())
            jump_left_ = std::make_pair(position, delta);
        else if (position >= xs_.back())
            jump_right_ = std::make_pair(position, delta);
        else
            throw Error("pwl: jumps are only supported at the extremes");
    }

    const std::optional<std::pair<S, S>>& jump_left() const { return jump_left_; }
    const std::optional<std::pair<S, S>>& jump_right() const { return jump_right_; }
    bool has_jumps() const { return jump_left_ || jump_right_; }

    void mark_unbounded_left() { unbounded_left_ = true; }
    void mark_unbounded_right() { unbounded_right_ = true; }
    bool unbounded_left() const { return unbounded_left_; }
    bool unbounded_right() const { return unbounded_right_; }

    // Value of the continuous part (jumps ignored).
    S continuous_value(const S& x) const {
        if (x <= xs_.front()) return ys_.front() + slope_left_ * (x - xs_.front());
        if (x >= xs_.back()) return ys_.back() + slope_right_ * (x - xs_.back());
        std::size_t i = segment_index(x);
        const S t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + t * (ys_[i + 1] - ys_[i]);
    }

    S operator()(const S& x) const {
        S v = continuous_value(x);
        if (jump_left_ && x == jump_left_->first) v += jump_left_->second;
        if (jump_right_ && x == jump_right_->first) v += jump_right_->second;
        return v;
    }

    // One-sided derivatives of the continuous part.
    S left_derivative(const S& x) const {
        if (x <= xs_.front()) return slope_left_;
        if (x > xs_.back()) return slope_right_;
        std::size_t i = segment_index_left(x);
        return segment_slope(i);
    }

    S right_derivative(const S& x) const {
        if (x < xs_.front()) return slope_left_;
        if (x >= xs_.back()) return slope_right_;
        std::size_t i = segment_index(x);
        return segment_slope(i);
    }

    // Nonzero slope increments (second-derivative atoms of the continuous
    // part), one per interior kink.
    std::vector<std::pair<S, S>> kinks() const {
        std::vector<std::pair<S, S>> out;
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            S before = (i == 0) ? slope_left_ : segment_slope(i - 1);
            S after = (i + 1 == xs_.size()) ? slope_right_ : segment_slope(i);
            if (after != before) out.emplace_back(xs_[i], after - before);
        }
        return out;
    }

    bool is_convex(const S& tol = scalar_traits<S>::default_tol()) const {
        for (const auto& [p, inc] : kinks())
            if (inc < -tol) return false;
        if (jump_left_ && jump_left_->second < -tol) return false;
        if (jump_right_ && jump_right_->second < -tol) return false;
        return true;
    }

    bool is_concave(const S& tol = scalar_traits<S>::default_tol()) const {
        for (const auto& [p, inc] : kinks())
            if (inc > tol) return false;
        if (jump_left_ && jump_left_->second > tol) return false;
        if (jump_right_ && jump_right_->second > tol) return false;
        return true;
    }

    PiecewiseLinear operator+(const PiecewiseLinear& other) const {
        std::vector<S> xs = xs_;
        xs.insert(xs.end(), other.xs_.begin(), other.xs_.end());
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::vector<S> ys;
        ys.reserve(xs.size());
        for (const S& x : xs) ys.push_back(continuous_value(x) + other.continuous_value(x));
        PiecewiseLinear sum(std::move(xs), std::move(ys), slope_left_ + other.slope_left_,
                            slope_right_ + other.slope_right_);
        auto merge_jump = [&sum](const std::optional<std::pair<S, S>>& a,
                                 const std::optional<std::pair<S, S>>& b, bool left) {
            S delta(0);
            std::optional<S> pos;
            if (a) {
                pos = a->first;
                delta += a->second;
            }
            if (b) {
                if (pos && *pos != b->first) throw Error("pwl: mismatched jump positions");
                pos = b->first;
                delta += b->second;
            }
            (void)left;
            if (pos && delta != 0) sum.set_jump(*pos, delta);
        };
        merge_jump(jump_left_, other.jump_left_, true);
        merge_jump(jump_right_, other.jump_right_, false);
        return sum;
    }

    PiecewiseLinear operator-() const {
        PiecewiseLinear out(*this);
        for (S& y : out.ys_) y = -y;
        out.slope_left_ = -out.slope_left_;
        out.slope_right_ = -out.slope_right_;
        if (out.jump_left_) out.jump_left_->second = -out.jump_left_->second;
        if (out.jump_right_) out.jump_right_->second = -out.jump_right_->second;
        return out;
    }

    PiecewiseLinear operator-(const PiecewiseLinear& other) const { return *this + (-other); }

    PiecewiseLinear shifted(const S& c) const {
        PiecewiseLinear out(*this);
        for (S& y : out.ys_) y += c;
        return out;
    }

  private:
    std::size_t segment_index(const S& x) const {
        // largest i with xs_[i] <= x, clamped to a valid segment
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        if (i == 0) return 0;
        if (i >= xs_.size()) return xs_.size() - 2;
        return i - 1;
    }

    std::size_t segment_index_left(const S& x) const {
        // segment whose closure contains x from the left (x > xs_[i])
        auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        return i == 0 ? 0 : i - 1;
    }

    S segment_slope(std::size_t i) const {
        return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    }

    std::vector<S> xs_;
    std::vector<S> ys_;
    S slope_left_;
    S slope_right_;
    std::optional<std::pair<S, S>> jump_left_;
    std::optional<std::pair<S, S>> jump_right_;
    bool unbounded_left_ = false;
    bool unbounded_right_ = false;
};

/**
 * Static legs of a semi-static strategy: a concave function paired with a
 * convex one, both finite on the domain interior.
 */
template <class S>
struct DualPair {
    PiecewiseLinear<S> phi;  // concave
    PiecewiseLinear<S> psi;  // convex

    void validate(const S& tol = scalar_traits<S>::default_tol()) const {
        if (!phi.is_concave(tol)) throw Error("dual pair: first leg must be concave");
        if (!psi.is_convex(tol)) throw Error("dual pair: second leg must be convex");
    }
};

// Left-derivative selection from the subdifferential of a convex function.
template <class S>
S subderivative(const PiecewiseLinear<S>& psi, const S& x, const Domain<S>& dom) {
    if (!dom.in_interior(x)) throw OutsideInterior();
    return psi.left_derivative(x);
}

// Left-derivative selection from the superdifferential of a concave function.
template <class S>
S superderivative(const PiecewiseLinear<S>& phi, const S& x, const Domain<S>& dom) {
    if (!dom.in_interior(x)) throw OutsideInterior();
    return phi.left_derivative(x);
}

}  // namespace mot

#endif
