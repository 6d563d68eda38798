#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

namespace retirement {

// Shape-preserving piecewise-cubic Hermite interpolation (Fritsch-Butland
// tangents). Monotone data yields a monotone interpolant; linear data is
// reproduced exactly.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    // Evaluates inside [x.front(), x.back()]; clamps outside.
    double operator()(double xq) const;

    // Derivative of the interpolant at xq (one-sided at the ends).
    double derivative(double xq) const;

    const std::vector<double>& abscissae() const { return x_; }
    const std::vector<double>& ordinates() const { return y_; }

private:
    std::size_t segment(double xq) const;

    std::vector<double> x_, y_, tangent_;
};

// Value-surface interpolant in wealth. Queries above the top node
// extrapolate linearly in log-wealth; queries below the bottom node clamp to
// the bottom value and bump a diagnostic counter.
class ValueInterpolant {
public:
    ValueInterpolant() = default;
    ValueInterpolant(std::vector<double> wealth_nodes, std::vector<double> values);

    ValueInterpolant(ValueInterpolant&& other) noexcept
        : core_(std::move(other.core_)),
          top_wealth_(other.top_wealth_),
          top_value_(other.top_value_),
          top_slope_log_(other.top_slope_log_),
          clamped_below_(other.clamped_below_.load()) {}
    ValueInterpolant& operator=(ValueInterpolant&& other) noexcept {
        core_ = std::move(other.core_);
        top_wealth_ = other.top_wealth_;
        top_value_ = other.top_value_;
        top_slope_log_ = other.top_slope_log_;
        clamped_below_.store(other.clamped_below_.load());
        return *this;
    }

    double operator()(double wealth) const;

    std::uint64_t clamped_below() const { return clamped_below_.load(); }

private:
    MonotoneCubic core_;
    double top_wealth_ = 0.0;
    double top_value_ = 0.0;
    double top_slope_log_ = 0.0;  // dV/dlog(W) at the top node
    mutable std::atomic<std::uint64_t> clamped_below_{0};
};

// Piecewise-linear lookup, used for control surfaces where shape
// preservation of the value function is not required.
double linear_interp(const std::vector<double>& x, const std::vector<double>& y, double xq);

} // namespace retirement
