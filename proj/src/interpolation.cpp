#include "retirement/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retirement {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("MonotoneCubic: need at least two matching nodes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("MonotoneCubic: abscissae must be strictly increasing");

    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        d[i] = (y_[i + 1] - y_[i]) / h[i];
    }

    tangent_.resize(n);
    tangent_[0] = d[0];
    tangent_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double prod = d[i - 1] * d[i];
        if (prod > 0.0) {
            // Fritsch-Butland weighted harmonic mean keeps the interpolant
            // monotone on monotone data.
            double a = (h[i - 1] + 2.0 * h[i]) / (3.0 * (h[i - 1] + h[i]));
            tangent_[i] = prod / (a * d[i] + (1.0 - a) * d[i - 1]);
        } else {
            tangent_[i] = 0.0;  // local extremum or flat
        }
    }
}

std::size_t MonotoneCubic::segment(double xq) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t k = static_cast<std::size_t>(it - x_.begin());
    if (k == 0)
        return 0;
    if (k >= x_.size())
        return x_.size() - 2;
    return k - 1;
}

double MonotoneCubic::operator()(double xq) const {
    if (xq <= x_.front())
        return y_.front();
    if (xq >= x_.back())
        return y_.back();
    const std::size_t k = segment(xq);
    const double h = x_[k + 1] - x_[k];
    const double t = (xq - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[k] + h10 * h * tangent_[k] + h01 * y_[k + 1] + h11 * h * tangent_[k + 1];
}

double MonotoneCubic::derivative(double xq) const {
    if (xq <= x_.front())
        return tangent_.front();
    if (xq >= x_.back())
        return tangent_.back();
    const std::size_t k = segment(xq);
    const double h = x_[k + 1] - x_[k];
    const double t = (xq - x_[k]) / h;
    const double t2 = t * t;
    const double dh00 = (6.0 * t2 - 6.0 * t) / h;
    const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
    const double dh11 = 3.0 * t2 - 2.0 * t;
    return dh00 * y_[k] + dh10 * tangent_[k] + dh01 * y_[k + 1] + dh11 * tangent_[k + 1];
}

ValueInterpolant::ValueInterpolant(std::vector<double> wealth_nodes, std::vector<double> values) {
    if (!wealth_nodes.empty() && !(wealth_nodes.front() > 0.0))
        throw std::invalid_argument("ValueInterpolant: wealth nodes must be positive");
    core_ = MonotoneCubic(std::move(wealth_nodes), std::move(values));
    top_wealth_ = core_.abscissae().back();
    top_value_ = core_.ordinates().back();
    top_slope_log_ = core_.derivative(top_wealth_) * top_wealth_;
}

double ValueInterpolant::operator()(double wealth) const {
    const double lo = core_.abscissae().front();
    if (wealth < lo) {
        clamped_below_.fetch_add(1, std::memory_order_relaxed);
        return core_.ordinates().front();
    }
    if (wealth > top_wealth_)
        return top_value_ + top_slope_log_ * std::log(wealth / top_wealth_);
    return core_(wealth);
}

double linear_interp(const std::vector<double>& x, const std::vector<double>& y, double xq) {
    if (xq <= x.front())
        return y.front();
    if (xq >= x.back())
        return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
    double t = (xq - x[k]) / (x[k + 1] - x[k]);
    return y[k] + t * (y[k + 1] - y[k]);
}

} // namespace retirement
