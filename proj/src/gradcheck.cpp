#include "dmsc/gradcheck.hpp"

#include <cmath>

#include "dmsc/errors.hpp"

namespace dmsc {

std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& loss_fn,
    std::span<const double> point, double step) {
    if (!(step > 0.0)) throw config_error("finite_difference_gradient: step must be positive");
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double hi = loss_fn(x);
        x[i] = saved - step;
        const double lo = loss_fn(x);
        x[i] = saved;
        if (!std::isfinite(hi) || !std::isfinite(lo)) {
            throw numeric_error("finite_difference_gradient: non-finite loss evaluation");
        }
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

}  // namespace dmsc
