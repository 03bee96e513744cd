#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dmsc {

// Central-difference gradient estimate, one evaluation pair per coordinate.
// The independent oracle every analytic gradient in the engine is checked
// against. Throws numeric_error if the loss evaluates non-finite.
std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& loss_fn,
    std::span<const double> point, double step);

}  // namespace dmsc
