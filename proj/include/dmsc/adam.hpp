#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dmsc {

// First/second-moment state for one parameter tensor.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    std::vector<double> first_moment;   // sized on first step
    std::vector<double> second_moment;

    explicit AdamState(double lr = 1e-3) : learning_rate(lr) {}
};

// One bias-corrected adaptive update, in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace dmsc
