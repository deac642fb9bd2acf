#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridcast/panel.hpp"

namespace gridcast {

/// Piecewise-linear trend segment: `length` hours at `slope` EUR/MWh per hour.
struct TrendSegment {
    std::size_t length = 0;
    double slope = 0.0;
};

/// One sinusoidal component: amplitude * sin(2*pi*t/period + phase).
struct Seasonal {
    double period = 24.0;  // hours
    double amplitude = 0.0;
    double phase = 0.0;  // radians
};

/// Price-spike process: Poisson arrivals whose magnitudes decay exponentially.
struct JumpProcess {
    double rate = 0.0;  // expected arrivals per hour
    double magnitude_mean = 0.0;
    double magnitude_std = 0.0;
    double half_life = 12.0;  // hours until a spike halves
};

struct SynthSpec {
    std::string name = "S0";  // channel identifier in generated panels
    std::size_t n_hours = 0;
    double base_level = 0.0;
    std::vector<TrendSegment> trend_segments;  // cycled when shorter than n_hours
    std::vector<Seasonal> seasonals;
    JumpProcess jumps;
    double noise_std = 0.0;
    std::uint64_t seed = 0;
};

/// value(t) = base + cumulative trend + sum of seasonals + decayed jumps + noise.
/// Deterministic for a fixed seed; RNG untouched when jumps and noise are off.
std::vector<double> generate_series(const SynthSpec& spec);

/// Assemble independent synthetic channels into a panel starting at
/// `start_timestamp` (hour-aligned epoch seconds). All specs must agree on
/// n_hours; channel names must be distinct.
PricePanel generate_panel(const std::vector<SynthSpec>& specs, std::int64_t start_timestamp);

}  // namespace gridcast
