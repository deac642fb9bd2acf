#include "gridcast/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace gridcast {

namespace {

void validate(const SynthSpec& spec) {
    if (spec.n_hours == 0) throw ConfigError("synth spec needs n_hours >= 1");
    for (const auto& s : spec.seasonals) {
        if (s.period < 2.0) throw ConfigError("seasonal period must be >= 2 hours");
    }
    for (const auto& t : spec.trend_segments) {
        if (t.length == 0) throw ConfigError("trend segment length must be positive");
    }
    if (spec.noise_std < 0.0) throw ConfigError("noise_std must be >= 0");
    if (spec.jumps.rate < 0.0) throw ConfigError("jump rate must be >= 0");
    if (spec.jumps.rate > 0.0 && spec.jumps.half_life <= 0.0) {
        throw ConfigError("jump half-life must be positive");
    }
    if (spec.jumps.magnitude_std < 0.0) throw ConfigError("jump magnitude_std must be >= 0");
}

}  // namespace

std::vector<double> generate_series(const SynthSpec& spec) {
    validate(spec);
    const std::size_t n = spec.n_hours;
    std::vector<double> out(n, spec.base_level);

    // Cumulative piecewise trend: prefix sum of per-hour slopes, segments
    // cycled when they cover fewer than n hours. value(0) has no trend yet.
    if (!spec.trend_segments.empty()) {
        double level = 0.0;
        std::size_t segment = 0;
        std::size_t used_in_segment = 0;
        for (std::size_t t = 1; t < n; ++t) {
            level += spec.trend_segments[segment].slope;
            out[t] += level;
            if (++used_in_segment == spec.trend_segments[segment].length) {
                segment = (segment + 1) % spec.trend_segments.size();
                used_in_segment = 0;
            }
        }
    }

    for (const auto& s : spec.seasonals) {
        const double w = 2.0 * std::numbers::pi / s.period;
        for (std::size_t t = 0; t < n; ++t) {
            out[t] += s.amplitude * std::sin(w * static_cast<double>(t) + s.phase);
        }
    }

    std::mt19937_64 rng(spec.seed);
    if (spec.jumps.rate > 0.0) {
        std::poisson_distribution<int> arrivals(spec.jumps.rate);
        std::normal_distribution<double> magnitude(spec.jumps.magnitude_mean,
                                                   spec.jumps.magnitude_std);
        const double decay = std::exp2(-1.0 / spec.jumps.half_life);
        double level = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            level *= decay;
            const int count = arrivals(rng);
            for (int i = 0; i < count; ++i) level += magnitude(rng);
            out[t] += level;
        }
    }
    if (spec.noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_std);
        for (std::size_t t = 0; t < n; ++t) out[t] += noise(rng);
    }
    return out;
}

PricePanel generate_panel(const std::vector<SynthSpec>& specs, std::int64_t start_timestamp) {
    if (specs.empty()) throw ConfigError("generate_panel needs at least one channel spec");
    const std::size_t n_hours = specs.front().n_hours;
    std::vector<PriceRecord> records;
    records.reserve(n_hours * specs.size());
    for (const auto& spec : specs) {
        if (spec.n_hours != n_hours) {
            throw ConfigError("all synth channels must share the same n_hours");
        }
        auto series = generate_series(spec);
        for (std::size_t t = 0; t < n_hours; ++t) {
            records.push_back(PriceRecord{
                start_timestamp + static_cast<std::int64_t>(t) * kSecondsPerHour, spec.name,
                series[t]});
        }
    }
    return build_panel(records, "synth");
}

}  // namespace gridcast
