#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast::external {

/// A third-party forecaster run as a black-box child process speaking the
/// GRIDCAST/1 line protocol on stdin/stdout. Only univariate operation is
/// supported: multi-channel contexts trigger one child invocation per channel.
struct ExternalForecasterSpec {
    std::vector<std::string> command;  // program followed by its arguments
    double timeout_seconds = 30.0;
    std::string name = "external";
};

void validate(const ExternalForecasterSpec& spec);

/// Run the child once per channel and assemble the forecasts.
///
/// `context` is row-major [L x C] in original price scale; the result is
/// row-major [H x C]. `channel_names` (optional) labels channels in error
/// messages; indices are used when it is empty.
///
/// Throws ProtocolError when the child cannot be started, exits nonzero,
/// exceeds the timeout (the child is killed), or produces malformed, short,
/// or non-finite output.
std::vector<double> forecast_external(const ExternalForecasterSpec& spec,
                                      const std::vector<double>& context,
                                      std::size_t n_channels, std::size_t horizon,
                                      const std::vector<std::string>& channel_names = {});

/// Single-channel protocol exchange: one child, L values in, H values out.
std::vector<double> forecast_external_channel(const ExternalForecasterSpec& spec,
                                              const std::vector<double>& series,
                                              std::size_t horizon,
                                              const std::string& channel_label);

/// The request text written to the child for one channel.
std::string format_request(const std::vector<double>& series, std::size_t horizon);

}  // namespace gridcast::external
