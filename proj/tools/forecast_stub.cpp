// Reference child process for the external-forecaster protocol.
//
// Reads one GRIDCAST/1 FORECAST request from stdin and answers on stdout
// according to its mode argument:
//   naive     last context value repeated horizon times (default)
//   mirror    echoes the context back; requires horizon == context_len
//   short     emits horizon-1 values, then END
//   garbage   emits non-numeric lines
//   nonfinite emits "nan" as its first value
//   sleep     parses the request, then sleeps 30 s without answering
//   exitfail  parses the request, then exits with status 3
//   hash      deterministic values derived from the exact input bytes,
//             for channel-isolation checks
//
// Exit codes: 0 success, 2 malformed request, 3 scripted failure.

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

[[noreturn]] void bad_request(const std::string& why) {
    std::cerr << "forecast_stub: bad request: " << why << "\n";
    std::exit(2);
}

struct Request {
    std::size_t context_len = 0;
    std::size_t horizon = 0;
    std::vector<double> context;
    std::vector<std::string> raw_lines;  // value lines exactly as received
};

Request read_request() {
    Request req;
    std::string line;
    if (!std::getline(std::cin, line)) bad_request("empty input");
    if (line != "GRIDCAST/1 FORECAST") bad_request("unknown preamble '" + line + "'");

    if (!std::getline(std::cin, line)) bad_request("missing header line");
    unsigned long long len = 0, hor = 0;
    if (std::sscanf(line.c_str(), "context_len=%llu horizon=%llu", &len, &hor) != 2)
        bad_request("unparseable header '" + line + "'");
    if (len == 0 || hor == 0) bad_request("zero-length context or horizon");
    req.context_len = len;
    req.horizon = hor;

    req.context.reserve(req.context_len);
    for (std::size_t i = 0; i < req.context_len; ++i) {
        if (!std::getline(std::cin, line)) bad_request("context truncated");
        char* end = nullptr;
        double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || *end != '\0') bad_request("bad value line '" + line + "'");
        req.context.push_back(v);
        req.raw_lines.push_back(line);
    }
    if (!std::getline(std::cin, line) || line != "END") bad_request("missing END");
    return req;
}

void emit(double v) { std::printf("%.17g\n", v); }

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "naive";
    Request req = read_request();

    if (mode == "naive") {
        for (std::size_t h = 0; h < req.horizon; ++h) emit(req.context.back());
    } else if (mode == "mirror") {
        if (req.horizon != req.context_len) bad_request("mirror requires horizon == context_len");
        for (double v : req.context) emit(v);
    } else if (mode == "short") {
        for (std::size_t h = 0; h + 1 < req.horizon; ++h) emit(req.context.back());
    } else if (mode == "garbage") {
        std::printf("pricey\nvery pricey\n");
    } else if (mode == "nonfinite") {
        std::printf("nan\n");
        for (std::size_t h = 1; h < req.horizon; ++h) emit(req.context.back());
    } else if (mode == "sleep") {
        std::this_thread::sleep_for(std::chrono::seconds(30));
        return 0;
    } else if (mode == "exitfail") {
        return 3;
    } else if (mode == "hash") {
        std::string all;
        for (const auto& raw : req.raw_lines) {
            all += raw;
            all += '\n';
        }
        std::uint64_t h = fnv1a(all);
        for (std::size_t i = 0; i < req.horizon; ++i) {
            h = h * 6364136223846793005ull + 1442695040888963407ull;
            emit(double(h >> 11) * 0x1.0p-53);
        }
    } else {
        std::cerr << "forecast_stub: unknown mode '" << mode << "'\n";
        return 2;
    }

    std::printf("END\n");
    if (std::fflush(stdout) != 0) return 2;
    return 0;
}
