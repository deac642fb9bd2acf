#include "gridcast/external/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <sstream>

namespace gridcast::external {

namespace {

// A stub that exits before draining its stdin must surface as a nonzero-exit
// or short-output error, not as a SIGPIPE crash of the workbench.
void ignore_sigpipe() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

constexpr std::size_t kMaxResponseBytes = 8u << 20;

struct Deadline {
    std::chrono::steady_clock::time_point end;

    explicit Deadline(double seconds)
        : end(std::chrono::steady_clock::now() +
              std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(seconds))) {}

    int remaining_ms() const {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        end - std::chrono::steady_clock::now())
                        .count();
        if (left < 0) return 0;
        if (left > 3600 * 1000) return 3600 * 1000;
        return static_cast<int>(left);
    }
};

struct Child {
    pid_t pid = -1;
    int stdin_fd = -1;
    int stdout_fd = -1;

    ~Child() {
        if (stdin_fd >= 0) ::close(stdin_fd);
        if (stdout_fd >= 0) ::close(stdout_fd);
        if (pid > 0) {
            ::kill(pid, SIGKILL);
            int status = 0;
            ::waitpid(pid, &status, 0);
        }
    }

    // Reap normally; afterwards the destructor has nothing left to kill.
    int wait() {
        int status = 0;
        ::waitpid(pid, &status, 0);
        pid = -1;
        return status;
    }

    void kill_now() {
        ::kill(pid, SIGKILL);
        wait();
    }
};

Child spawn(const std::vector<std::string>& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw ProtocolError("failed to create child pipes");
    if (::pipe(from_child) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw ProtocolError("failed to create child pipes");
    }

    pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
        throw ProtocolError("failed to fork child process");
    }
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
        std::vector<char*> argv;
        argv.reserve(command.size() + 1);
        for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }

    Child child;
    child.pid = pid;
    child.stdin_fd = to_child[1];
    child.stdout_fd = from_child[0];
    ::close(to_child[0]);
    ::close(from_child[1]);
    return child;
}

[[noreturn]] void throw_timeout(Child& child, const ExternalForecasterSpec& spec,
                                const std::string& channel_label) {
    child.kill_now();
    std::ostringstream msg;
    msg << "external forecaster '" << spec.name << "' timed out after " << spec.timeout_seconds
        << " s (channel " << channel_label << "); child terminated";
    throw ProtocolError(msg.str());
}

void write_request(Child& child, const std::string& request, const Deadline& deadline,
                   const ExternalForecasterSpec& spec, const std::string& channel_label) {
    std::size_t sent = 0;
    while (sent < request.size()) {
        pollfd pfd{child.stdin_fd, POLLOUT, 0};
        int ready = ::poll(&pfd, 1, deadline.remaining_ms());
        if (ready == 0) throw_timeout(child, spec, channel_label);
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("poll failed while writing to external forecaster");
        }
        ssize_t n = ::write(child.stdin_fd, request.data() + sent, request.size() - sent);
        if (n < 0) {
            if (errno == EINTR) continue;
            // Child closed stdin early (or died); its exit status / output
            // will tell the real story.
            if (errno == EPIPE) break;
            throw ProtocolError("write to external forecaster failed");
        }
        sent += static_cast<std::size_t>(n);
    }
    ::close(child.stdin_fd);
    child.stdin_fd = -1;
}

std::string read_response(Child& child, const Deadline& deadline,
                          const ExternalForecasterSpec& spec, const std::string& channel_label) {
    std::string output;
    char buf[4096];
    for (;;) {
        pollfd pfd{child.stdout_fd, POLLIN, 0};
        int ready = ::poll(&pfd, 1, deadline.remaining_ms());
        if (ready == 0) throw_timeout(child, spec, channel_label);
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("poll failed while reading from external forecaster");
        }
        ssize_t n = ::read(child.stdout_fd, buf, sizeof buf);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("read from external forecaster failed");
        }
        if (n == 0) break;  // EOF: child closed stdout
        output.append(buf, static_cast<std::size_t>(n));
        if (output.size() > kMaxResponseBytes) {
            child.kill_now();
            throw ProtocolError("external forecaster '" + spec.name +
                                "' produced an oversized response (channel " + channel_label +
                                ")");
        }
    }
    return output;
}

std::vector<double> parse_response(const std::string& output, std::size_t horizon,
                                   const ExternalForecasterSpec& spec,
                                   const std::string& channel_label) {
    std::vector<double> values;
    values.reserve(horizon);
    std::istringstream stream(output);
    std::string line;
    bool saw_end = false;
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "END") {
            saw_end = true;
            break;
        }
        if (values.size() == horizon) {
            throw ProtocolError("external forecaster '" + spec.name + "' returned more than " +
                                std::to_string(horizon) + " values (channel " + channel_label +
                                ")");
        }
        double v;
        try {
            v = parse_double(line);
        } catch (const Error&) {
            throw ProtocolError("external forecaster '" + spec.name +
                                "' produced a malformed value line '" + line + "' (channel " +
                                channel_label + ")");
        }
        if (!std::isfinite(v)) {
            throw ProtocolError("external forecaster '" + spec.name +
                                "' produced a non-finite forecast value (channel " +
                                channel_label + ")");
        }
        values.push_back(v);
    }
    if (values.size() < horizon) {
        throw ProtocolError("external forecaster '" + spec.name + "' returned short output: " +
                            std::to_string(values.size()) + " of " + std::to_string(horizon) +
                            " forecast values (channel " + channel_label + ")");
    }
    if (!saw_end) {
        throw ProtocolError("external forecaster '" + spec.name +
                            "' response is missing the END terminator (channel " + channel_label +
                            ")");
    }
    return values;
}

}  // namespace

void validate(const ExternalForecasterSpec& spec) {
    if (spec.command.empty())
        throw ConfigError("external forecaster command must not be empty");
    if (!(spec.timeout_seconds > 0.0))
        throw ConfigError("external forecaster timeout must be positive");
}

std::string format_request(const std::vector<double>& series, std::size_t horizon) {
    std::string request = "GRIDCAST/1 FORECAST\n";
    request += "context_len=" + std::to_string(series.size()) +
               " horizon=" + std::to_string(horizon) + "\n";
    for (double v : series) {
        request += format_double(v);
        request += '\n';
    }
    request += "END\n";
    return request;
}

std::vector<double> forecast_external_channel(const ExternalForecasterSpec& spec,
                                              const std::vector<double>& series,
                                              std::size_t horizon,
                                              const std::string& channel_label) {
    ignore_sigpipe();
    for (double v : series) {
        if (!std::isfinite(v))
            throw DataError("external forecaster context contains a non-finite value (channel " +
                            channel_label + ")");
    }

    Deadline deadline(spec.timeout_seconds);
    Child child = spawn(spec.command);
    const std::string request = format_request(series, horizon);
    write_request(child, request, deadline, spec, channel_label);
    std::string output = read_response(child, deadline, spec, channel_label);

    int status = child.wait();
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        std::ostringstream msg;
        msg << "external forecaster '" << spec.name << "' ";
        if (WIFEXITED(status) && WEXITSTATUS(status) == 127)
            msg << "could not be executed (is '" << spec.command.front() << "' on PATH?)";
        else if (WIFEXITED(status))
            msg << "exited with status " << WEXITSTATUS(status);
        else if (WIFSIGNALED(status))
            msg << "was killed by signal " << WTERMSIG(status);
        else
            msg << "terminated abnormally";
        msg << " (channel " << channel_label << ")";
        throw ProtocolError(msg.str());
    }

    return parse_response(output, horizon, spec, channel_label);
}

std::vector<double> forecast_external(const ExternalForecasterSpec& spec,
                                      const std::vector<double>& context,
                                      std::size_t n_channels, std::size_t horizon,
                                      const std::vector<std::string>& channel_names) {
    validate(spec);
    if (n_channels == 0) throw ConfigError("external forecaster needs at least one channel");
    if (horizon == 0) throw ConfigError("external forecaster horizon must be positive");
    if (context.size() % n_channels != 0)
        throw DataError("context length is not a multiple of the channel count");
    const std::size_t L = context.size() / n_channels;
    if (L == 0) throw DataError("external forecaster context is empty");

    std::vector<double> result(horizon * n_channels);
    std::vector<double> series(L);
    for (std::size_t c = 0; c < n_channels; ++c) {
        for (std::size_t t = 0; t < L; ++t) series[t] = context[t * n_channels + c];
        const std::string label =
            c < channel_names.size() ? channel_names[c] : std::to_string(c);
        auto forecast = forecast_external_channel(spec, series, horizon, label);
        for (std::size_t h = 0; h < horizon; ++h) result[h * n_channels + c] = forecast[h];
    }
    return result;
}

}  // namespace gridcast::external
