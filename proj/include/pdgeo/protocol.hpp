#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdgeo/density.hpp"

namespace pdgeo {

// A line-oriented byte stream to a score server.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void write_line(const std::string& line) = 0;
    // Next line without its terminator; throws ProviderError(Transport) on EOF or timeout.
    virtual std::string read_line() = 0;
};

// Buffered reader/writer over a pair of file descriptors with an optional read timeout.
class FdTransport : public Transport {
public:
    void write_line(const std::string& line) override;
    std::string read_line() override;

protected:
    FdTransport(int read_fd, int write_fd, double timeout_seconds);
    void close_fds();

    int read_fd_;
    int write_fd_;
    double timeout_seconds_;
    bool socket_ = false;

private:
    std::string buffer_;
};

// Spawns `argv` and talks to it over its standard input and output.
class ChildProcessTransport final : public FdTransport {
public:
    explicit ChildProcessTransport(const std::vector<std::string>& argv, double timeout_seconds = 0.0);
    ~ChildProcessTransport() override;

    int pid() const { return pid_; }

private:
    int pid_ = -1;
};

// Connects to `host:port`.
class TcpTransport final : public FdTransport {
public:
    TcpTransport(const std::string& host, int port, double timeout_seconds = 0.0);
    ~TcpTransport() override;
};

// "host:port" -> (host, port).
std::pair<std::string, int> parse_address(const std::string& address);

struct Hello {
    int dim = 0;
    std::optional<int> cond_dim;
    bool has_log_density = false;
    int version = 1;
};

Hello parse_hello(const std::string& line);
nlohmann::json encode_hello(const Hello& hello);
nlohmann::json encode_score_request(std::int64_t id, const ScoreQuery& query);
// Decodes a result line for request `id`; error messages become ProviderError(Reported).
ScoreResult decode_score_response(const std::string& line, std::int64_t id, const ScoreQuery& query,
                                  const Hello& hello);

// Score provider behind the newline-delimited JSON protocol. Requests are
// serialised per connection; ids increase from 1.
class ExternalScoreProvider final : public ScoreProvider {
public:
    explicit ExternalScoreProvider(std::unique_ptr<Transport> transport);

    int dim() const override { return hello_.dim; }
    std::optional<int> cond_dim() const override { return hello_.cond_dim; }
    bool has_log_density() const override { return hello_.has_log_density; }
    ScoreResult score(const ScoreQuery& query) const override;

    const Hello& hello() const { return hello_; }
    std::int64_t last_request_id() const;

private:
    std::unique_ptr<Transport> transport_;
    Hello hello_;
    mutable std::mutex mutex_;
    mutable std::int64_t next_id_ = 1;
};

}  // namespace pdgeo
