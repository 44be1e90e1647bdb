#include "pdgeo/protocol.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

namespace pdgeo {

using nlohmann::json;

namespace {

[[noreturn]] void transport_error(const std::string& what) {
    throw ProviderError(ProviderError::Kind::Transport, what);
}

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

FdTransport::FdTransport(int read_fd, int write_fd, double timeout_seconds)
    : read_fd_(read_fd), write_fd_(write_fd), timeout_seconds_(timeout_seconds) {}

void FdTransport::close_fds() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    read_fd_ = write_fd_ = -1;
}

void FdTransport::write_line(const std::string& line) {
    std::string data = line;
    data.push_back('\n');
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = socket_ ? ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL)
                                  : ::write(write_fd_, data.data() + sent, data.size() - sent);
        if (n < 0) {
            if (errno == EINTR) continue;
            transport_error(errno_text("write to score server failed"));
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::string FdTransport::read_line() {
    for (;;) {
        const auto pos = buffer_.find('\n');
        if (pos != std::string::npos) {
            std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (timeout_seconds_ > 0.0) {
            pollfd p{read_fd_, POLLIN, 0};
            const int rc = ::poll(&p, 1, static_cast<int>(std::ceil(timeout_seconds_ * 1000.0)));
            if (rc == 0) transport_error("score server did not answer within the timeout");
            if (rc < 0) {
                if (errno == EINTR) continue;
                transport_error(errno_text("poll failed"));
            }
        }
        char chunk[65536];
        const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            transport_error(errno_text("read from score server failed"));
        }
        if (n == 0) transport_error("score server closed the connection");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

ChildProcessTransport::ChildProcessTransport(const std::vector<std::string>& argv, double timeout_seconds)
    : FdTransport(-1, -1, timeout_seconds) {
    if (argv.empty()) throw ConfigError("external provider command is empty");
    ignore_sigpipe();
    int to_child[2], from_child[2], exec_status[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) transport_error(errno_text("pipe"));
    if (::pipe2(from_child, O_CLOEXEC) != 0) transport_error(errno_text("pipe"));
    if (::pipe2(exec_status, O_CLOEXEC) != 0) transport_error(errno_text("pipe"));

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) transport_error(errno_text("fork"));
    if (pid_ == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::execvp(args[0], args.data());
        const int err = errno;
        [[maybe_unused]] ssize_t ignored = ::write(exec_status[1], &err, sizeof(err));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::close(exec_status[1]);
    read_fd_ = from_child[0];
    write_fd_ = to_child[1];

    int err = 0;
    const ssize_t n = ::read(exec_status[0], &err, sizeof(err));
    ::close(exec_status[0]);
    if (n == static_cast<ssize_t>(sizeof(err))) {
        ::waitpid(pid_, nullptr, 0);
        pid_ = -1;
        close_fds();
        errno = err;
        transport_error(errno_text("cannot start '" + argv.front() + "'"));
    }
}

ChildProcessTransport::~ChildProcessTransport() {
    close_fds();
    if (pid_ <= 0) return;
    // Closing stdin asks the server to exit; give it a moment before killing it.
    for (int i = 0; i < 200; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
}

TcpTransport::TcpTransport(const std::string& host, int port, double timeout_seconds)
    : FdTransport(-1, -1, timeout_seconds) {
    socket_ = true;
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const std::string service = std::to_string(port);
    const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found);
    if (rc != 0) transport_error("cannot resolve " + host + ": " + ::gai_strerror(rc));
    int fd = -1;
    int last_errno = 0;
    for (addrinfo* ai = found; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        last_errno = errno;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) {
        errno = last_errno;
        transport_error(errno_text("cannot connect to " + host + ":" + service));
    }
    read_fd_ = write_fd_ = fd;
}

TcpTransport::~TcpTransport() { close_fds(); }

std::pair<std::string, int> parse_address(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == address.size())
        throw ConfigError("address must look like host:port, got '" + address + "'");
    std::string host = address.substr(0, colon);
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(address.substr(colon + 1), &used);
        if (used != address.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ConfigError("invalid port in '" + address + "'");
    }
    if (port < 1 || port > 65535) throw ConfigError("port out of range in '" + address + "'");
    return {host, port};
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void malformed(const std::string& what, std::optional<std::int64_t> id = {}) {
    throw ProviderError(ProviderError::Kind::Malformed, what, id);
}

json parse_line(const std::string& line, std::optional<std::int64_t> id) {
    try {
        json j = json::parse(line);
        if (!j.is_object()) malformed("message is not a JSON object", id);
        if (!j.contains("type") || !j["type"].is_string()) malformed("message has no string 'type'", id);
        return j;
    } catch (const json::parse_error& e) {
        malformed(std::string("unparseable line: ") + e.what(), id);
    }
}

[[noreturn]] void reported(const json& j, std::optional<std::int64_t> id) {
    std::string message = "no message";
    if (j.contains("message") && j["message"].is_string()) message = j["message"].get<std::string>();
    if (j.contains("id") && j["id"].is_number_integer()) id = j["id"].get<std::int64_t>();
    throw ProviderError(ProviderError::Kind::Reported, message, id);
}

json matrix_rows(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.rows(); ++k) row.push_back(m(k, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

double number(const json& j, std::int64_t id) {
    if (!j.is_number()) malformed("non-numeric entry in response", id);
    return j.get<double>();
}

}  // namespace

Hello parse_hello(const std::string& line) {
    const json j = parse_line(line, std::nullopt);
    if (j["type"] == "error") reported(j, std::nullopt);
    if (j["type"] != "hello") malformed("expected a hello message, got '" + j["type"].get<std::string>() + "'");
    Hello h;
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != 1)
        malformed("unsupported protocol version");
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<int>() < 1)
        malformed("hello needs a positive integer 'dim'");
    h.dim = j["dim"].get<int>();
    if (j.contains("cond_dim") && !j["cond_dim"].is_null()) {
        if (!j["cond_dim"].is_number_integer() || j["cond_dim"].get<int>() < 1)
            malformed("hello 'cond_dim' must be a positive integer or null");
        h.cond_dim = j["cond_dim"].get<int>();
    }
    if (!j.contains("has_log_density") || !j["has_log_density"].is_boolean())
        malformed("hello needs boolean 'has_log_density'");
    h.has_log_density = j["has_log_density"].get<bool>();
    return h;
}

json encode_hello(const Hello& hello) {
    return {{"type", "hello"},
            {"dim", hello.dim},
            {"cond_dim", hello.cond_dim ? json(*hello.cond_dim) : json(nullptr)},
            {"has_log_density", hello.has_log_density},
            {"version", 1}};
}

json encode_score_request(std::int64_t id, const ScoreQuery& query) {
    json j;
    j["type"] = "score";
    j["id"] = id;
    j["points"] = matrix_rows(query.points);
    j["cond"] = query.cond ? matrix_rows(*query.cond) : json(nullptr);
    if (query.t) {
        json t = json::array();
        for (Eigen::Index i = 0; i < query.t->size(); ++i) t.push_back((*query.t)[i]);
        j["t"] = std::move(t);
    } else {
        j["t"] = nullptr;
    }
    return j;
}

ScoreResult decode_score_response(const std::string& line, std::int64_t id, const ScoreQuery& query,
                                  const Hello& hello) {
    const json j = parse_line(line, id);
    const std::string type = j["type"].get<std::string>();
    if (type == "error") reported(j, id);
    if (type != "result") malformed("unexpected message type '" + type + "'", id);
    if (!j.contains("id") || !j["id"].is_number_integer()) malformed("result without integer id", id);
    if (j["id"].get<std::int64_t>() != id)
        malformed("result id " + std::to_string(j["id"].get<std::int64_t>()) + " does not match the request", id);

    if (!j.contains("scores") || !j["scores"].is_array()) malformed("result without 'scores' array", id);
    const json& scores = j["scores"];
    const auto count = static_cast<std::size_t>(query.size());
    if (scores.size() != count)
        throw ProviderError(ProviderError::Kind::DimensionMismatch,
                            "expected " + std::to_string(count) + " scores, got " + std::to_string(scores.size()),
                            id);
    ScoreResult out{MatrixXd(hello.dim, query.size()), std::nullopt};
    for (std::size_t c = 0; c < count; ++c) {
        const json& row = scores[c];
        if (!row.is_array()) malformed("score entry is not an array", id);
        if (row.size() != static_cast<std::size_t>(hello.dim))
            throw ProviderError(ProviderError::Kind::DimensionMismatch,
                                "score " + std::to_string(c) + " has dimension " + std::to_string(row.size()) +
                                    ", expected " + std::to_string(hello.dim),
                                id);
        for (std::size_t k = 0; k < row.size(); ++k)
            out.scores(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = number(row[k], id);
    }

    const bool has_ld = j.contains("log_density") && !j["log_density"].is_null();
    if (hello.has_log_density) {
        if (!has_ld || !j["log_density"].is_array()) malformed("result lacks the declared 'log_density'", id);
        const json& ld = j["log_density"];
        if (ld.size() != count)
            throw ProviderError(ProviderError::Kind::DimensionMismatch, "log_density has the wrong length", id);
        VectorXd values(query.size());
        for (std::size_t c = 0; c < count; ++c) values[static_cast<Eigen::Index>(c)] = number(ld[c], id);
        out.log_density = std::move(values);
    } else if (has_ld) {
        malformed("log_density sent by a provider that did not declare it", id);
    }
    return out;
}

// ---------------------------------------------------------------------------

ExternalScoreProvider::ExternalScoreProvider(std::unique_ptr<Transport> transport)
    : transport_(std::move(transport)) {
    if (!transport_) throw ConfigError("external provider needs a transport");
    hello_ = parse_hello(transport_->read_line());
}

std::int64_t ExternalScoreProvider::last_request_id() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return next_id_ - 1;
}

ScoreResult ExternalScoreProvider::score(const ScoreQuery& query) const {
    query.validate();
    std::lock_guard<std::mutex> lock(mutex_);
    const std::int64_t id = next_id_++;
    if (query.dim() != hello_.dim)
        throw ProviderError(ProviderError::Kind::DimensionMismatch,
                            "query dimension " + std::to_string(query.dim()) + " but server declared " +
                                std::to_string(hello_.dim),
                            id);
    if (hello_.cond_dim) {
        if (!query.cond || query.cond->rows() != *hello_.cond_dim)
            throw ProviderError(ProviderError::Kind::DimensionMismatch,
                                "conditions must have dimension " + std::to_string(*hello_.cond_dim), id);
    }
    if (!query.points.allFinite()) throw NumericalError("non-finite query point");

    const std::string request = encode_score_request(id, query).dump();
    std::string line;
    try {
        transport_->write_line(request);
        line = transport_->read_line();
    } catch (const ProviderError& e) {
        throw ProviderError(e.kind(), e.detail(), id);
    }
    return decode_score_response(line, id, query, hello_);
}

}  // namespace pdgeo
