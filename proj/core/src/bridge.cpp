#include "fex/bridge.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

namespace fex {

using nlohmann::json;

struct BridgePredictor::Impl {
    pid_t child = -1;
    int to_child = -1;   // write end
    int from_child = -1; // read end
    std::chrono::milliseconds timeout{10000};

    std::size_t n_features = 0;
    std::size_t n_classes = 0;

    std::string read_buf;
    std::size_t lines_read = 0; // protocol line counter for diagnostics
    std::uint64_t next_id = 1;

    ~Impl() { shutdown(); }

    void shutdown() {
        if (to_child >= 0) {
            ::close(to_child);
            to_child = -1;
        }
        if (from_child >= 0) {
            ::close(from_child);
            from_child = -1;
        }
        if (child > 0) {
            int status = 0;
            // give the child a moment to exit on EOF, then escalate; the
            // child runs in its own process group so grandchildren die too
            for (int i = 0; i < 50; ++i) {
                const pid_t r = ::waitpid(child, &status, WNOHANG);
                if (r == child || r < 0) {
                    child = -1;
                    return;
                }
                ::usleep(10 * 1000);
            }
            ::kill(-child, SIGKILL);
            ::waitpid(child, &status, 0);
            child = -1;
        }
    }

    /// Blocking line read with deadline; throws BridgeError on timeout/EOF.
    std::string read_line() {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            const auto nl = read_buf.find('\n');
            if (nl != std::string::npos) {
                std::string line = read_buf.substr(0, nl);
                read_buf.erase(0, nl + 1);
                ++lines_read;
                return line;
            }
            const auto now = std::chrono::steady_clock::now();
            if (now >= deadline) throw BridgeError("bridge timed out waiting for a line");
            const auto remain =
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
            struct pollfd pfd {};
            pfd.fd = from_child;
            pfd.events = POLLIN;
            const int pr = ::poll(&pfd, 1, static_cast<int>(remain.count()));
            if (pr < 0) {
                if (errno == EINTR) continue;
                throw BridgeError(std::string("poll failed: ") + std::strerror(errno));
            }
            if (pr == 0) throw BridgeError("bridge timed out waiting for a line");
            char chunk[4096];
            const ssize_t got = ::read(from_child, chunk, sizeof(chunk));
            if (got < 0) {
                if (errno == EINTR) continue;
                throw BridgeError(std::string("read failed: ") + std::strerror(errno));
            }
            if (got == 0) throw BridgeError("bridge closed its output stream");
            read_buf.append(chunk, static_cast<std::size_t>(got));
        }
    }

    void write_line(const std::string& line) {
        std::string payload = line;
        payload.push_back('\n');
        std::size_t off = 0;
        while (off < payload.size()) {
            const ssize_t put = ::write(to_child, payload.data() + off, payload.size() - off);
            if (put < 0) {
                if (errno == EINTR) continue;
                throw BridgeError(std::string("write to bridge failed: ") +
                                  std::strerror(errno));
            }
            off += static_cast<std::size_t>(put);
        }
    }
};

namespace {

json parse_wire_line(const std::string& line, std::size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ProtocolError("malformed bridge line", line_no);
    }
    return j;
}

} // namespace

BridgePredictor::BridgePredictor(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
BridgePredictor::~BridgePredictor() = default;

std::size_t BridgePredictor::n_features() const { return impl_->n_features; }
std::size_t BridgePredictor::n_classes() const { return impl_->n_classes; }

ProbVector BridgePredictor::predict_proba(const Sample& x) const {
    if (x.size() != impl_->n_features) {
        throw DimensionError("bridge expects " + std::to_string(impl_->n_features) +
                             " features, got " + std::to_string(x.size()));
    }
    const std::uint64_t id = impl_->next_id++;
    json req;
    req["id"] = id;
    req["input"] = x.features;
    impl_->write_line(req.dump());

    const std::string line = impl_->read_line();
    const std::size_t line_no = impl_->lines_read;
    const json resp = parse_wire_line(line, line_no);
    if (!resp.contains("id") || !resp.contains("probs") || !resp["probs"].is_array()) {
        throw ProtocolError("response missing id/probs", line_no);
    }
    if (resp["id"].get<std::uint64_t>() != id) {
        throw ProtocolError("response id mismatch", line_no);
    }
    std::vector<double> probs;
    probs.reserve(impl_->n_classes);
    for (const auto& v : resp["probs"]) {
        if (!v.is_number()) throw ProtocolError("non-numeric probability", line_no);
        probs.push_back(v.get<double>());
    }
    if (probs.size() != impl_->n_classes) {
        throw ProtocolError("probs length != n_classes", line_no);
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ProtocolError("probability out of range", line_no);
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw ProtocolError("probs sum to " + std::to_string(sum), line_no);
    }
    // renormalize only when the wire tolerance was actually used, so exact
    // vectors round-trip bit-identically
    if (std::abs(sum - 1.0) > 1e-12) {
        for (double& p : probs) p /= sum;
    }
    return ProbVector(std::move(probs));
}

std::unique_ptr<BridgePredictor> open_blackbox_bridge(const std::string& command,
                                                      std::chrono::milliseconds timeout) {
    // a dead child must surface as EPIPE, not kill the process
    static const bool sigpipe_ignored = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;

    int in_pipe[2];  // parent -> child
    int out_pipe[2]; // child -> parent
    if (::pipe(in_pipe) != 0) throw BridgeError("pipe() failed");
    if (::pipe(out_pipe) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw BridgeError("pipe() failed");
    }

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
        throw BridgeError("fork() failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    // both sides race to set the group; either one winning is fine
    ::setpgid(pid, pid);

    ::close(in_pipe[0]);
    ::close(out_pipe[1]);

    auto impl = std::make_unique<BridgePredictor::Impl>();
    impl->child = pid;
    impl->to_child = in_pipe[1];
    impl->from_child = out_pipe[0];
    impl->timeout = timeout;

    std::string handshake;
    try {
        handshake = impl->read_line();
    } catch (const BridgeError& e) {
        throw BridgeError(std::string("no handshake from '") + command + "': " + e.what());
    }
    const json hs = parse_wire_line(handshake, impl->lines_read);
    if (hs.value("fex_bridge", 0) != 1 || !hs.contains("n_features") ||
        !hs.contains("n_classes")) {
        throw ProtocolError("bad handshake line", impl->lines_read);
    }
    impl->n_features = hs["n_features"].get<std::size_t>();
    impl->n_classes = hs["n_classes"].get<std::size_t>();
    if (impl->n_features == 0 || impl->n_classes == 0) {
        throw ProtocolError("handshake declares zero features or classes", impl->lines_read);
    }
    return std::unique_ptr<BridgePredictor>(new BridgePredictor(std::move(impl)));
}

void serve_bridge(const Predictor& p, std::istream& in, std::ostream& out) {
    json hs;
    hs["fex_bridge"] = 1;
    hs["n_features"] = p.n_features();
    hs["n_classes"] = p.n_classes();
    out << hs.dump() << "\n" << std::flush;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json req = json::parse(line, nullptr, false);
        if (req.is_discarded() || !req.contains("id") || !req.contains("input")) {
            // serving side cannot recover a broken stream; stop
            return;
        }
        Sample x(req["input"].get<std::vector<double>>());
        const ProbVector probs = p.predict_proba(x);
        json resp;
        resp["id"] = req["id"].get<std::uint64_t>();
        resp["probs"] = probs.probs;
        out << resp.dump() << "\n" << std::flush;
    }
}

} // namespace fex
