#include "xpatch/external_oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <condition_variable>
#include <future>
#include <map>
#include <mutex>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "xpatch/png_io.hpp"

namespace xpatch::oracle {

using json = nlohmann::json;

std::string to_string(OracleError::Kind k) {
    switch (k) {
        case OracleError::Kind::transport: return "transport";
        case OracleError::Kind::handshake: return "handshake";
        case OracleError::Kind::protocol: return "protocol";
        case OracleError::Kind::timeout: return "timeout";
        case OracleError::Kind::remote: return "remote";
    }
    return "unknown";
}

namespace protocol {

namespace {

[[noreturn]] void fail(OracleError::Kind kind, const std::string& msg) { throw OracleError(kind, msg); }

json parse_line(const std::string& line, OracleError::Kind kind) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        fail(kind, std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

std::string encode_hello(const Hello& hello) {
    json j = {{"hello",
               {{"protocol", hello.protocol},
                {"modality", to_string(hello.modality)},
                {"max_concurrency", hello.max_concurrency}}}};
    return j.dump();
}

Hello parse_hello(const std::string& line) {
    constexpr auto K = OracleError::Kind::handshake;
    json j = parse_line(line, K);
    if (!j.is_object() || !j.contains("hello") || !j["hello"].is_object()) fail(K, "missing hello object");
    const json& h = j["hello"];
    if (!h.contains("protocol") || !h["protocol"].is_number_integer()) fail(K, "hello.protocol missing");
    if (!h.contains("modality") || !h["modality"].is_string()) fail(K, "hello.modality missing");
    if (!h.contains("max_concurrency") || !h["max_concurrency"].is_number_integer())
        fail(K, "hello.max_concurrency missing");
    Hello out;
    out.protocol = h["protocol"].get<int>();
    if (out.protocol != kVersion) fail(K, "unsupported protocol version " + std::to_string(out.protocol));
    try {
        out.modality = parse_modality(h["modality"].get<std::string>());
    } catch (const std::invalid_argument& e) {
        fail(K, e.what());
    }
    out.max_concurrency = h["max_concurrency"].get<int>();
    if (out.max_concurrency < 1) fail(K, "max_concurrency must be >= 1");
    return out;
}

std::string encode_request(const std::string& id, Modality modality, const Image& image) {
    json j = {{"id", id},
              {"modality", to_string(modality)},
              {"image_png_b64", io::base64_encode(io::encode_png(image))}};
    return j.dump();
}

std::string encode_response(const Response& r) {
    json j = {{"id", r.id}};
    if (!r.error.empty()) {
        j["error"] = r.error;
    } else {
        json dets = json::array();
        for (const auto& d : r.detections)
            dets.push_back({{"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}}, {"score", d.score}});
        j["detections"] = dets;
    }
    return j.dump();
}

std::string peek_id(const std::string& line) {
    json j = parse_line(line, OracleError::Kind::protocol);
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
        fail(OracleError::Kind::protocol, "response without string id");
    return j["id"].get<std::string>();
}

Response parse_response(const std::string& line) {
    constexpr auto K = OracleError::Kind::protocol;
    json j = parse_line(line, K);
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) fail(K, "response without string id");
    Response r;
    r.id = j["id"].get<std::string>();
    if (j.contains("error")) {
        r.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
        if (r.error.empty()) r.error = "unspecified error";
        return r;
    }
    if (!j.contains("detections") || !j["detections"].is_array()) fail(K, "response without detections array");
    for (const auto& d : j["detections"]) {
        if (!d.is_object() || !d.contains("box") || !d.contains("score")) fail(K, "detection needs box and score");
        const json& b = d["box"];
        if (!b.is_array() || b.size() != 4) fail(K, "box must be [x1,y1,x2,y2]");
        double v[4];
        for (int k = 0; k < 4; ++k) {
            if (!b[k].is_number()) fail(K, "box coordinates must be numbers");
            v[k] = b[k].get<double>();
            if (!std::isfinite(v[k])) fail(K, "box coordinates must be finite");
        }
        if (v[2] < v[0] || v[3] < v[1]) fail(K, "box corners out of order");
        if (!d["score"].is_number()) fail(K, "score must be a number");
        double s = d["score"].get<double>();
        if (!(s >= 0 && s <= 1)) fail(K, "score out of range [0,1]: " + d["score"].dump());
        r.detections.push_back({{v[0], v[1], v[2], v[3]}, s});
    }
    return r;
}

}  // namespace protocol

namespace {

class StdioTransport final : public Transport {
public:
    explicit StdioTransport(const std::string& command) {
        ::signal(SIGPIPE, SIG_IGN);
        int in[2], out[2];
        if (::pipe(in) != 0 || ::pipe(out) != 0) throw OracleError(OracleError::Kind::transport, "pipe failed");
        pid_ = ::fork();
        if (pid_ < 0) throw OracleError(OracleError::Kind::transport, "fork failed");
        if (pid_ == 0) {
            ::dup2(in[0], STDIN_FILENO);
            ::dup2(out[1], STDOUT_FILENO);
            ::close(in[0]);
            ::close(in[1]);
            ::close(out[0]);
            ::close(out[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(in[0]);
        ::close(out[1]);
        to_child_ = in[1];
        from_child_ = out[0];
        ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
        ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
    }

    ~StdioTransport() override {
        if (to_child_ >= 0) ::close(to_child_);
        if (pid_ > 0) ::kill(pid_, SIGTERM);
        if (reader_.joinable()) reader_.join();
        if (from_child_ >= 0) ::close(from_child_);
        if (pid_ > 0) ::waitpid(pid_, nullptr, 0);
    }

    protocol::Hello handshake() override {
        std::string line;
        if (!read_line(line, 30000))
            throw OracleError(OracleError::Kind::handshake, "oracle process closed before handshake");
        auto hello = protocol::parse_hello(line);
        reader_ = std::thread([this] { reader_loop(); });
        return hello;
    }

    std::string round_trip(const std::string& id, const std::string& request,
                           std::chrono::milliseconds timeout) override {
        std::future<std::string> fut;
        {
            std::lock_guard lock(mu_);
            if (dead_) throw OracleError(OracleError::Kind::transport, "oracle process has exited");
            fut = pending_[id].get_future();
        }
        {
            std::lock_guard lock(write_mu_);
            std::string line = request + "\n";
            std::size_t off = 0;
            while (off < line.size()) {
                ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
                if (n <= 0) {
                    std::lock_guard l2(mu_);
                    pending_.erase(id);
                    throw OracleError(OracleError::Kind::transport, "write to oracle process failed");
                }
                off += static_cast<std::size_t>(n);
            }
        }
        if (fut.wait_for(timeout) != std::future_status::ready) {
            std::lock_guard lock(mu_);
            pending_.erase(id);
            throw OracleError(OracleError::Kind::timeout, "oracle request " + id + " timed out");
        }
        return fut.get();
    }

private:
    bool read_line(std::string& line, int timeout_ms) {
        for (;;) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return true;
            }
            pollfd pfd{from_child_, POLLIN, 0};
            int pr = ::poll(&pfd, 1, timeout_ms);
            if (pr <= 0) return false;
            char chunk[65536];
            ssize_t n = ::read(from_child_, chunk, sizeof chunk);
            if (n <= 0) return false;
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void reader_loop() {
        std::string line;
        while (read_line(line, -1)) {
            if (line.empty()) continue;
            std::string id;
            try {
                id = protocol::peek_id(line);
            } catch (const OracleError& e) {
                // Cannot tell whose answer this was, so nobody gets one.
                std::lock_guard lock(mu_);
                for (auto& [pid, p] : pending_) p.set_exception(std::make_exception_ptr(e));
                pending_.clear();
                continue;
            }
            std::lock_guard lock(mu_);
            auto it = pending_.find(id);
            if (it == pending_.end()) continue;
            it->second.set_value(line);
            pending_.erase(it);
        }
        std::lock_guard lock(mu_);
        dead_ = true;
        for (auto& [id, p] : pending_)
            p.set_exception(std::make_exception_ptr(
                OracleError(OracleError::Kind::transport, "oracle process exited with request " + id + " in flight")));
        pending_.clear();
    }

    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::thread reader_;
    std::mutex mu_;
    std::mutex write_mu_;
    bool dead_ = false;
    std::map<std::string, std::promise<std::string>> pending_;
};

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(std::string url) : url_(std::move(url)) {}

    protocol::Hello handshake() override {
        auto cli = client(std::chrono::milliseconds(30000));
        auto res = cli.Get("/hello");
        if (!res) throw OracleError(OracleError::Kind::handshake, "GET /hello failed: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw OracleError(OracleError::Kind::handshake, "GET /hello returned HTTP " + std::to_string(res->status));
        return protocol::parse_hello(res->body);
    }

    std::string round_trip(const std::string&, const std::string& request, std::chrono::milliseconds timeout) override {
        auto cli = client(timeout);
        auto res = cli.Post("/detect", request, "application/json");
        if (!res) {
            auto kind = res.error() == httplib::Error::Read ? OracleError::Kind::timeout : OracleError::Kind::transport;
            throw OracleError(kind, "POST /detect failed: " + httplib::to_string(res.error()));
        }
        if (res->status != 200 && res->body.find("\"error\"") == std::string::npos)
            throw OracleError(OracleError::Kind::protocol, "POST /detect returned HTTP " + std::to_string(res->status));
        return res->body;
    }

private:
    httplib::Client client(std::chrono::milliseconds timeout) const {
        httplib::Client cli(url_);
        cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(), 0);
        auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout).count();
        cli.set_read_timeout(us / 1000000, us % 1000000);
        cli.set_write_timeout(us / 1000000, us % 1000000);
        return cli;
    }

    std::string url_;
};

}  // namespace

std::unique_ptr<Transport> make_stdio_transport(const std::string& command) {
    return std::make_unique<StdioTransport>(command);
}

std::unique_ptr<Transport> make_http_transport(const std::string& url) { return std::make_unique<HttpTransport>(url); }

struct ExternalOracle::Gate {
    explicit Gate(int n) : sem(n) {}
    std::counting_semaphore<1 << 16> sem;
};

ExternalOracle::ExternalOracle(std::unique_ptr<Transport> transport, Modality expected,
                               std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {
    hello_ = transport_->handshake();
    if (hello_.modality != expected)
        throw OracleError(OracleError::Kind::handshake,
                          "oracle serves " + to_string(hello_.modality) + ", expected " + to_string(expected));
    gate_ = std::make_unique<Gate>(hello_.max_concurrency);
}

ExternalOracle::~ExternalOracle() = default;

std::vector<Detection> ExternalOracle::detect_impl(const Image& image) {
    std::string id = "q" + std::to_string(next_id_.fetch_add(1));
    std::string request = protocol::encode_request(id, hello_.modality, image);
    gate_->sem.acquire();
    std::string line;
    try {
        line = transport_->round_trip(id, request, timeout_);
    } catch (...) {
        gate_->sem.release();
        throw;
    }
    gate_->sem.release();
    auto resp = protocol::parse_response(line);
    if (resp.id != id) throw OracleError(OracleError::Kind::protocol, "response id mismatch");
    if (!resp.error.empty()) throw OracleError(OracleError::Kind::remote, "detector reported: " + resp.error);
    return resp.detections;
}

std::shared_ptr<ExternalOracle> external_oracle(const std::string& endpoint, Modality modality,
                                                std::chrono::milliseconds timeout) {
    std::unique_ptr<Transport> t;
    if (endpoint.rfind("stdio:", 0) == 0)
        t = make_stdio_transport(endpoint.substr(6));
    else if (endpoint.rfind("http://", 0) == 0)
        t = make_http_transport(endpoint);
    else
        throw OracleError(OracleError::Kind::handshake, "unrecognised oracle endpoint '" + endpoint + "'");
    return std::make_shared<ExternalOracle>(std::move(t), modality, timeout);
}

}  // namespace xpatch::oracle
