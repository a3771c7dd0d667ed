#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "xpatch/oracle.hpp"

namespace xpatch::oracle {

/// Failure talking to an out-of-process detector.
class OracleError : public std::runtime_error {
public:
    enum class Kind { transport, handshake, protocol, timeout, remote };

    OracleError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }
    /// Transport failures may be retried; the query was not counted.
    bool retryable() const { return kind_ == Kind::transport || kind_ == Kind::timeout; }

private:
    Kind kind_;
};

std::string to_string(OracleError::Kind k);

namespace protocol {

inline constexpr int kVersion = 1;

struct Hello {
    int protocol = kVersion;
    Modality modality = Modality::visible;
    int max_concurrency = 1;
};

struct Response {
    std::string id;
    std::vector<Detection> detections;
    std::string error;  // non-empty for error responses
};

std::string encode_hello(const Hello& hello);
Hello parse_hello(const std::string& line);

std::string encode_request(const std::string& id, Modality modality, const Image& image);
std::string encode_response(const Response& response);
Response parse_response(const std::string& line);

/// Extracts the id from any response line without validating the rest.
std::string peek_id(const std::string& line);

}  // namespace protocol

/// Request/response channel to one detector process or server.
class Transport {
public:
    virtual ~Transport() = default;
    virtual protocol::Hello handshake() = 0;
    /// Sends one request line and waits for the response with the same id.
    virtual std::string round_trip(const std::string& id, const std::string& request,
                                   std::chrono::milliseconds timeout) = 0;
};

/// Line-delimited JSON over a child process's stdin/stdout. Responses may
/// arrive out of order and are matched by id.
std::unique_ptr<Transport> make_stdio_transport(const std::string& command);

/// GET /hello for the handshake, POST /detect per request.
std::unique_ptr<Transport> make_http_transport(const std::string& url);

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

class ExternalOracle final : public DetectorOracle {
public:
    ExternalOracle(std::unique_ptr<Transport> transport, Modality expected,
                   std::chrono::milliseconds timeout = kDefaultTimeout);
    ~ExternalOracle() override;

    Modality modality() const override { return hello_.modality; }
    Kind kind() const override { return Kind::external; }
    int max_concurrency() const override { return hello_.max_concurrency; }

protected:
    std::vector<Detection> detect_impl(const Image& image) override;

private:
    struct Gate;
    std::unique_ptr<Transport> transport_;
    protocol::Hello hello_;
    std::chrono::milliseconds timeout_;
    std::unique_ptr<Gate> gate_;
    std::atomic<std::uint64_t> next_id_{0};
};

/// "stdio:<command line>" or "http://host:port".
std::shared_ptr<ExternalOracle> external_oracle(const std::string& endpoint, Modality modality,
                                                std::chrono::milliseconds timeout = kDefaultTimeout);

}  // namespace xpatch::oracle
