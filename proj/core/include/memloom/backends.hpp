#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "memloom/errors.hpp"
#include "memloom/memory_log.hpp"

namespace memloom::backend {

/// Where and how to reach one remote model service.
struct BackendEndpoint {
    std::string base_url;
    double timeout_s = 30.0;
    int max_retries = 2;
    double backoff_base_s = 0.25;      // sleep base * 2^attempt between retries
    std::optional<std::string> auth_token;
    size_t max_payload_bytes = 4u * 1024 * 1024;

    void validate() const;  // throws ArgumentError
};

/// A slice of one video, addressed by id + time; `media` optionally points at
/// a feature file or frame-stream slice for backends that need raw input.
struct ClipRef {
    std::string video_id;
    TimeInterval interval;
    std::string media;
};

struct HttpRequest {
    std::string method = "POST";
    std::string path;
    std::string body;
    std::string content_type = "application/json";
    std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Raised by transports when the endpoint cannot be reached at all.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Connection layer behind the REST clients. HttpTransport talks real HTTP;
/// tests plug in in-process transports.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse send(const BackendEndpoint& endpoint, const HttpRequest& request) = 0;
};

class HttpTransport final : public Transport {
public:
    HttpResponse send(const BackendEndpoint& endpoint, const HttpRequest& request) override;
};

/// In-process transport driven by a handler function. Records every request
/// so tests can assert exact wire bytes.
class MockTransport final : public Transport {
public:
    using Handler = std::function<HttpResponse(const HttpRequest&)>;

    explicit MockTransport(Handler handler) : handler_(std::move(handler)) {}

    HttpResponse send(const BackendEndpoint& endpoint, const HttpRequest& request) override;

    const std::vector<HttpRequest>& requests() const { return requests_; }

private:
    Handler handler_;
    std::vector<HttpRequest> requests_;
};

/// Sleep hook for retry backoff; tests substitute a recorder.
using Sleeper = std::function<void(double seconds)>;

/// POSTs a JSON body with the endpoint's retry policy: max_retries+1 attempts,
/// exponential backoff, no retry on 4xx. Returns the response body.
std::string post_with_retries(const BackendEndpoint& endpoint, Transport& transport,
                              const std::string& path, const std::string& json_body,
                              const Sleeper& sleeper = {});

// ---- the four model roles ----

class ActionCaptioner {
public:
    virtual ~ActionCaptioner() = default;
    virtual std::string caption_action(const ClipRef& clip,
                                       const std::optional<ControlToken>& control = {}) = 0;
};

class SceneDescriber {
public:
    virtual ~SceneDescriber() = default;
    virtual std::string describe_scene(const ClipRef& frame, const std::string& prompt) = 0;
};

class Completer {
public:
    virtual ~Completer() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

// ---- JSON-over-HTTP clients ----
//
// POST /v1/caption  {video_id, start_s, end_s, control?}        -> {text}
// POST /v1/describe {video_id, t_s, prompt, frame_b64?}         -> {text}
// POST /v1/complete {prompt}                                    -> {text}
// POST /v1/embed    {texts:[...]}                               -> {vectors:[[...]]}

class HttpActionCaptioner final : public ActionCaptioner {
public:
    HttpActionCaptioner(BackendEndpoint endpoint, std::shared_ptr<Transport> transport,
                        Sleeper sleeper = {});

    std::string caption_action(const ClipRef& clip,
                               const std::optional<ControlToken>& control = {}) override;

private:
    BackendEndpoint endpoint_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;
};

class HttpSceneDescriber final : public SceneDescriber {
public:
    /// frame_loader, when set, supplies inline base64 frame bytes for the
    /// request; otherwise media is passed by reference (id + time only).
    using FrameLoader = std::function<std::string(const ClipRef&)>;

    HttpSceneDescriber(BackendEndpoint endpoint, std::shared_ptr<Transport> transport,
                       FrameLoader frame_loader = {}, Sleeper sleeper = {});

    std::string describe_scene(const ClipRef& frame, const std::string& prompt) override;

private:
    BackendEndpoint endpoint_;
    std::shared_ptr<Transport> transport_;
    FrameLoader frame_loader_;
    Sleeper sleeper_;
};

class HttpCompleter final : public Completer {
public:
    HttpCompleter(BackendEndpoint endpoint, std::shared_ptr<Transport> transport,
                  Sleeper sleeper = {});

    std::string complete(const std::string& prompt) override;

private:
    BackendEndpoint endpoint_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;
};

class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(BackendEndpoint endpoint, std::shared_ptr<Transport> transport,
                 Sleeper sleeper = {});

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

private:
    BackendEndpoint endpoint_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;
};

/// Environment variable names for endpoint configuration.
inline constexpr const char* kEnvCaptionUrl = "MEMLOOM_CAPTION_URL";
inline constexpr const char* kEnvSceneUrl = "MEMLOOM_SCENE_URL";
inline constexpr const char* kEnvLlmUrl = "MEMLOOM_LLM_URL";
inline constexpr const char* kEnvEmbedUrl = "MEMLOOM_EMBED_URL";
inline constexpr const char* kEnvAuthToken = "MEMLOOM_AUTH_TOKEN";

}  // namespace memloom::backend
