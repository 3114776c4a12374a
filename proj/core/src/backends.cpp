#include "memloom/backends.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "memloom/util.hpp"

using nlohmann::json;

namespace memloom::backend {

void BackendEndpoint::validate() const {
    if (base_url.empty()) {
        throw ArgumentError("endpoint base_url must be set");
    }
    if (!(timeout_s > 0.0)) {
        throw ArgumentError("endpoint timeout must be positive");
    }
    if (max_retries < 0) {
        throw ArgumentError("max_retries must be non-negative");
    }
    if (!(backoff_base_s >= 0.0)) {
        throw ArgumentError("backoff base must be non-negative");
    }
}

HttpResponse HttpTransport::send(const BackendEndpoint& endpoint, const HttpRequest& request) {
    httplib::Client client(endpoint.base_url);
    auto timeout_ms = std::chrono::milliseconds(
        static_cast<long long>(endpoint.timeout_s * 1000.0));
    client.set_connection_timeout(timeout_ms);
    client.set_read_timeout(timeout_ms);
    client.set_write_timeout(timeout_ms);

    httplib::Headers headers;
    if (endpoint.auth_token) {
        headers.emplace("Authorization", "Bearer " + *endpoint.auth_token);
    }
    for (const auto& [k, v] : request.headers) {
        headers.emplace(k, v);
    }

    httplib::Result result =
        client.Post(request.path, headers, request.body, request.content_type);
    if (!result) {
        throw TransportError("connection to " + endpoint.base_url + " failed: " +
                             httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
}

HttpResponse MockTransport::send(const BackendEndpoint&, const HttpRequest& request) {
    requests_.push_back(request);
    return handler_(request);
}

std::string post_with_retries(const BackendEndpoint& endpoint, Transport& transport,
                              const std::string& path, const std::string& json_body,
                              const Sleeper& sleeper) {
    endpoint.validate();
    if (json_body.size() > endpoint.max_payload_bytes) {
        throw RequestTooLargeError("request body of " + std::to_string(json_body.size()) +
                                   " bytes exceeds limit of " +
                                   std::to_string(endpoint.max_payload_bytes) + " for " +
                                   endpoint.base_url + path);
    }

    HttpRequest request;
    request.path = path;
    request.body = json_body;

    const int attempts_allowed = endpoint.max_retries + 1;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
        try {
            HttpResponse response = transport.send(endpoint, request);
            if (response.status >= 200 && response.status < 300) {
                return response.body;
            }
            last_error = "HTTP " + std::to_string(response.status);
            if (response.status >= 400 && response.status < 500) {
                // client errors never become right by retrying
                throw BackendError("backend " + endpoint.base_url + path + " rejected request (" +
                                       last_error + ") after " + std::to_string(attempt) +
                                       " attempt(s)",
                                   endpoint.base_url + path, attempt);
            }
        } catch (const TransportError& e) {
            last_error = e.what();
        }
        if (attempt < attempts_allowed) {
            double delay = endpoint.backoff_base_s * std::pow(2.0, attempt - 1);
            if (sleeper) {
                sleeper(delay);
            } else if (delay > 0.0) {
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
        }
    }
    throw BackendError("backend " + endpoint.base_url + path + " failed after " +
                           std::to_string(attempts_allowed) + " attempt(s): " + last_error,
                       endpoint.base_url + path, attempts_allowed);
}

namespace {

json parse_response(const std::string& body, const std::string& what) {
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(what + ": malformed JSON response: " + e.what());
    }
}

std::string extract_text(const std::string& body, const std::string& what) {
    json j = parse_response(body, what);
    if (!j.contains("text") || !j.at("text").is_string()) {
        throw ProtocolError(what + ": response lacks a \"text\" field");
    }
    std::string text = j.at("text").get<std::string>();
    if (text.empty()) {
        throw ProtocolError(what + ": backend returned empty text");
    }
    return text;
}

}  // namespace

HttpActionCaptioner::HttpActionCaptioner(BackendEndpoint endpoint,
                                         std::shared_ptr<Transport> transport, Sleeper sleeper)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {}

std::string HttpActionCaptioner::caption_action(const ClipRef& clip,
                                                const std::optional<ControlToken>& control) {
    json body{{"video_id", clip.video_id},
              {"start_s", clip.interval.start},
              {"end_s", clip.interval.end}};
    if (control) {
        body["control"] = control->surface;
    }
    std::string response =
        post_with_retries(endpoint_, *transport_, "/v1/caption", body.dump(), sleeper_);
    return extract_text(response, "caption");
}

HttpSceneDescriber::HttpSceneDescriber(BackendEndpoint endpoint,
                                       std::shared_ptr<Transport> transport,
                                       FrameLoader frame_loader, Sleeper sleeper)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)),
      frame_loader_(std::move(frame_loader)), sleeper_(std::move(sleeper)) {}

std::string HttpSceneDescriber::describe_scene(const ClipRef& frame, const std::string& prompt) {
    json body{{"video_id", frame.video_id}, {"t_s", frame.interval.start}, {"prompt", prompt}};
    if (frame_loader_) {
        body["frame_b64"] = frame_loader_(frame);
    }
    std::string response =
        post_with_retries(endpoint_, *transport_, "/v1/describe", body.dump(), sleeper_);
    return extract_text(response, "describe");
}

HttpCompleter::HttpCompleter(BackendEndpoint endpoint, std::shared_ptr<Transport> transport,
                             Sleeper sleeper)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {}

std::string HttpCompleter::complete(const std::string& prompt) {
    json body{{"prompt", prompt}};
    std::string response =
        post_with_retries(endpoint_, *transport_, "/v1/complete", body.dump(), sleeper_);
    json j = parse_response(response, "complete");
    if (!j.contains("text") || !j.at("text").is_string()) {
        throw ProtocolError("complete: response lacks a \"text\" field");
    }
    // raw completion passes through untouched; interpreting it is the caller's job
    return j.at("text").get<std::string>();
}

HttpEmbedder::HttpEmbedder(BackendEndpoint endpoint, std::shared_ptr<Transport> transport,
                           Sleeper sleeper)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {}

std::vector<std::vector<double>> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw ArgumentError("embed requires at least one text");
    }
    json body{{"texts", texts}};
    std::string response =
        post_with_retries(endpoint_, *transport_, "/v1/embed", body.dump(), sleeper_);
    json j = parse_response(response, "embed");
    if (!j.contains("vectors") || !j.at("vectors").is_array()) {
        throw ProtocolError("embed: response lacks a \"vectors\" array");
    }
    std::vector<std::vector<double>> vectors;
    size_t dim = 0;
    for (const json& row : j.at("vectors")) {
        if (!row.is_array()) {
            throw ProtocolError("embed: vector rows must be arrays");
        }
        std::vector<double> v = row.get<std::vector<double>>();
        if (vectors.empty()) {
            dim = v.size();
        } else if (v.size() != dim) {
            throw ProtocolError("embed: inconsistent vector dimensions in response");
        }
        vectors.push_back(std::move(v));
    }
    if (vectors.size() != texts.size()) {
        throw ProtocolError("embed: expected " + std::to_string(texts.size()) +
                            " vectors, got " + std::to_string(vectors.size()));
    }
    return vectors;
}

}  // namespace memloom::backend
