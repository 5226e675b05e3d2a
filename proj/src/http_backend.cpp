#include "iga/http_backend.hpp"

#include "iga/error.hpp"
#include "iga/text.hpp"

#include <httplib.h>

#include <cstdlib>

namespace iga {

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

}  // namespace

void HttpBackendConfig::apply_environment() {
    if (auto v = env("IGA_API_BASE")) base_url = *v;
    if (auto v = env("IGA_API_KEY")) api_key = *v;
    if (auto v = env("IGA_VISION")) vision = (*v == "1" || *v == "true");
    if (auto v = env("IGA_MODEL_TEACHER")) models["teacher_vlm"] = *v;
    if (auto v = env("IGA_MODEL_STUDENT")) models["student"] = *v;
    if (auto v = env("IGA_MODEL_JUDGE")) models["judge"] = *v;
    for (int i = 0; i < 16; ++i) {
        const auto name = "IGA_MODEL_HELPER" + std::to_string(i);
        if (auto v = env(name.c_str())) models["helper#" + std::to_string(i)] = *v;
    }
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    auto url = config_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    origin_ = path_start == std::string::npos ? url : url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
}

std::string HttpBackend::model_for(const ModelRole& role) const {
    if (role.checkpoint_id()) return *role.checkpoint_id();
    auto it = config_.models.find(role.key());
    if (it == config_.models.end()) {
        throw UnknownRole("no model name configured for role '" + role.key() + "'");
    }
    return it->second;
}

nlohmann::json HttpBackend::request_body(const GenerationRequest& request) const {
    nlohmann::json user;
    if (request.image) {
        const auto url = "data:" + request.image->media_type + ";base64," +
                         text::base64_encode(request.image->bytes);
        user = nlohmann::json::array({
            {{"type", "text"}, {"text", request.user_content}},
            {{"type", "image_url"}, {"image_url", {{"url", url}}}},
        });
    } else {
        user = request.user_content;
    }
    nlohmann::json body = {
        {"model", model_for(request.role)},
        {"messages",
         nlohmann::json::array({{{"role", "system"}, {"content", request.system_rule}},
                                {{"role", "user"}, {"content", std::move(user)}}})},
        {"temperature", request.sampling.temperature},
        {"max_tokens", request.sampling.max_tokens},
        {"stream", false},
    };
    if (request.sampling.seed) body["seed"] = *request.sampling.seed;
    return body;
}

std::string HttpBackend::parse_response(const std::string& body) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw BackendError("response is not JSON");
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty()) {
        throw BackendError("response has no choices");
    }
    if (!(*choices)[0].is_object()) throw BackendError("response choice is not an object");
    const auto message = (*choices)[0].value("message", nlohmann::json::object());
    if (!message.is_object()) throw BackendError("response message is not an object");
    const auto content = message.find("content");
    if (content == message.end()) throw BackendError("response message has no content");
    if (content->is_null()) return {};
    if (!content->is_string()) throw BackendError("response content is not a string");
    return content->get<std::string>();
}

std::string HttpBackend::complete(const GenerationRequest& request) {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request).dump(),
                           "application/json");
    if (!res) throw TransientError("transport error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
        throw TransientError("HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
    }
    return parse_response(res->body);
}

}  // namespace iga
