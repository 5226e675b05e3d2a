#pragma once

#include "iga/gateway.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace iga {

struct HttpBackendConfig {
    /// e.g. "http://localhost:8000/v1"; "/chat/completions" is appended.
    std::string base_url = "http://localhost:8000/v1";
    std::string api_key;
    /// Model name per role key ("teacher_vlm", "student", "helper#0", "judge").
    /// Checkpoint-bound students use the checkpoint id as the model name.
    std::map<std::string, std::string> models;
    bool vision = false;
    int timeout_seconds = 120;

    /// Overlays IGA_API_BASE, IGA_API_KEY, IGA_VISION and
    /// IGA_MODEL_{TEACHER,STUDENT,JUDGE,HELPER<i>} from the environment.
    void apply_environment();
};

/// OpenAI-compatible chat-completions client. 429, 5xx and transport
/// failures surface as TransientError so the gateway retries them.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::string complete(const GenerationRequest& request) override;
    bool supports_vision() const override { return config_.vision; }

    std::string model_for(const ModelRole& role) const;

    /// The chat-completions body sent for `request`.
    nlohmann::json request_body(const GenerationRequest& request) const;
    /// choices[0].message.content; throws BackendError on any other shape.
    static std::string parse_response(const std::string& body);

private:
    HttpBackendConfig config_;
    std::string origin_;
    std::string path_prefix_;
};

}  // namespace iga
