#include "iga/gateway.hpp"

#include "iga/error.hpp"
#include "iga/text.hpp"

#include <cmath>
#include <ctime>
#include <thread>

namespace iga {

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

}  // namespace

std::string_view to_string(RoleKind kind) {
    switch (kind) {
        case RoleKind::teacher_vlm: return "teacher_vlm";
        case RoleKind::student: return "student";
        case RoleKind::helper: return "helper";
        case RoleKind::judge: return "judge";
    }
    return "unknown";
}

std::optional<RoleKind> role_kind_from_string(std::string_view s) {
    if (s == "teacher_vlm" || s == "teacher") return RoleKind::teacher_vlm;
    if (s == "student") return RoleKind::student;
    if (s == "helper") return RoleKind::helper;
    if (s == "judge") return RoleKind::judge;
    return std::nullopt;
}

std::string ModelRole::key() const {
    std::string k(to_string(kind_));
    if (kind_ == RoleKind::helper) k += "#" + std::to_string(index_);
    if (checkpoint_id_) k += "@" + *checkpoint_id_;
    return k;
}

ModelRole ModelRole::parse(std::string_view key) {
    if (auto at = key.find('@'); at != std::string_view::npos) {
        if (key.substr(0, at) != "student" || at + 1 == key.size()) {
            throw UnknownRole("only students carry checkpoints: '" + std::string(key) + "'");
        }
        return ModelRole(RoleKind::student, 0, std::string(key.substr(at + 1)));
    }
    if (auto hash = key.find('#'); hash != std::string_view::npos) {
        if (key.substr(0, hash) != "helper") throw UnknownRole("bad role key '" + std::string(key) + "'");
        const auto digits = key.substr(hash + 1);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string_view::npos) {
            throw UnknownRole("bad helper index in '" + std::string(key) + "'");
        }
        return helper(static_cast<std::uint32_t>(std::stoul(std::string(digits))));
    }
    auto kind = role_kind_from_string(key);
    if (!kind || *kind == RoleKind::helper) throw UnknownRole("bad role key '" + std::string(key) + "'");
    return ModelRole(*kind, 0, std::nullopt);
}

std::string GenerationRequest::digest() const {
    nlohmann::json j = {
        {"role", role.key()},
        {"system", system_rule},
        {"user", user_content},
        {"temperature", sampling.temperature},
        {"max_tokens", sampling.max_tokens},
    };
    j["seed"] = sampling.seed ? nlohmann::json(*sampling.seed) : nlohmann::json(nullptr);
    if (image) {
        j["image"] = {{"media_type", image->media_type}, {"sha256", text::sha256_hex(image->bytes)}};
    } else {
        j["image"] = nullptr;
    }
    return text::sha256_hex(j.dump());
}

nlohmann::json CallRecord::to_json() const {
    nlohmann::json j = {{"digest", digest},       {"role", role},         {"timestamp", timestamp},
                        {"response", response},   {"latency_ms", latency_ms}, {"attempts", attempts}};
    if (!error.empty()) j["error"] = error;
    return j;
}

Gateway::Gateway(GatewayOptions options, std::shared_ptr<const CheckpointStore> checkpoints)
    : options_(std::move(options)), checkpoints_(std::move(checkpoints)) {
    if (!options_.sleep) {
        options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
    if (options_.call_log_path) {
        if (options_.call_log_path->has_parent_path()) {
            std::filesystem::create_directories(options_.call_log_path->parent_path());
        }
        log_file_.open(*options_.call_log_path, std::ios::app);
        if (!log_file_) throw Error("cannot open call log " + options_.call_log_path->string());
    }
}

void Gateway::bind(RoleKind kind, std::shared_ptr<Backend> backend) {
    std::lock_guard lock(mutex_);
    backends_[kind] = std::move(backend);
}

std::shared_ptr<Backend> Gateway::resolve(const ModelRole& role) const {
    std::lock_guard lock(mutex_);
    if (role.checkpoint_id() && !registered_.contains(*role.checkpoint_id())) {
        throw UnknownCheckpoint("checkpoint '" + *role.checkpoint_id() + "' was never registered");
    }
    auto it = backends_.find(role.kind());
    if (it == backends_.end() || !it->second) {
        throw UnknownRole("no backend bound for role '" + role.key() + "'");
    }
    return it->second;
}

bool Gateway::supports_vision(const ModelRole& role) const {
    return resolve(role)->supports_vision();
}

std::string Gateway::generate(const GenerationRequest& request) {
    auto backend = resolve(request.role);
    if (request.image && !backend->supports_vision()) {
        throw CapabilityError("backend for role '" + request.role.key() + "' cannot take images");
    }
    {
        std::lock_guard lock(mutex_);
        if (exhausted_ || calls_ >= options_.call_budget) {
            exhausted_ = true;
            throw BudgetExceeded("call budget of " + std::to_string(options_.call_budget) +
                                 " exhausted");
        }
        ++calls_;
    }

    CallRecord record;
    record.digest = request.digest();
    record.role = request.role.key();
    record.timestamp = utc_timestamp();
    const auto started = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    };

    const auto& retry = options_.retry;
    for (int attempt = 1;; ++attempt) {
        record.attempts = attempt;
        try {
            record.response = backend->complete(request);
            record.latency_ms = elapsed_ms();
            append(record);
            return record.response;
        } catch (const TransientError& e) {
            if (attempt >= retry.max_attempts) {
                record.error = e.what();
                record.latency_ms = elapsed_ms();
                append(record);
                throw BackendUnavailable("role '" + record.role + "' unavailable after " +
                                         std::to_string(attempt) + " attempts: " + e.what());
            }
            const auto delay = retry.base_delay.count() * std::pow(retry.multiplier, attempt - 1);
            options_.sleep(std::chrono::milliseconds(static_cast<std::int64_t>(delay)));
        } catch (const std::exception& e) {
            record.error = e.what();
            record.latency_ms = elapsed_ms();
            append(record);
            throw;
        }
    }
}

void Gateway::append(CallRecord record) {
    std::lock_guard lock(mutex_);
    if (log_file_.is_open()) {
        log_file_ << record.to_json().dump() << '\n';
        log_file_.flush();
    }
    log_.push_back(std::move(record));
}

ModelRole Gateway::register_checkpoint(const std::string& checkpoint_id) {
    if (!checkpoints_ || !checkpoints_->contains(checkpoint_id)) {
        throw UnknownCheckpoint("checkpoint '" + checkpoint_id + "' has no manifest");
    }
    std::lock_guard lock(mutex_);
    registered_.insert(checkpoint_id);
    return ModelRole(RoleKind::student, 0, checkpoint_id);
}

std::vector<CallRecord> Gateway::call_log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::uint64_t Gateway::calls_made() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

void Gateway::restore_call_count(std::uint64_t calls) {
    std::lock_guard lock(mutex_);
    calls_ = calls;
}

}  // namespace iga
