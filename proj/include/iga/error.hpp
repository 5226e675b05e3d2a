#pragma once

#include <stdexcept>
#include <string>

namespace iga {

/// Base of every domain error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model text did not contain a usable triplet list. Carries the raw text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string offending)
        : Error(what), offending_(std::move(offending)) {}

    const std::string& offending_text() const noexcept { return offending_; }

private:
    std::string offending_;
};

class VerdictUnparseable : public Error {
public:
    VerdictUnparseable(const std::string& what, std::string response)
        : Error(what), response_(std::move(response)) {}

    const std::string& response() const noexcept { return response_; }

private:
    std::string response_;
};

// Gateway
class TransientError : public Error { using Error::Error; };
class BackendError : public Error { using Error::Error; };
class BackendUnavailable : public Error { using Error::Error; };
class CapabilityError : public Error { using Error::Error; };
class BudgetExceeded : public Error { using Error::Error; };
class UnknownCheckpoint : public Error { using Error::Error; };
class UnknownRole : public Error { using Error::Error; };
/// A scripted backend received a request no fixture entry matches.
class ScriptMiss : public Error { using Error::Error; };

// Trainer
class EmptyDataset : public Error { using Error::Error; };
class TrainerFailure : public Error { using Error::Error; };

// Evaluation
class SchemaError : public Error {
public:
    SchemaError(std::string field_path, const std::string& message)
        : Error(field_path.empty() ? message : field_path + ": " + message),
          field_path_(std::move(field_path)) {}

    const std::string& field_path() const noexcept { return field_path_; }

private:
    std::string field_path_;
};
class DegenerateBaseline : public Error { using Error::Error; };
class EmptyList : public Error { using Error::Error; };

// Orchestration
class AnnotationEmpty : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
/// Bad command-line usage (exit code 2).
class UsageError : public Error { using Error::Error; };

}  // namespace iga
