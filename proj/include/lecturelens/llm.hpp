#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lecturelens/analytics.hpp"
#include "lecturelens/corpus.hpp"
#include "lecturelens/types.hpp"

namespace lecturelens {

enum class Role { System, User };

struct ChatMessage {
    Role role = Role::User;
    std::string content;  // non-empty

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 4096;

    bool operator==(const ChatRequest&) const = default;
};

/// Stable 64-bit FNV-1a hash of the request content, as 16 hex digits.
/// Keys mock fixture files; identical requests hash identically on any
/// platform.
std::string request_hash(const ChatRequest& request);

enum class PromptLanguage { Auto, Zh, En };
PromptLanguage prompt_language_from_string(const std::string& s);
const char* to_string(PromptLanguage lang);

/// Auto resolves to Zh when the corpus contains CJK ideographs, else En.
PromptLanguage resolve_language(PromptLanguage lang, const std::string& corpus);

// ── Prompt builders ───────────────────────────────────────────────
// Pure and deterministic: identical inputs give byte-identical requests.

ChatRequest build_summary_prompt(const std::string& full_corpus,
                                 PromptLanguage lang = PromptLanguage::Auto);

/// Asks the five evaluation questions and mandates a JSON reply matching
/// the EvaluationReport schema (schema text embedded in the prompt).
ChatRequest build_evaluation_prompt(const std::string& summary,
                                    const std::string& full_corpus,
                                    PromptLanguage lang = PromptLanguage::Auto);

/// Enumerates each stage with its rate band and text, then each contrast
/// pair with polarity, in timeline order; mandates OptimizationReport JSON.
ChatRequest build_optimization_prompt(const std::vector<LabeledCorpus>& labeled,
                                      const std::vector<ContrastPair>& contrasts,
                                      const SessionStats& stats,
                                      PromptLanguage lang = PromptLanguage::Auto);

// ── Chat-completion backends ──────────────────────────────────────

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    /// One attempt; retry policy lives in complete().
    virtual std::string complete_once(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct HttpLlmOptions {
    std::string endpoint;
    std::string model = "deepseek-r1:70b";
    std::string api_key;  // sent as a bearer header when non-empty
    std::string response_text_path = "choices[0].message.content";
};

/// POSTs {"model", "messages", "temperature", "max_tokens"} and extracts
/// the reply text at the configured path.
class HttpLlmBackend final : public LlmBackend {
public:
    explicit HttpLlmBackend(HttpLlmOptions options);
    std::string complete_once(const ChatRequest& request) override;
    std::string name() const override;

private:
    HttpLlmOptions options_;
};

/// Deterministic fixture-directory backend. Serves <request_hash>.txt
/// when present, falling back to default.txt, falling back to a built-in
/// schema-valid placeholder derived from the request's schema marker.
class MockLlmBackend final : public LlmBackend {
public:
    explicit MockLlmBackend(std::filesystem::path fixture_dir);
    std::string complete_once(const ChatRequest& request) override;
    std::string name() const override;

private:
    std::filesystem::path fixture_dir_;
};

/// Runs a request against a backend, retrying exactly once on transport
/// failure. Non-success HTTP statuses and unusable replies are not
/// retried; non-JSON reply *content* is handled downstream, never here.
std::string complete(const ChatRequest& request, LlmBackend& backend);

// ── Report schemas ────────────────────────────────────────────────

/// The five evaluation dimensions, in fixed report order.
inline constexpr std::array<std::string_view, 5> kEvaluationDimensions = {
    "content-summary",
    "ideological-political-integration",
    "teaching-logic",
    "theory-practice-combination",
    "subject-characteristics",
};

struct EvaluationDimension {
    std::string name;
    std::string conclusion;
    std::string analysis;

    bool operator==(const EvaluationDimension&) const = default;
};

struct EvaluationReport {
    std::string session_id;
    std::string summary;
    std::vector<EvaluationDimension> dimensions;  // exactly 5, fixed order
    bool parse_failed = false;
    std::string parse_error;

    bool operator==(const EvaluationReport&) const = default;
};

struct OptimizationEntry {
    std::string interval_label;
    std::string behavior;
    std::string content_and_expression;
    std::string analysis;

    bool operator==(const OptimizationEntry&) const = default;
};

struct OptimizationReport {
    std::string session_id;
    std::vector<OptimizationEntry> entries;
    std::string summary;
    bool parse_failed = false;
    std::string parse_error;

    bool operator==(const OptimizationReport&) const = default;
};

// ── Response parsing ──────────────────────────────────────────────
// Models wrap JSON in prose or code fences; the first balanced top-level
// JSON object found in the text is taken. Parsing never throws on
// arbitrary input: failures yield a schema-valid degraded report with the
// raw text in `summary` and parse_failed set.

EvaluationReport parse_evaluation_json(const std::string& raw);
OptimizationReport parse_optimization_json(const std::string& raw);

// ── Orchestration ─────────────────────────────────────────────────

/// summary prompt -> complete -> evaluation prompt -> complete -> parse.
EvaluationReport evaluate_session(const SessionBundle& bundle,
                                  const std::string& full_corpus,
                                  LlmBackend& backend,
                                  PromptLanguage lang = PromptLanguage::Auto);

/// optimization prompt -> complete -> parse.
OptimizationReport generate_optimization(const std::vector<LabeledCorpus>& labeled,
                                         const std::vector<ContrastPair>& contrasts,
                                         const SessionStats& stats,
                                         LlmBackend& backend,
                                         PromptLanguage lang = PromptLanguage::Auto,
                                         const std::string& session_id = "");

}  // namespace lecturelens
