#pragma once

#include <filesystem>
#include <string>

#include "lecturelens/analytics.hpp"

namespace lecturelens {

/// Everything one `analyze` run needs. Loaded from a JSON config file,
/// overridden by flags, then by the environment for secrets.
struct RunConfig {
    AnalyticsConfig analytics;

    std::string detections_path;
    std::string transcript_path;  // direct JSONL; leave empty to use ASR
    std::string audio_ref;        // opaque locator handed to the ASR backend
    std::string session_id = "session";
    double duration_s = 0.0;  // 0 = infer from the data
    std::string out_dir = ".";
    std::string store_path;  // default <out_dir>/teaching_store.jsonl

    std::string course;
    std::string teacher;
    std::string date;

    std::string asr_endpoint;
    std::string llm_endpoint;
    std::string llm_model = "deepseek-r1:70b";
    std::string llm_api_key;
    std::string llm_response_text_path = "choices[0].message.content";
    std::string prompt_language = "auto";  // "auto" | "zh" | "en"

    std::string mock_asr_file;  // transcript fixture; replaces the ASR backend
    std::string mock_llm_dir;   // fixture dir; replaces the LLM backend
    bool skip_llm = false;

    /// Store path with the out_dir default applied.
    std::filesystem::path resolved_store_path() const;

    void validate() const;  // throws Error(Config)
};

/// Strict parse: unknown keys anywhere are rejected. Does not validate;
/// callers apply overrides first.
RunConfig parse_run_config(const std::string& json_text);
RunConfig run_config_from_file(const std::filesystem::path& path);

/// Secrets come from the environment when set: LECTURELENS_LLM_API_KEY
/// beats any configured key. Endpoints fall back the other way —
/// LECTURELENS_ASR_ENDPOINT / LECTURELENS_LLM_ENDPOINT fill in only when
/// nothing else set them.
void apply_environment(RunConfig& config);

}  // namespace lecturelens
