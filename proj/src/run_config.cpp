#include "lecturelens/run_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lecturelens/error.hpp"
#include "lecturelens/llm.hpp"

namespace lecturelens {
namespace {

using nlohmann::json;

constexpr const char* kTopKeys[] = {
    "analytics",     "asr_endpoint",  "audio_ref",
    "detections_path", "duration_s",  "llm_api_key",
    "llm_endpoint",  "llm_model",     "llm_response_text_path",
    "metadata",      "mock_asr_file", "mock_llm_dir",
    "out_dir",       "prompt_language", "session_id",
    "skip_llm",      "store_path",    "transcript_path",
};
constexpr const char* kAnalyticsKeys[] = {"contrast_k",       "delta",
                                          "denominator_mode", "high_threshold",
                                          "low_threshold",    "window_w"};
constexpr const char* kMetadataKeys[] = {"course", "date", "teacher"};

void reject_unknown(const json& j, const char* const* keys, std::size_t n,
                    const char* where) {
    for (const auto& item : j.items())
        if (std::find_if(keys, keys + n, [&](const char* k) {
                return item.key() == k;
            }) == keys + n)
            throw Error(ErrorCategory::Config, std::string("unknown ") + where +
                                                   " key \"" + item.key() + "\"");
}

void read_string(const json& j, const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
}

}  // namespace

std::filesystem::path RunConfig::resolved_store_path() const {
    if (!store_path.empty()) return store_path;
    return std::filesystem::path(out_dir) / "teaching_store.jsonl";
}

void RunConfig::validate() const {
    analytics.validate();
    prompt_language_from_string(prompt_language);  // throws on a bad token
    if (detections_path.empty())
        throw Error(ErrorCategory::Config, "detections_path is required");
    if (transcript_path.empty() && mock_asr_file.empty() && asr_endpoint.empty())
        throw Error(ErrorCategory::Config,
                    "need a transcript source: transcript_path, mock_asr_file or "
                    "asr_endpoint");
    if (transcript_path.empty() && mock_asr_file.empty() && audio_ref.empty())
        throw Error(ErrorCategory::Config,
                    "asr_endpoint needs an audio_ref to transcribe");
    if (!skip_llm && mock_llm_dir.empty() && llm_endpoint.empty())
        throw Error(ErrorCategory::Config,
                    "need an LLM backend (llm_endpoint or mock_llm_dir), or pass "
                    "--skip-llm");
    if (duration_s < 0.0)
        throw Error(ErrorCategory::Config, "duration_s must be >= 0");
    if (session_id.empty())
        throw Error(ErrorCategory::Config, "session_id must be non-empty");
    if (out_dir.empty())
        throw Error(ErrorCategory::Config, "out_dir must be non-empty");
}

RunConfig parse_run_config(const std::string& json_text) {
    const json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCategory::Config, "run config must be a JSON object");
    reject_unknown(j, kTopKeys, std::size(kTopKeys), "config");
    try {
        RunConfig c;
        if (j.contains("analytics")) {
            const json& a = j.at("analytics");
            if (!a.is_object())
                throw Error(ErrorCategory::Config, "\"analytics\" must be an object");
            reject_unknown(a, kAnalyticsKeys, std::size(kAnalyticsKeys), "analytics");
            if (a.contains("denominator_mode"))
                c.analytics.denominator_mode = denominator_mode_from_string(
                    a.at("denominator_mode").get<std::string>());
            if (a.contains("high_threshold"))
                c.analytics.high_threshold = a.at("high_threshold").get<double>();
            if (a.contains("low_threshold"))
                c.analytics.low_threshold = a.at("low_threshold").get<double>();
            if (a.contains("window_w")) c.analytics.window_w = a.at("window_w").get<int>();
            if (a.contains("delta")) c.analytics.delta = a.at("delta").get<double>();
            if (a.contains("contrast_k"))
                c.analytics.contrast_k = a.at("contrast_k").get<int>();
        }
        if (j.contains("metadata")) {
            const json& m = j.at("metadata");
            if (!m.is_object())
                throw Error(ErrorCategory::Config, "\"metadata\" must be an object");
            reject_unknown(m, kMetadataKeys, std::size(kMetadataKeys), "metadata");
            read_string(m, "course", c.course);
            read_string(m, "teacher", c.teacher);
            read_string(m, "date", c.date);
        }
        read_string(j, "detections_path", c.detections_path);
        read_string(j, "transcript_path", c.transcript_path);
        read_string(j, "audio_ref", c.audio_ref);
        read_string(j, "session_id", c.session_id);
        if (j.contains("duration_s")) c.duration_s = j.at("duration_s").get<double>();
        read_string(j, "out_dir", c.out_dir);
        read_string(j, "store_path", c.store_path);
        read_string(j, "asr_endpoint", c.asr_endpoint);
        read_string(j, "llm_endpoint", c.llm_endpoint);
        read_string(j, "llm_model", c.llm_model);
        read_string(j, "llm_api_key", c.llm_api_key);
        read_string(j, "llm_response_text_path", c.llm_response_text_path);
        read_string(j, "prompt_language", c.prompt_language);
        read_string(j, "mock_asr_file", c.mock_asr_file);
        read_string(j, "mock_llm_dir", c.mock_llm_dir);
        if (j.contains("skip_llm")) c.skip_llm = j.at("skip_llm").get<bool>();
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCategory::Config, std::string("bad run config: ") + e.what());
    }
}

RunConfig run_config_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCategory::Io,
                    "cannot open config file \"" + path.string() + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

void apply_environment(RunConfig& config) {
    if (const char* key = std::getenv("LECTURELENS_LLM_API_KEY"); key && *key)
        config.llm_api_key = key;
    if (const char* ep = std::getenv("LECTURELENS_ASR_ENDPOINT");
        ep && *ep && config.asr_endpoint.empty())
        config.asr_endpoint = ep;
    if (const char* ep = std::getenv("LECTURELENS_LLM_ENDPOINT");
        ep && *ep && config.llm_endpoint.empty())
        config.llm_endpoint = ep;
}

}  // namespace lecturelens
