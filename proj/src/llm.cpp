#include "lecturelens/llm.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "lecturelens/error.hpp"

using nlohmann::json;

namespace lecturelens {

namespace {

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const char* role_name(Role r) { return r == Role::System ? "system" : "user"; }

json request_to_json(const ChatRequest& request, const std::string& model) {
    json messages = json::array();
    for (const auto& m : request.messages)
        messages.push_back(json{{"role", role_name(m.role)}, {"content", m.content}});
    json body{{"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    if (!model.empty()) body["model"] = model;
    return body;
}

std::string format2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string percent0(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f%%", rate * 100.0);
    return buf;
}

}  // namespace

std::string request_hash(const ChatRequest& request) {
    // Canonical bytes: the sorted-key JSON dump of the request (model-free,
    // so the same prompt hashes identically under any backend).
    const std::string bytes = request_to_json(request, "").dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PromptLanguage prompt_language_from_string(const std::string& s) {
    if (s == "auto") return PromptLanguage::Auto;
    if (s == "zh") return PromptLanguage::Zh;
    if (s == "en") return PromptLanguage::En;
    throw Error(ErrorCategory::Config, "unknown prompt language \"" + s + "\"");
}

const char* to_string(PromptLanguage lang) {
    switch (lang) {
        case PromptLanguage::Auto: return "auto";
        case PromptLanguage::Zh: return "zh";
        case PromptLanguage::En: return "en";
    }
    return "?";
}

PromptLanguage resolve_language(PromptLanguage lang, const std::string& corpus) {
    if (lang != PromptLanguage::Auto) return lang;
    // Scan for CJK ideographs (U+3400..U+9FFF, U+F900..U+FAFF).
    for (std::size_t i = 0; i < corpus.size();) {
        const unsigned char c = corpus[i];
        if (c < 0x80) {
            ++i;
        } else if ((c & 0xE0) == 0xC0) {
            i += 2;
        } else if ((c & 0xF0) == 0xE0) {
            if (i + 2 < corpus.size()) {
                const unsigned int cp = ((c & 0x0Fu) << 12) |
                                        ((corpus[i + 1] & 0x3Fu) << 6) |
                                        (corpus[i + 2] & 0x3Fu);
                if ((cp >= 0x3400 && cp <= 0x9FFF) || (cp >= 0xF900 && cp <= 0xFAFF))
                    return PromptLanguage::Zh;
            }
            i += 3;
        } else {
            i += 4;
        }
    }
    return PromptLanguage::En;
}

// ── Prompt builders ───────────────────────────────────────────────

namespace {

// Schema blocks are language-independent: dimension ids and JSON keys
// stay canonical so replies parse identically regardless of prompt
// language.
const char* kEvaluationSchema =
    "{\n"
    "  \"summary\": \"<overall conclusion>\",\n"
    "  \"dimensions\": [\n"
    "    {\"name\": \"content-summary\", \"conclusion\": \"<verdict>\", \"analysis\": \"<reasoning>\"},\n"
    "    {\"name\": \"ideological-political-integration\", \"conclusion\": \"...\", \"analysis\": \"...\"},\n"
    "    {\"name\": \"teaching-logic\", \"conclusion\": \"...\", \"analysis\": \"...\"},\n"
    "    {\"name\": \"theory-practice-combination\", \"conclusion\": \"...\", \"analysis\": \"...\"},\n"
    "    {\"name\": \"subject-characteristics\", \"conclusion\": \"...\", \"analysis\": \"...\"}\n"
    "  ]\n"
    "}";

const char* kOptimizationSchema =
    "{\n"
    "  \"summary\": \"<overall suggestions>\",\n"
    "  \"entries\": [\n"
    "    {\"interval_label\": \"<e.g. 11-19 min, rate rising>\", \"behavior\": \"<student behavior>\", "
    "\"content_and_expression\": \"<teaching content and expression forms>\", \"analysis\": \"<what to keep or change>\"}\n"
    "  ]\n"
    "}";

}  // namespace

ChatRequest build_summary_prompt(const std::string& full_corpus, PromptLanguage lang) {
    if (trimmed(full_corpus).empty())
        throw Error(ErrorCategory::Validation, "cannot summarize an empty corpus");
    const PromptLanguage resolved = resolve_language(lang, full_corpus);

    ChatRequest request;
    if (resolved == PromptLanguage::Zh) {
        request.messages.push_back(
            {Role::System, "你是一名经验丰富的课堂教学质量分析专家。请忠实分析,不要虚构内容。"});
        request.messages.push_back(
            {Role::User,
             "请用一段话概括下面的课堂教学转写文本,保留课程结构和关键案例。\n\n教学文本:\n" +
                 full_corpus});
    } else {
        request.messages.push_back(
            {Role::System,
             "You are an experienced classroom-teaching analyst. Stay faithful to the "
             "transcript; never invent content."});
        request.messages.push_back(
            {Role::User,
             "Summarize the following classroom transcript in one paragraph, keeping the "
             "course structure and the key examples.\n\nTranscript:\n" +
                 full_corpus});
    }
    return request;
}

ChatRequest build_evaluation_prompt(const std::string& summary, const std::string& full_corpus,
                                    PromptLanguage lang) {
    if (trimmed(summary).empty())
        throw Error(ErrorCategory::Validation, "evaluation prompt needs a non-empty summary");
    if (trimmed(full_corpus).empty())
        throw Error(ErrorCategory::Validation, "evaluation prompt needs a non-empty corpus");
    const PromptLanguage resolved = resolve_language(lang, full_corpus);

    ChatRequest request;
    std::string user;
    if (resolved == PromptLanguage::Zh) {
        request.messages.push_back(
            {Role::System, "你是一名经验丰富的课堂教学质量分析专家。请忠实分析,不要虚构内容。"});
        user =
            "请从以下五个维度评价这节课:\n"
            "1. content-summary: 本节课讲了什么?请概括课程内容。\n"
            "2. ideological-political-integration: 课程是否自然融入课程思政元素?\n"
            "3. teaching-logic: 课堂教学逻辑是否流畅严谨?\n"
            "4. theory-practice-combination: 课程是否做到理论联系实际?\n"
            "5. subject-characteristics: 教学是否体现学科特色?\n"
            "\n课程概要:\n" +
            summary + "\n\n完整教学文本:\n" + full_corpus +
            "\n\n请只输出一个符合下面结构的 JSON 对象,不要输出其他文字:\n" + kEvaluationSchema;
    } else {
        request.messages.push_back(
            {Role::System,
             "You are an experienced classroom-teaching analyst. Stay faithful to the "
             "transcript; never invent content."});
        user =
            "Evaluate the lesson along these five dimensions:\n"
            "1. content-summary: what does the lesson teach? Summarize the class content.\n"
            "2. ideological-political-integration: does the lesson integrate ideological and "
            "political education naturally into the subject matter?\n"
            "3. teaching-logic: is the teaching logic of the class smooth and rigorous?\n"
            "4. theory-practice-combination: does the class combine theory with practice?\n"
            "5. subject-characteristics: does the teaching reflect the characteristics of the "
            "subject?\n"
            "\nLesson summary:\n" +
            summary + "\n\nFull transcript:\n" + full_corpus +
            "\n\nReply with exactly one JSON object of this shape and nothing else:\n" +
            kEvaluationSchema;
    }
    request.messages.push_back({Role::User, std::move(user)});
    return request;
}

ChatRequest build_optimization_prompt(const std::vector<LabeledCorpus>& labeled,
                                      const std::vector<ContrastPair>& contrasts,
                                      const SessionStats& stats, PromptLanguage lang) {
    if (labeled.empty())
        throw Error(ErrorCategory::Validation, "optimization prompt needs stage corpus data");

    std::string all_text;
    for (const auto& lc : labeled) all_text += lc.text;
    const PromptLanguage resolved = resolve_language(lang, all_text);
    const bool zh = resolved == PromptLanguage::Zh;

    auto stage_sorted = labeled;
    std::sort(stage_sorted.begin(), stage_sorted.end(),
              [](const LabeledCorpus& a, const LabeledCorpus& b) {
                  return a.start_min < b.start_min;
              });
    auto contrast_sorted = contrasts;
    std::sort(contrast_sorted.begin(), contrast_sorted.end(),
              [](const ContrastPair& a, const ContrastPair& b) {
                  return a.change_minute < b.change_minute;
              });

    const std::string ratio_text =
        reported_ratio(stats) ? format2(*reported_ratio(stats)) : (zh ? "无" : "n/a");

    std::string user;
    if (zh) {
        user += "课堂事实:\n";
        user += "- 参与人数: " + std::to_string(stats.participants) + "\n";
        user += "- 每分钟平均抬头人数: " + format2(stats.avg_up_per_min) + "\n";
        user += "- 每分钟平均低头人数: " + format2(stats.avg_down_per_min) + "\n";
        user += "- 抬头低头比: " + ratio_text + "\n";
        user += "- 课堂时长: " + std::to_string(stats.duration_min) + " 分钟\n";
        user += "\n抬头率阶段:\n";
    } else {
        user += "Classroom facts:\n";
        user += "- participants: " + std::to_string(stats.participants) + "\n";
        user += "- average students looking up per minute: " + format2(stats.avg_up_per_min) + "\n";
        user += "- average students bowing their heads per minute: " +
                format2(stats.avg_down_per_min) + "\n";
        user += "- up/down ratio: " + ratio_text + "\n";
        user += "- duration: " + std::to_string(stats.duration_min) + " minutes\n";
        user += "\nHead-up-rate stages:\n";
    }

    for (const auto& lc : stage_sorted) {
        const std::string span =
            std::to_string(lc.start_min) + "-" + std::to_string(lc.end_min);
        if (zh) {
            user += "[阶段] 第 " + span + " 分钟, " +
                    std::string(lc.stage == Stage::High   ? "高"
                                : lc.stage == Stage::Low ? "低"
                                                         : "中") +
                    "抬头率阶段, 平均抬头率 " + percent0(lc.mean_rate) + ":\n";
            user += lc.text.empty() ? "(无语料)\n" : lc.text + "\n";
        } else {
            user += "[stage] minutes " + span + ", " + to_string(lc.stage) +
                    " head-up-rate band, mean rate " + percent0(lc.mean_rate) + ":\n";
            user += lc.text.empty() ? "(no corpus)\n" : lc.text + "\n";
        }
    }

    user += zh ? "\n变化点(前后对照语料):\n" : "\nChange points (contrast windows):\n";
    if (contrast_sorted.empty()) user += zh ? "(无)\n" : "(none)\n";
    for (const auto& cp : contrast_sorted) {
        if (zh) {
            user += "[对照] 第 " + std::to_string(cp.change_minute) + " 分钟, 抬头率" +
                    (cp.polarity == Polarity::Positive ? "上升" : "下降") + " " +
                    format2(cp.magnitude) + " (" +
                    (cp.polarity == Polarity::Positive ? "increase" : "decrease") + "):\n";
            user += "之前:\n" + (cp.before_text.empty() ? "(无)" : cp.before_text) + "\n";
            user += "之后:\n" + (cp.after_text.empty() ? "(无)" : cp.after_text) + "\n";
        } else {
            user += "[contrast] minute " + std::to_string(cp.change_minute) + ", rate " +
                    (cp.polarity == Polarity::Positive ? "increase" : "decrease") + " of " +
                    format2(cp.magnitude) + ":\n";
            user += "before:\n" + (cp.before_text.empty() ? "(none)" : cp.before_text) + "\n";
            user += "after:\n" + (cp.after_text.empty() ? "(none)" : cp.after_text) + "\n";
        }
    }

    if (zh) {
        user +=
            "\n请为每个阶段和每个变化点各写一条优化建议,按时间顺序排列。"
            "请只输出一个符合下面结构的 JSON 对象:\n";
    } else {
        user +=
            "\nWrite one optimization entry per stage and one per change point, ordered by "
            "time. Reply with exactly one JSON object of this shape and nothing else:\n";
    }
    user += kOptimizationSchema;

    ChatRequest request;
    request.messages.push_back(
        {Role::System,
         zh ? "你是一名经验丰富的教学改进顾问。所有建议必须基于给出的课堂证据。"
            : "You are an experienced teaching coach. Ground every suggestion in the "
              "classroom evidence provided."});
    request.messages.push_back({Role::User, std::move(user)});
    return request;
}

// ── Backends ──────────────────────────────────────────────────────

namespace {

// "http://host:port/some/path" -> {"http://host:port", "/some/path"}
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme = endpoint.find("://");
    const auto slash = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

// Walks "choices[0].message.content"-style paths through a JSON reply.
const json* walk_path(const json& root, const std::string& path) {
    const json* cur = &root;
    std::size_t pos = 0;
    while (pos < path.size()) {
        auto dot = path.find('.', pos);
        if (dot == std::string::npos) dot = path.size();
        std::string token = path.substr(pos, dot - pos);
        pos = dot + 1;

        std::vector<std::size_t> indices;
        auto bracket = token.find('[');
        std::string name = token.substr(0, bracket);
        while (bracket != std::string::npos) {
            const auto close = token.find(']', bracket);
            if (close == std::string::npos) return nullptr;
            indices.push_back(std::stoul(token.substr(bracket + 1, close - bracket - 1)));
            bracket = token.find('[', close);
        }

        if (!name.empty()) {
            if (!cur->is_object() || !cur->contains(name)) return nullptr;
            cur = &(*cur)[name];
        }
        for (const auto idx : indices) {
            if (!cur->is_array() || idx >= cur->size()) return nullptr;
            cur = &(*cur)[idx];
        }
    }
    return cur;
}

}  // namespace

HttpLlmBackend::HttpLlmBackend(HttpLlmOptions options) : options_(std::move(options)) {}

std::string HttpLlmBackend::name() const { return "llm@" + options_.endpoint; }

std::string HttpLlmBackend::complete_once(const ChatRequest& request) {
    const auto [base, path] = split_endpoint(options_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(600);

    httplib::Headers headers;
    if (!options_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + options_.api_key);

    const std::string body = request_to_json(request, options_.model).dump();
    auto res = client.Post(path, headers, body, "application/json");
    if (!res)
        throw Error(ErrorCategory::Transport,
                    "LLM endpoint " + options_.endpoint + " unreachable (" +
                        httplib::to_string(res.error()) + ")");
    if (res->status < 200 || res->status >= 300)
        throw Error(ErrorCategory::Backend, "LLM endpoint " + options_.endpoint +
                                                " returned HTTP " + std::to_string(res->status));

    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error&) {
        throw Error(ErrorCategory::Backend,
                    "LLM endpoint " + options_.endpoint + " returned a non-JSON body");
    }
    const json* text = walk_path(reply, options_.response_text_path);
    if (!text || !text->is_string())
        throw Error(ErrorCategory::Backend, "LLM reply has no text at \"" +
                                                options_.response_text_path + "\"");
    return text->get<std::string>();
}

MockLlmBackend::MockLlmBackend(std::filesystem::path fixture_dir)
    : fixture_dir_(std::move(fixture_dir)) {}

std::string MockLlmBackend::name() const { return "mock-llm@" + fixture_dir_.string(); }

std::string MockLlmBackend::complete_once(const ChatRequest& request) {
    const auto try_read = [](const std::filesystem::path& p) -> std::optional<std::string> {
        std::ifstream in(p, std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    if (auto exact = try_read(fixture_dir_ / (request_hash(request) + ".txt"))) return *exact;
    if (auto fallback = try_read(fixture_dir_ / "default.txt")) return *fallback;

    // Built-in schema-valid placeholder, chosen by the schema the prompt
    // asked for.
    std::string text;
    for (const auto& m : request.messages) text += m.content;
    if (text.find("\"entries\"") != std::string::npos) {
        return json{{"summary", "(mock optimization summary)"},
                    {"entries",
                     json::array({json{{"interval_label", "whole session"},
                                       {"behavior", "(mock behavior)"},
                                       {"content_and_expression", "(mock content)"},
                                       {"analysis", "(mock analysis)"}}})}}
            .dump(2);
    }
    if (text.find("\"dimensions\"") != std::string::npos) {
        json dims = json::array();
        for (const auto name : kEvaluationDimensions)
            dims.push_back(json{{"name", std::string(name)},
                                {"conclusion", "(mock conclusion)"},
                                {"analysis", "(mock analysis)"}});
        return json{{"summary", "(mock evaluation summary)"}, {"dimensions", std::move(dims)}}
            .dump(2);
    }
    return "(mock summary of " + std::to_string(text.size()) + " prompt bytes)";
}

std::string complete(const ChatRequest& request, LlmBackend& backend) {
    if (request.messages.empty())
        throw Error(ErrorCategory::Validation, "chat request has no messages");
    try {
        return backend.complete_once(request);
    } catch (const Error& e) {
        if (e.category() != ErrorCategory::Transport) throw;
    }
    return backend.complete_once(request);  // second and final attempt
}

// ── Response parsing ──────────────────────────────────────────────

namespace {

// First balanced {...} run in the text that parses as a JSON object;
// tolerates prose and code fences around it.
std::optional<json> first_json_object(const std::string& raw) {
    for (std::size_t i = raw.find('{'); i != std::string::npos; i = raw.find('{', i + 1)) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t j = i; j < raw.size(); ++j) {
            const char c = raw[j];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    try {
                        json v = json::parse(raw.substr(i, j - i + 1));
                        if (v.is_object()) return v;
                    } catch (const json::parse_error&) {
                    }
                    break;  // balanced but unparseable: try the next '{'
                }
            }
        }
    }
    return std::nullopt;
}

bool string_field(const json& j, const char* key, std::string& out) {
    if (!j.contains(key) || !j[key].is_string()) return false;
    out = j[key].get<std::string>();
    return true;
}

}  // namespace

EvaluationReport parse_evaluation_json(const std::string& raw) {
    const auto degraded = [&](const std::string& why) {
        EvaluationReport r;
        r.summary = raw;
        r.parse_failed = true;
        r.parse_error = why;
        for (const auto name : kEvaluationDimensions)
            r.dimensions.push_back({std::string(name), "", ""});
        return r;
    };

    const auto obj = first_json_object(raw);
    if (!obj) return degraded("no JSON object in reply");

    EvaluationReport report;
    if (!string_field(*obj, "summary", report.summary))
        return degraded("missing string \"summary\"");
    if (!obj->contains("dimensions") || !(*obj)["dimensions"].is_array())
        return degraded("missing \"dimensions\" array");

    std::map<std::string, EvaluationDimension> seen;
    for (const auto& entry : (*obj)["dimensions"]) {
        EvaluationDimension dim;
        if (!entry.is_object() || !string_field(entry, "name", dim.name) ||
            !string_field(entry, "conclusion", dim.conclusion) ||
            !string_field(entry, "analysis", dim.analysis))
            return degraded("dimension entry missing \"name\", \"conclusion\" or \"analysis\"");
        const bool known =
            std::find(kEvaluationDimensions.begin(), kEvaluationDimensions.end(), dim.name) !=
            kEvaluationDimensions.end();
        if (!known) return degraded("unknown dimension \"" + dim.name + "\"");
        if (!seen.emplace(dim.name, dim).second)
            return degraded("duplicate dimension \"" + dim.name + "\"");
    }
    for (const auto name : kEvaluationDimensions)
        if (!seen.count(std::string(name)))
            return degraded("missing dimension \"" + std::string(name) + "\"");

    for (const auto name : kEvaluationDimensions)
        report.dimensions.push_back(seen.at(std::string(name)));
    return report;
}

OptimizationReport parse_optimization_json(const std::string& raw) {
    const auto degraded = [&](const std::string& why) {
        OptimizationReport r;
        r.summary = raw;
        r.parse_failed = true;
        r.parse_error = why;
        return r;
    };

    const auto obj = first_json_object(raw);
    if (!obj) return degraded("no JSON object in reply");

    OptimizationReport report;
    if (!string_field(*obj, "summary", report.summary))
        return degraded("missing string \"summary\"");
    if (!obj->contains("entries") || !(*obj)["entries"].is_array())
        return degraded("missing \"entries\" array");

    for (const auto& entry : (*obj)["entries"]) {
        OptimizationEntry e;
        if (!entry.is_object() || !string_field(entry, "interval_label", e.interval_label) ||
            !string_field(entry, "behavior", e.behavior) ||
            !string_field(entry, "content_and_expression", e.content_and_expression) ||
            !string_field(entry, "analysis", e.analysis))
            return degraded(
                "entry missing \"interval_label\", \"behavior\", \"content_and_expression\" "
                "or \"analysis\"");
        report.entries.push_back(std::move(e));
    }
    return report;
}

// ── Orchestration ─────────────────────────────────────────────────

EvaluationReport evaluate_session(const SessionBundle& bundle, const std::string& full_corpus,
                                  LlmBackend& backend, PromptLanguage lang) {
    const std::string summary = complete(build_summary_prompt(full_corpus, lang), backend);
    if (trimmed(summary).empty())
        throw Error(ErrorCategory::Backend, "summary step returned empty text");

    const std::string raw =
        complete(build_evaluation_prompt(summary, full_corpus, lang), backend);
    EvaluationReport report = parse_evaluation_json(raw);
    report.session_id = bundle.session_id;
    return report;
}

OptimizationReport generate_optimization(const std::vector<LabeledCorpus>& labeled,
                                         const std::vector<ContrastPair>& contrasts,
                                         const SessionStats& stats, LlmBackend& backend,
                                         PromptLanguage lang, const std::string& session_id) {
    const std::string raw =
        complete(build_optimization_prompt(labeled, contrasts, stats, lang), backend);
    OptimizationReport report = parse_optimization_json(raw);
    report.session_id = session_id;
    return report;
}

}  // namespace lecturelens
