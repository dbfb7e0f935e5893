#include "lecturelens/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "lecturelens/error.hpp"

namespace lecturelens {
namespace {

using nlohmann::json;

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string percent0(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f%%", rate * 100.0);
    return buf;
}

// ── SVG ───────────────────────────────────────────────────────────

struct Scale {
    double x0, x1, y0, y1;  // plot box, y grows downward
    int n = 1;              // minutes
    double count_max = 5.0;

    // minute m occupies the cell [cell(m), cell(m+1)); points sit at centers
    double cell(int m) const { return x0 + (x1 - x0) * m / n; }
    double center(int m) const { return x0 + (x1 - x0) * (m + 0.5) / n; }
    double y_count(double c) const { return y1 - (y1 - y0) * c / count_max; }
    double y_rate(double r) const { return y1 - (y1 - y0) * r; }
};

void append_line(std::string& out, double x1, double y1, double x2, double y2) {
    out += "    <line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) +
           "\" y2=\"" + fmt2(y2) + "\"/>\n";
}

void append_text(std::string& out, double x, double y, const char* anchor,
                 const std::string& body) {
    out += "    <text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" text-anchor=\"" + anchor +
           "\">" + body + "</text>\n";
}

/// One polyline per run of minutes that carry a value; gaps split runs.
void append_count_runs(std::string& out, const std::vector<MinuteRate>& series,
                       const Scale& sc, bool up, const char* color) {
    out += std::string("  <g id=\"") + (up ? "up-counts" : "down-counts") +
           "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\">\n";
    std::string pts;
    const auto flush = [&] {
        if (!pts.empty()) out += "    <polyline points=\"" + pts + "\"/>\n";
        pts.clear();
    };
    for (const auto& mr : series) {
        const auto& v = up ? mr.up_avg : mr.down_avg;
        if (!v) {
            flush();
            continue;
        }
        if (!pts.empty()) pts += " ";
        pts += fmt2(sc.center(mr.minute_index)) + "," + fmt2(sc.y_count(*v));
    }
    flush();
    out += "  </g>\n";
}

// ── Markdown ──────────────────────────────────────────────────────

/// Table cells must not break the row grid.
std::string cell(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        if (c == '\r') continue;
        if (c == '\n') {
            out += "<br>";
        } else if (c == '|') {
            out += "\\|";
        } else {
            out += c;
        }
    }
    return out;
}

/// Fence length beats any backtick run inside the raw text.
std::string fenced_block(const std::string& raw) {
    std::size_t longest = 0, run = 0;
    for (const char c : raw) {
        run = c == '`' ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    const std::string fence(std::max<std::size_t>(3, longest + 1), '`');
    std::string out = fence + "text\n" + raw;
    if (out.back() != '\n') out += "\n";
    return out + fence + "\n";
}

// ── JSON ──────────────────────────────────────────────────────────

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json evaluation_to_json(const EvaluationReport& r) {
    json dims = json::array();
    for (const auto& d : r.dimensions)
        dims.push_back(json{{"analysis", d.analysis},
                            {"conclusion", d.conclusion},
                            {"name", d.name}});
    return json{{"dimensions", std::move(dims)}, {"parse_error", r.parse_error},
                {"parse_failed", r.parse_failed}, {"session_id", r.session_id},
                {"summary", r.summary}};
}

EvaluationReport evaluation_from_json(const json& j) {
    EvaluationReport r;
    r.session_id = j.at("session_id").get<std::string>();
    r.summary = j.at("summary").get<std::string>();
    r.parse_failed = j.at("parse_failed").get<bool>();
    r.parse_error = j.at("parse_error").get<std::string>();
    for (const auto& d : j.at("dimensions"))
        r.dimensions.push_back({d.at("name").get<std::string>(),
                                d.at("conclusion").get<std::string>(),
                                d.at("analysis").get<std::string>()});
    return r;
}

json optimization_to_json(const OptimizationReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back(json{{"analysis", e.analysis},
                               {"behavior", e.behavior},
                               {"content_and_expression", e.content_and_expression},
                               {"interval_label", e.interval_label}});
    return json{{"entries", std::move(entries)}, {"parse_error", r.parse_error},
                {"parse_failed", r.parse_failed}, {"session_id", r.session_id},
                {"summary", r.summary}};
}

OptimizationReport optimization_from_json(const json& j) {
    OptimizationReport r;
    r.session_id = j.at("session_id").get<std::string>();
    r.summary = j.at("summary").get<std::string>();
    r.parse_failed = j.at("parse_failed").get<bool>();
    r.parse_error = j.at("parse_error").get<std::string>();
    for (const auto& e : j.at("entries"))
        r.entries.push_back({e.at("interval_label").get<std::string>(),
                             e.at("behavior").get<std::string>(),
                             e.at("content_and_expression").get<std::string>(),
                             e.at("analysis").get<std::string>()});
    return r;
}

}  // namespace

std::string render_trend_svg(const std::vector<MinuteRate>& series,
                             const std::vector<ChangePoint>& points,
                             const std::vector<StageInterval>& intervals) {
    if (series.empty())
        throw Error(ErrorCategory::Validation,
                    "cannot render a trend chart from an empty series");

    Scale sc;
    sc.x0 = 56.0;
    sc.x1 = 844.0;
    sc.y0 = 48.0;
    sc.y1 = 390.0;
    sc.n = static_cast<int>(series.size());
    double raw_max = 0.0;
    for (const auto& mr : series) {
        if (mr.up_avg) raw_max = std::max(raw_max, *mr.up_avg);
        if (mr.down_avg) raw_max = std::max(raw_max, *mr.down_avg);
    }
    sc.count_max = std::max(5.0, std::ceil(raw_max / 5.0) * 5.0);

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"430\" "
         "viewBox=\"0 0 900 430\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "  <rect x=\"0\" y=\"0\" width=\"900\" height=\"430\" fill=\"#ffffff\"/>\n";

    s += "  <g id=\"stage-bands\">\n";
    for (const auto& iv : intervals) {
        const char* fill = iv.stage == Stage::High  ? "#e3f1e3"
                           : iv.stage == Stage::Low ? "#f7e2e2"
                                                    : "#faf3dc";
        s += "    <rect x=\"" + fmt2(sc.cell(iv.start_min)) + "\" y=\"" + fmt2(sc.y0) +
             "\" width=\"" + fmt2(sc.cell(iv.end_min) - sc.cell(iv.start_min)) +
             "\" height=\"" + fmt2(sc.y1 - sc.y0) + "\" fill=\"" + fill + "\"/>\n";
    }
    s += "  </g>\n";

    s += "  <g id=\"axes\" stroke=\"#333333\" stroke-width=\"1\">\n";
    append_line(s, sc.x0, sc.y0, sc.x0, sc.y1);
    append_line(s, sc.x0, sc.y1, sc.x1, sc.y1);
    append_line(s, sc.x1, sc.y0, sc.x1, sc.y1);
    s += "  </g>\n";

    s += "  <g id=\"labels\" fill=\"#333333\">\n";
    for (int m = 0; m < sc.n; m += 5)
        append_text(s, sc.center(m), sc.y1 + 16.0, "middle", std::to_string(m));
    append_text(s, (sc.x0 + sc.x1) / 2.0, sc.y1 + 32.0, "middle", "minute");
    for (int i = 0; i <= 5; ++i) {
        const double c = sc.count_max * i / 5.0;
        append_text(s, sc.x0 - 6.0, sc.y_count(c) + 4.0, "end", fmt2(c));
    }
    for (int p = 0; p <= 100; p += 25)
        append_text(s, sc.x1 + 6.0, sc.y_rate(p / 100.0) + 4.0, "start",
                    std::to_string(p) + "%");
    append_text(s, sc.x0, sc.y0 - 28.0, "start", "students (count)");
    append_text(s, sc.x1, sc.y0 - 28.0, "end", "head-up rate (%)");
    s += "  </g>\n";

    append_count_runs(s, series, sc, true, "#2b7bba");
    append_count_runs(s, series, sc, false, "#c0504d");

    s += "  <g id=\"rate\" fill=\"none\" stroke=\"#2e8b57\" stroke-width=\"2\">\n";
    std::string pts;
    for (const auto& mr : series) {
        if (!mr.rate) continue;
        if (!pts.empty()) pts += " ";
        pts += fmt2(sc.center(mr.minute_index)) + "," + fmt2(sc.y_rate(*mr.rate));
    }
    s += "    <polyline points=\"" + pts + "\"/>\n";
    s += "  </g>\n";

    s += "  <g id=\"change-points\" stroke=\"#555555\" stroke-dasharray=\"4 3\">\n";
    for (const auto& cp : points)
        append_line(s, sc.cell(cp.minute), sc.y0, sc.cell(cp.minute), sc.y1);
    s += "  </g>\n";
    s += "  <g id=\"change-labels\" fill=\"#555555\">\n";
    for (const auto& cp : points)
        append_text(s, sc.cell(cp.minute), sc.y0 - 6.0, "middle",
                    (cp.direction == Direction::Increase ? "+" : "-") + fmt2(cp.magnitude));
    s += "  </g>\n";

    s += "  <g id=\"legend\">\n";
    s += "    <line x1=\"56.00\" y1=\"24.00\" x2=\"80.00\" y2=\"24.00\" stroke=\"#2b7bba\" "
         "stroke-width=\"1.5\"/>\n";
    append_text(s, 84.0, 28.0, "start", "heads up (count)");
    s += "    <line x1=\"210.00\" y1=\"24.00\" x2=\"234.00\" y2=\"24.00\" stroke=\"#c0504d\" "
         "stroke-width=\"1.5\"/>\n";
    append_text(s, 238.0, 28.0, "start", "heads down (count)");
    s += "    <line x1=\"380.00\" y1=\"24.00\" x2=\"404.00\" y2=\"24.00\" stroke=\"#2e8b57\" "
         "stroke-width=\"2\"/>\n";
    append_text(s, 408.0, 28.0, "start", "head-up rate");
    s += "  </g>\n";
    s += "</svg>\n";
    return s;
}

std::string render_markdown(const ReportBundle& b) {
    const bool zh = b.config.prompt_language == "zh";
    std::string md;
    md += std::string("# ") + (zh ? "课堂评价报告: " : "Session report: ") + b.session_id +
          "\n\n";

    const auto bullet = [&md](const std::string& label, const std::string& value) {
        md += "- " + label + ": " + value + "\n";
    };
    if (!b.metadata.course.empty()) bullet(zh ? "课程" : "Course", b.metadata.course);
    if (!b.metadata.teacher.empty()) bullet(zh ? "教师" : "Teacher", b.metadata.teacher);
    if (!b.metadata.date.empty()) bullet(zh ? "日期" : "Date", b.metadata.date);
    bullet(zh ? "时长" : "Duration",
           std::to_string(b.stats.duration_min) + (zh ? " 分钟" : " minutes"));
    bullet(zh ? "参与人数" : "Participants", std::to_string(b.stats.participants));
    bullet(zh ? "每分钟平均抬头人数" : "Average heads up per minute",
           fmt2(b.stats.avg_up_per_min));
    bullet(zh ? "每分钟平均低头人数" : "Average heads down per minute",
           fmt2(b.stats.avg_down_per_min));
    const auto ratio = reported_ratio(b.stats);
    bullet(zh ? "抬头低头比" : "Up/down ratio", ratio ? fmt2(*ratio) : "n/a");

    md += zh ? "\n## 抬头率阶段\n\n" : "\n## Head-up-rate stages\n\n";
    md += zh ? "| 时间段 | 阶段 | 平均抬头率 |\n" : "| Minutes | Stage | Mean rate |\n";
    md += "| --- | --- | --- |\n";
    for (const auto& iv : b.intervals)
        md += "| " + std::to_string(iv.start_min) + "-" + std::to_string(iv.end_min) +
              " | " + to_string(iv.stage) + " | " + percent0(iv.mean_rate) + " |\n";

    md += zh ? "\n## 变化点\n\n" : "\n## Change points\n\n";
    if (b.change_points.empty()) {
        md += zh ? "(无)\n" : "(none)\n";
    } else {
        md += zh ? "| 分钟 | 方向 | 幅度 |\n" : "| Minute | Direction | Magnitude |\n";
        md += "| --- | --- | --- |\n";
        for (const auto& cp : b.change_points)
            md += "| " + std::to_string(cp.minute) + " | " + to_string(cp.direction) +
                  " | " + fmt2(cp.magnitude) + " |\n";
    }

    md += zh ? "\n## 课程评价\n\n" : "\n## Lesson evaluation\n\n";
    if (b.llm_skipped || !b.evaluation) {
        md += zh ? "_已跳过 LLM 评价步骤 (--skip-llm)。_\n"
                 : "_LLM evaluation step skipped (--skip-llm)._\n";
    } else if (b.evaluation->parse_failed) {
        md += std::string("> **") +
              (zh ? "LLM 回复无法解析" : "LLM reply could not be parsed") + ":** " +
              cell(b.evaluation->parse_error) + "\n\n";
        md += fenced_block(b.evaluation->summary);
    } else {
        md += b.evaluation->summary + "\n\n";
        md += zh ? "| 评价维度 | 评价结论 | 评价分析 |\n"
                 : "| Evaluation Dimension | Conclusion | Analysis |\n";
        md += "| --- | --- | --- |\n";
        for (const auto& d : b.evaluation->dimensions)
            md += "| " + cell(d.name) + " | " + cell(d.conclusion) + " | " +
                  cell(d.analysis) + " |\n";
    }

    md += zh ? "\n## 优化建议\n\n" : "\n## Optimization suggestions\n\n";
    if (b.llm_skipped || !b.optimization) {
        md += zh ? "_已跳过 LLM 优化建议步骤 (--skip-llm)。_\n"
                 : "_LLM optimization step skipped (--skip-llm)._\n";
    } else if (b.optimization->parse_failed) {
        md += std::string("> **") +
              (zh ? "LLM 回复无法解析" : "LLM reply could not be parsed") + ":** " +
              cell(b.optimization->parse_error) + "\n\n";
        md += fenced_block(b.optimization->summary);
    } else {
        md += zh ? "| 时间区间 | 学生行为 | 授课内容与表达 | 分析 |\n"
                 : "| Interval | Student Behavior | Content and Expression | Analysis |\n";
        md += "| --- | --- | --- | --- |\n";
        for (const auto& e : b.optimization->entries)
            md += "| " + cell(e.interval_label) + " | " + cell(e.behavior) + " | " +
                  cell(e.content_and_expression) + " | " + cell(e.analysis) + " |\n";
        md += std::string("| ") + (zh ? "总结" : "Summary") + " |  |  | " +
              cell(b.optimization->summary) + " |\n";
    }

    md += zh ? "\n## 参数配置\n\n| 参数 | 值 |\n" : "\n## Configuration\n\n| Parameter | Value |\n";
    md += "| --- | --- |\n";
    const auto row = [&md](const std::string& k, const std::string& v) {
        md += "| " + k + " | " + v + " |\n";
    };
    row("denominator_mode", to_string(b.config.analytics.denominator_mode));
    row("high_threshold", fmt2(b.config.analytics.high_threshold));
    row("low_threshold", fmt2(b.config.analytics.low_threshold));
    row("window_w", std::to_string(b.config.analytics.window_w));
    row("delta", fmt2(b.config.analytics.delta));
    row("contrast_k", std::to_string(b.config.analytics.contrast_k));
    row("prompt_language", b.config.prompt_language);
    row("llm_model", cell(b.config.llm_model));
    row("temperature", fmt2(b.config.temperature));
    row("max_tokens", std::to_string(b.config.max_tokens));
    row("mock_llm", b.config.mock_llm ? "true" : "false");
    row("mock_asr", b.config.mock_asr ? "true" : "false");
    return md;
}

std::string render_json(const ReportBundle& b) {
    json series = json::array();
    for (const auto& mr : b.series)
        series.push_back(json{{"down_avg", opt_json(mr.down_avg)},
                              {"interpolated", mr.interpolated},
                              {"minute_index", mr.minute_index},
                              {"n_frames", mr.n_frames},
                              {"rate", opt_json(mr.rate)},
                              {"up_avg", opt_json(mr.up_avg)}});
    json intervals = json::array();
    for (const auto& iv : b.intervals)
        intervals.push_back(json{{"end_min", iv.end_min},
                                 {"mean_rate", iv.mean_rate},
                                 {"stage", to_string(iv.stage)},
                                 {"start_min", iv.start_min}});
    json change_points = json::array();
    for (const auto& cp : b.change_points)
        change_points.push_back(json{{"direction", to_string(cp.direction)},
                                     {"magnitude", cp.magnitude},
                                     {"minute", cp.minute}});
    const json stats{{"avg_down_per_min", b.stats.avg_down_per_min},
                     {"avg_up_per_min", b.stats.avg_up_per_min},
                     {"duration_min", b.stats.duration_min},
                     {"participants", b.stats.participants},
                     {"up_down_ratio", opt_json(b.stats.up_down_ratio)}};
    const json config{{"analytics",
                       json{{"contrast_k", b.config.analytics.contrast_k},
                            {"delta", b.config.analytics.delta},
                            {"denominator_mode",
                             to_string(b.config.analytics.denominator_mode)},
                            {"high_threshold", b.config.analytics.high_threshold},
                            {"low_threshold", b.config.analytics.low_threshold},
                            {"window_w", b.config.analytics.window_w}}},
                      {"llm_model", b.config.llm_model},
                      {"max_tokens", b.config.max_tokens},
                      {"mock_asr", b.config.mock_asr},
                      {"mock_llm", b.config.mock_llm},
                      {"prompt_language", b.config.prompt_language},
                      {"temperature", b.config.temperature}};

    const json j{{"change_points", std::move(change_points)},
                 {"config", config},
                 {"duration_s", b.duration_s},
                 {"evaluation",
                  b.evaluation ? evaluation_to_json(*b.evaluation) : json(nullptr)},
                 {"intervals", std::move(intervals)},
                 {"llm_skipped", b.llm_skipped},
                 {"metadata", json{{"course", b.metadata.course},
                                   {"date", b.metadata.date},
                                   {"teacher", b.metadata.teacher}}},
                 {"optimization",
                  b.optimization ? optimization_to_json(*b.optimization) : json(nullptr)},
                 {"participants", b.participants},
                 {"series", std::move(series)},
                 {"session_id", b.session_id},
                 {"stats", stats}};
    return j.dump(2) + "\n";
}

ReportBundle parse_bundle_json(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCategory::Parse, "report bundle is not a JSON object");
    try {
        ReportBundle b;
        b.session_id = j.at("session_id").get<std::string>();
        const json& meta = j.at("metadata");
        b.metadata.course = meta.at("course").get<std::string>();
        b.metadata.teacher = meta.at("teacher").get<std::string>();
        b.metadata.date = meta.at("date").get<std::string>();
        b.duration_s = j.at("duration_s").get<double>();
        b.participants = j.at("participants").get<int>();
        for (const json& e : j.at("series")) {
            MinuteRate mr;
            mr.minute_index = e.at("minute_index").get<int>();
            mr.rate = opt_double(e.at("rate"));
            mr.up_avg = opt_double(e.at("up_avg"));
            mr.down_avg = opt_double(e.at("down_avg"));
            mr.n_frames = e.at("n_frames").get<int>();
            mr.interpolated = e.at("interpolated").get<bool>();
            b.series.push_back(mr);
        }
        for (const json& e : j.at("intervals"))
            b.intervals.push_back({e.at("start_min").get<int>(),
                                   e.at("end_min").get<int>(),
                                   stage_from_string(e.at("stage").get<std::string>()),
                                   e.at("mean_rate").get<double>()});
        for (const json& e : j.at("change_points"))
            b.change_points.push_back(
                {e.at("minute").get<int>(),
                 direction_from_string(e.at("direction").get<std::string>()),
                 e.at("magnitude").get<double>()});
        const json& st = j.at("stats");
        b.stats.participants = st.at("participants").get<int>();
        b.stats.avg_up_per_min = st.at("avg_up_per_min").get<double>();
        b.stats.avg_down_per_min = st.at("avg_down_per_min").get<double>();
        b.stats.up_down_ratio = opt_double(st.at("up_down_ratio"));
        b.stats.duration_min = st.at("duration_min").get<int>();
        if (!j.at("evaluation").is_null())
            b.evaluation = evaluation_from_json(j.at("evaluation"));
        if (!j.at("optimization").is_null())
            b.optimization = optimization_from_json(j.at("optimization"));
        b.llm_skipped = j.at("llm_skipped").get<bool>();
        const json& cfg = j.at("config");
        const json& an = cfg.at("analytics");
        b.config.analytics.denominator_mode =
            denominator_mode_from_string(an.at("denominator_mode").get<std::string>());
        b.config.analytics.high_threshold = an.at("high_threshold").get<double>();
        b.config.analytics.low_threshold = an.at("low_threshold").get<double>();
        b.config.analytics.window_w = an.at("window_w").get<int>();
        b.config.analytics.delta = an.at("delta").get<double>();
        b.config.analytics.contrast_k = an.at("contrast_k").get<int>();
        b.config.prompt_language = cfg.at("prompt_language").get<std::string>();
        b.config.llm_model = cfg.at("llm_model").get<std::string>();
        b.config.temperature = cfg.at("temperature").get<double>();
        b.config.max_tokens = cfg.at("max_tokens").get<int>();
        b.config.mock_llm = cfg.at("mock_llm").get<bool>();
        b.config.mock_asr = cfg.at("mock_asr").get<bool>();
        return b;
    } catch (const json::exception& e) {
        throw Error(ErrorCategory::Parse, std::string("bad report bundle: ") + e.what());
    }
}

}  // namespace lecturelens
