#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lecturelens/analytics.hpp"
#include "lecturelens/llm.hpp"
#include "lecturelens/types.hpp"

namespace lecturelens {

/// Analytics parameters echoed into every report, so a report always
/// names the thresholds/delta/window/contrast width that produced it.
struct ConfigEcho {
    AnalyticsConfig analytics;
    std::string prompt_language;  // resolved: "zh" or "en"
    std::string llm_model;
    double temperature = 0.0;
    int max_tokens = 4096;
    bool mock_llm = false;
    bool mock_asr = false;

    bool operator==(const ConfigEcho&) const = default;
};

/// Everything a session run produced, ready to render.
struct ReportBundle {
    std::string session_id;
    SessionMetadata metadata;
    double duration_s = 0.0;
    int participants = 0;
    std::vector<MinuteRate> series;  // gapless, post-interpolation
    std::vector<StageInterval> intervals;
    std::vector<ChangePoint> change_points;
    SessionStats stats;
    std::optional<EvaluationReport> evaluation;     // empty under --skip-llm
    std::optional<OptimizationReport> optimization;
    bool llm_skipped = false;
    ConfigEcho config;

    bool operator==(const ReportBundle&) const = default;
};

/// Static trend chart: minute axis, up/down count lines (gapped where a
/// minute was interpolated), head-up-rate line on a 0..100% right axis,
/// stage bands shaded, change points marked. Deterministic bytes.
std::string render_trend_svg(const std::vector<MinuteRate>& series,
                             const std::vector<ChangePoint>& points,
                             const std::vector<StageInterval>& intervals);

/// Markdown report: stats header, five-row evaluation table, optimization
/// table with one row per entry plus a summary row, config appendix.
/// Degraded LLM reports render as a raw-output block under a visible
/// parse-failure banner.
std::string render_markdown(const ReportBundle& bundle);

/// Canonical JSON: sorted keys, shortest round-trip floats, LF endings.
std::string render_json(const ReportBundle& bundle);

/// Inverse of render_json.
ReportBundle parse_bundle_json(const std::string& text);

}  // namespace lecturelens
