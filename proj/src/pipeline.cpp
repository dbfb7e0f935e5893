#include "lecturelens/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>
#include <vector>

#include "lecturelens/analytics.hpp"
#include "lecturelens/corpus.hpp"
#include "lecturelens/error.hpp"
#include "lecturelens/ingest.hpp"
#include "lecturelens/llm.hpp"
#include "lecturelens/store.hpp"

namespace lecturelens {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCategory::Io, std::string("cannot open ") + what + " file \"" +
                                           path.string() + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCategory::Io, "cannot write \"" + path.string() + "\"");
    out << bytes;
    if (!out.flush())
        throw Error(ErrorCategory::Io, "cannot write \"" + path.string() + "\"");
}

std::vector<TranscriptSegment> load_transcript(const RunConfig& config) {
    if (!config.transcript_path.empty())
        return parse_transcript(read_file(config.transcript_path, "transcript"));
    std::unique_ptr<AsrBackend> backend;
    if (!config.mock_asr_file.empty())
        backend = std::make_unique<FileReplayAsrBackend>(config.mock_asr_file);
    else
        backend = std::make_unique<HttpAsrBackend>(config.asr_endpoint);
    return transcribe(config.audio_ref, *backend);
}

double infer_duration(const std::vector<DetectionFrame>& frames,
                      const std::vector<TranscriptSegment>& segments) {
    double d = 0.0;
    for (const auto& f : frames) d = std::max(d, f.timestamp_s);
    for (const auto& s : segments) d = std::max(d, s.end_s);
    return d;
}

json stage_payload(const LabeledCorpus& lc) {
    return json{{"end_min", lc.end_min},
                {"mean_rate", lc.mean_rate},
                {"stage", to_string(lc.stage)},
                {"start_min", lc.start_min},
                {"text", lc.text}};
}

json contrast_payload(const ContrastPair& cp) {
    return json{{"after", cp.after_text},
                {"before", cp.before_text},
                {"change_minute", cp.change_minute},
                {"magnitude", cp.magnitude},
                {"polarity", to_string(cp.polarity)}};
}

json stats_payload(const SessionStats& stats) {
    return json{{"avg_down_per_min", stats.avg_down_per_min},
                {"avg_up_per_min", stats.avg_up_per_min},
                {"duration_min", stats.duration_min},
                {"participants", stats.participants},
                {"up_down_ratio", stats.up_down_ratio
                                      ? json(*stats.up_down_ratio)
                                      : json(nullptr)}};
}

}  // namespace

RunResult run_analysis(const RunConfig& config) {
    config.validate();

    // ── ingest ────────────────────────────────────────────────────
    const auto frames =
        parse_detections(read_file(config.detections_path, "detections"));
    const auto segments = load_transcript(config);
    const double duration =
        config.duration_s > 0.0 ? config.duration_s : infer_duration(frames, segments);
    const SessionBundle session =
        validate_session(frames, segments, duration,
                         {config.course, config.teacher, config.date},
                         config.session_id);

    // ── analytics ─────────────────────────────────────────────────
    const int participants = estimate_participants(session.frames);
    std::vector<RecognitionRate> rates;
    rates.reserve(session.frames.size());
    for (const auto& frame : session.frames) {
        if (frame.boxes.empty()) continue;  // nothing recognized at that instant
        rates.push_back(
            frame_rate(frame, config.analytics.denominator_mode, participants));
    }
    if (rates.empty())
        throw Error(ErrorCategory::Analysis, "no frame in the session has any detection");
    const auto series = interpolate_missing(minute_series(rates, session.duration_s));
    const SessionStats stats = session_stats(series, participants);
    const auto intervals = segment_stages(series, config.analytics);
    const auto points = detect_change_points(series, config.analytics);

    // ── corpus mapping ────────────────────────────────────────────
    const auto minutes = bucket_by_minute(session.segments, session.duration_s);
    const auto labeled = label_by_stage(minutes, intervals);
    const auto contrasts = extract_contrast(minutes, points, config.analytics.contrast_k);

    std::string full_corpus;
    for (const auto& mc : minutes) {
        if (mc.text.empty()) continue;
        if (!full_corpus.empty()) full_corpus += "\n";
        full_corpus += mc.text;
    }

    // ── LLM evaluation and optimization (the only concurrent pair) ─
    ReportBundle bundle;
    bundle.session_id = session.session_id;
    bundle.metadata = session.metadata;
    bundle.duration_s = session.duration_s;
    bundle.participants = participants;
    bundle.series = series;
    bundle.intervals = intervals;
    bundle.change_points = points;
    bundle.stats = stats;
    bundle.llm_skipped = config.skip_llm;

    const PromptLanguage requested =
        prompt_language_from_string(config.prompt_language);
    bundle.config.analytics = config.analytics;
    bundle.config.prompt_language =
        to_string(resolve_language(requested, full_corpus));
    bundle.config.llm_model = config.llm_model;
    bundle.config.mock_llm = !config.mock_llm_dir.empty();
    bundle.config.mock_asr = !config.mock_asr_file.empty();

    if (!config.skip_llm) {
        std::unique_ptr<LlmBackend> backend;
        if (!config.mock_llm_dir.empty()) {
            backend = std::make_unique<MockLlmBackend>(config.mock_llm_dir);
        } else {
            HttpLlmOptions options;
            options.endpoint = config.llm_endpoint;
            options.model = config.llm_model;
            options.api_key = config.llm_api_key;
            options.response_text_path = config.llm_response_text_path;
            backend = std::make_unique<HttpLlmBackend>(options);
        }
        auto evaluation = std::async(std::launch::async, [&] {
            return evaluate_session(session, full_corpus, *backend, requested);
        });
        auto optimization = std::async(std::launch::async, [&] {
            return generate_optimization(labeled, contrasts, stats, *backend, requested,
                                         session.session_id);
        });
        bundle.evaluation = evaluation.get();
        bundle.optimization = optimization.get();
    }

    // ── persist ───────────────────────────────────────────────────
    std::vector<TeachingRecord> records;
    for (const auto& lc : labeled)
        records.push_back({session.session_id, RecordKind::StageCorpus,
                           stage_payload(lc), ""});
    for (const auto& cp : contrasts)
        records.push_back({session.session_id, RecordKind::ContrastCorpus,
                           contrast_payload(cp), ""});
    records.push_back({session.session_id, RecordKind::Stats, stats_payload(stats), ""});

    const std::string report_json_text = render_json(bundle);
    records.push_back({session.session_id, RecordKind::Report,
                       json::parse(report_json_text), ""});

    const std::filesystem::path out_dir(config.out_dir);
    const std::filesystem::path store_path = config.resolved_store_path();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!ec && store_path.has_parent_path())
        std::filesystem::create_directories(store_path.parent_path(), ec);
    if (ec)
        throw Error(ErrorCategory::Io, "cannot create output directory \"" +
                                           out_dir.string() + "\": " + ec.message());

    TeachingStore store(store_path);
    RunResult result;
    result.bundle = bundle;
    result.records_persisted = store.persist(records);

    // ── render ────────────────────────────────────────────────────
    result.report_md = out_dir / "report.md";
    result.report_json = out_dir / "report.json";
    result.trend_svg = out_dir / "trend.svg";
    write_file(result.report_md, render_markdown(bundle));
    write_file(result.report_json, report_json_text);
    write_file(result.trend_svg, render_trend_svg(series, points, intervals));
    return result;
}

}  // namespace lecturelens
