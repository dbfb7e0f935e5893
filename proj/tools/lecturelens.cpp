#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "lecturelens/error.hpp"
#include "lecturelens/metrics.hpp"
#include "lecturelens/pipeline.hpp"
#include "lecturelens/report.hpp"
#include "lecturelens/run_config.hpp"
#include "lecturelens/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lecturelens;

namespace {

int exit_code_for(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Config:
        case ErrorCategory::Io:
        case ErrorCategory::Parse:
            return 2;
        default:
            return 1;
    }
}

std::string slurp(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCategory::Io,
                    std::string("cannot open ") + what + " file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Io, "cannot write \"" + path.string() + "\"");
    out << bytes;
    if (!out.flush())
        throw Error(ErrorCategory::Io, "cannot write \"" + path.string() + "\"");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCategory::Io, "cannot create output directory \"" +
                                           dir.string() + "\": " + ec.message());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"offline classroom-session analytics"};
    app.require_subcommand(1);

    // ── analyze ───────────────────────────────────────────────────
    auto* analyze =
        app.add_subcommand("analyze", "run the full pipeline on one session");
    std::string config_path;
    analyze->add_option("--config", config_path, "JSON run config file");

    std::string detections, transcript, audio_ref, session_id, out_dir, store_path;
    std::string course, teacher, date;
    std::string asr_endpoint, llm_endpoint, llm_model, llm_api_key, llm_response_path;
    std::string language, mock_llm_dir, mock_asr_file, denominator_mode;
    double duration_s = 0.0, high_threshold = 0.0, low_threshold = 0.0, delta = 0.0;
    int window_w = 0, contrast_k = 0;
    bool skip_llm = false;

    auto* o_detections =
        analyze->add_option("--detections", detections, "detections JSONL");
    auto* o_transcript =
        analyze->add_option("--transcript", transcript, "transcript JSONL");
    auto* o_audio = analyze->add_option("--audio-ref", audio_ref,
                                        "audio locator handed to the ASR backend");
    auto* o_session = analyze->add_option("--session-id", session_id, "session id");
    auto* o_duration =
        analyze->add_option("--duration-s", duration_s, "session length in seconds");
    auto* o_out = analyze->add_option("--out-dir", out_dir, "artifact directory");
    auto* o_store = analyze->add_option("--store", store_path, "teaching store path");
    auto* o_course = analyze->add_option("--course", course, "course name");
    auto* o_teacher = analyze->add_option("--teacher", teacher, "teacher name");
    auto* o_date = analyze->add_option("--date", date, "session date");
    auto* o_asr = analyze->add_option("--asr-endpoint", asr_endpoint, "ASR service URL");
    auto* o_llm = analyze->add_option("--llm-endpoint", llm_endpoint, "LLM service URL");
    auto* o_model = analyze->add_option("--llm-model", llm_model, "chat model name");
    auto* o_key = analyze->add_option("--llm-api-key", llm_api_key, "bearer token");
    auto* o_rpath = analyze->add_option("--llm-response-path", llm_response_path,
                                        "reply text path, e.g. choices[0].message.content");
    auto* o_lang =
        analyze->add_option("--language", language, "prompt language: auto | zh | en");
    auto* o_mock_llm = analyze->add_option("--mock-llm", mock_llm_dir,
                                           "LLM fixture directory (deterministic)");
    auto* o_mock_asr =
        analyze->add_option("--mock-asr", mock_asr_file, "transcript fixture file");
    auto* o_skip = analyze->add_flag("--skip-llm", skip_llm,
                                     "stop after stats, corpora and chart");
    auto* o_denom = analyze->add_option("--denominator-mode", denominator_mode,
                                        "up_plus_down | participants");
    auto* o_high = analyze->add_option("--high-threshold", high_threshold,
                                       "High stage rate threshold");
    auto* o_low =
        analyze->add_option("--low-threshold", low_threshold, "Low stage rate threshold");
    auto* o_window = analyze->add_option("--window-w", window_w,
                                         "change-point window / minimum stage length");
    auto* o_delta = analyze->add_option("--delta", delta, "significant rate change");
    auto* o_k = analyze->add_option("--contrast-k", contrast_k,
                                    "contrast window minutes per side");

    analyze->callback([&] {
        RunConfig cfg;
        if (!config_path.empty()) cfg = run_config_from_file(config_path);
        if (o_detections->count()) cfg.detections_path = detections;
        if (o_transcript->count()) cfg.transcript_path = transcript;
        if (o_audio->count()) cfg.audio_ref = audio_ref;
        if (o_session->count()) cfg.session_id = session_id;
        if (o_duration->count()) cfg.duration_s = duration_s;
        if (o_out->count()) cfg.out_dir = out_dir;
        if (o_store->count()) cfg.store_path = store_path;
        if (o_course->count()) cfg.course = course;
        if (o_teacher->count()) cfg.teacher = teacher;
        if (o_date->count()) cfg.date = date;
        if (o_asr->count()) cfg.asr_endpoint = asr_endpoint;
        if (o_llm->count()) cfg.llm_endpoint = llm_endpoint;
        if (o_model->count()) cfg.llm_model = llm_model;
        if (o_key->count()) cfg.llm_api_key = llm_api_key;
        if (o_rpath->count()) cfg.llm_response_text_path = llm_response_path;
        if (o_lang->count()) cfg.prompt_language = language;
        if (o_mock_llm->count()) cfg.mock_llm_dir = mock_llm_dir;
        if (o_mock_asr->count()) cfg.mock_asr_file = mock_asr_file;
        if (o_skip->count()) cfg.skip_llm = true;
        if (o_denom->count())
            cfg.analytics.denominator_mode =
                denominator_mode_from_string(denominator_mode);
        if (o_high->count()) cfg.analytics.high_threshold = high_threshold;
        if (o_low->count()) cfg.analytics.low_threshold = low_threshold;
        if (o_window->count()) cfg.analytics.window_w = window_w;
        if (o_delta->count()) cfg.analytics.delta = delta;
        if (o_k->count()) cfg.analytics.contrast_k = contrast_k;
        apply_environment(cfg);

        const RunResult result = run_analysis(cfg);
        std::cout << "session " << result.bundle.session_id << ": "
                  << result.bundle.stats.duration_min << " min, "
                  << result.bundle.participants << " participants, "
                  << result.bundle.intervals.size() << " stages, "
                  << result.bundle.change_points.size() << " change points\n"
                  << "persisted " << result.records_persisted << " new records\n"
                  << "wrote " << result.report_md.string() << ", "
                  << result.report_json.string() << ", "
                  << result.trend_svg.string() << "\n";
    });

    // ── metrics ───────────────────────────────────────────────────
    auto* metrics = app.add_subcommand(
        "metrics", "evaluate detector predictions against ground truth");
    std::string pred_path, gt_path, variant_name = "all-point";
    double iou_threshold = 0.5;
    metrics->add_option("--pred", pred_path, "predictions JSONL")->required();
    metrics->add_option("--gt", gt_path, "ground-truth JSONL")->required();
    metrics->add_option("--iou", iou_threshold, "IoU match threshold")
        ->capture_default_str();
    metrics->add_option("--variant", variant_name, "all-point | 11-point | 101-point")
        ->capture_default_str();

    metrics->callback([&] {
        const ApVariant variant = ap_variant_from_string(variant_name);
        std::istringstream pred_stream(slurp(pred_path, "predictions"));
        std::istringstream gt_stream(slurp(gt_path, "ground-truth"));
        const auto preds = parse_predictions(pred_stream);
        const auto gts = parse_ground_truth(gt_stream);
        const MetricsSummary summary =
            mean_average_precision(preds, gts, iou_threshold, variant);

        std::printf("%-10s %10s %8s\n", "category", "AP", "n_gt");
        for (const auto& [category, n] : summary.n_gt) {
            const auto it = summary.per_category_ap.find(category);
            if (it != summary.per_category_ap.end())
                std::printf("%-10s %10.4f %8d\n", to_string(category), it->second, n);
            else
                std::printf("%-10s %10s %8d\n", to_string(category), "-", n);
        }
        std::printf("mAP %.4f (%s, IoU %.2f)\n", summary.map, to_string(variant),
                    iou_threshold);

        nlohmann::json per_ap = nlohmann::json::object();
        nlohmann::json per_n = nlohmann::json::object();
        for (const auto& [category, ap] : summary.per_category_ap)
            per_ap[to_string(category)] = ap;
        for (const auto& [category, n] : summary.n_gt) per_n[to_string(category)] = n;
        const nlohmann::json j{{"iou_threshold", iou_threshold},
                               {"map", summary.map},
                               {"n_gt", std::move(per_n)},
                               {"per_category_ap", std::move(per_ap)},
                               {"variant", to_string(variant)}};
        std::cout << j.dump(2) << "\n";
    });

    // ── simulate ──────────────────────────────────────────────────
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic session");
    std::string profile_path, sim_out;
    std::uint64_t seed = 0;
    simulate->add_option("--profile", profile_path, "SyntheticProfile JSON file")
        ->required();
    simulate->add_option("--out", sim_out, "output directory")->required();
    auto* o_seed = simulate->add_option("--seed", seed, "override the profile seed");

    simulate->callback([&] {
        const auto j = nlohmann::json::parse(slurp(profile_path, "profile"),
                                             nullptr, false);
        if (j.is_discarded())
            throw Error(ErrorCategory::Parse,
                        "profile file \"" + profile_path + "\" is not JSON");
        SyntheticProfile profile = profile_from_json(j);
        if (o_seed->count()) profile.seed = seed;

        const SyntheticSession session = generate_synthetic(profile);
        ensure_dir(sim_out);
        spill(fs::path(sim_out) / "detections.jsonl", session.detections_jsonl);
        spill(fs::path(sim_out) / "transcript.jsonl", session.transcript_jsonl);
        spill(fs::path(sim_out) / "truth.json", session.truth.dump(2) + "\n");
        std::cout << "wrote detections.jsonl, transcript.jsonl, truth.json under "
                  << sim_out << "\n";
    });

    // ── report ────────────────────────────────────────────────────
    auto* rerender =
        app.add_subcommand("report", "re-render artifacts from a stored report.json");
    std::string from_path, report_out = ".";
    rerender->add_option("--from", from_path, "report.json produced by analyze")
        ->required();
    rerender->add_option("--out-dir", report_out, "artifact directory")
        ->capture_default_str();

    rerender->callback([&] {
        const ReportBundle bundle = parse_bundle_json(slurp(from_path, "report"));
        ensure_dir(report_out);
        spill(fs::path(report_out) / "report.md", render_markdown(bundle));
        spill(fs::path(report_out) / "report.json", render_json(bundle));
        spill(fs::path(report_out) / "trend.svg",
              render_trend_svg(bundle.series, bundle.change_points, bundle.intervals));
        std::cout << "re-rendered report.md, report.json, trend.svg under "
                  << report_out << "\n";
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.category()) << "): " << e.what() << "\n";
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
