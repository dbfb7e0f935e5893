#pragma once

#include <cstddef>
#include <filesystem>

#include "lecturelens/report.hpp"
#include "lecturelens/run_config.hpp"

namespace lecturelens {

struct RunResult {
    ReportBundle bundle;
    std::filesystem::path report_md;
    std::filesystem::path report_json;
    std::filesystem::path trend_svg;
    std::size_t records_persisted = 0;
};

/// One full session run: ingest -> analytics -> corpus mapping -> LLM
/// evaluation and optimization (concurrently, unless skip_llm) -> persist
/// to the teaching store -> render report.md / report.json / trend.svg
/// under out_dir. Deterministic with mock backends.
RunResult run_analysis(const RunConfig& config);

}  // namespace lecturelens
