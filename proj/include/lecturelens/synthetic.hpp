#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lecturelens {

/// Piecewise-constant target rate over [start_min, end_min).
struct RateSegment {
    int start_min = 0;
    int end_min = 0;
    double target_rate = 0.5;
};

struct SyntheticProfile {
    int duration_min = 45;
    int students = 35;
    std::vector<RateSegment> segments;  // must partition [0, duration_min)
    double noise_amplitude = 0.0;       // uniform jitter on the target rate
    int frames_per_minute = 12;
    std::uint64_t seed = 0;

    void validate() const;  // throws Error(Config)
};

struct SyntheticSession {
    std::string detections_jsonl;
    std::string transcript_jsonl;
    nlohmann::json truth;  // the exact profile, for oracle checks
};

/// Deterministic session generator. Per frame, the head-up count is a
/// binomial draw over `students` at the segment's jittered target rate;
/// the rest bow their heads. Transcript is one numbered placeholder
/// sentence per minute. Sampling uses raw mt19937_64 draws only, so
/// identical seeds give byte-identical output on every platform.
SyntheticSession generate_synthetic(const SyntheticProfile& profile);

SyntheticProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const SyntheticProfile& profile);

}  // namespace lecturelens
