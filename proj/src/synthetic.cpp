#include "lecturelens/synthetic.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include "lecturelens/error.hpp"
#include "lecturelens/ingest.hpp"
#include "lecturelens/types.hpp"

namespace lecturelens {
namespace {

using nlohmann::json;

/// mt19937_64 raw draws only: distribution classes differ across standard
/// libraries, raw engine output does not.
double next_uniform(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1)
}

constexpr const char* kProfileKeys[] = {"duration_min",    "frames_per_minute",
                                        "noise_amplitude", "seed",
                                        "segments",        "students"};
constexpr const char* kSegmentKeys[] = {"end_min", "start_min", "target_rate"};

bool known_key(const std::string& key, const char* const* keys, std::size_t n) {
    return std::find_if(keys, keys + n,
                        [&key](const char* k) { return key == k; }) != keys + n;
}

}  // namespace

void SyntheticProfile::validate() const {
    if (duration_min < 1)
        throw Error(ErrorCategory::Config, "duration_min must be >= 1");
    if (students < 1)
        throw Error(ErrorCategory::Config, "students must be >= 1");
    if (frames_per_minute < 1)
        throw Error(ErrorCategory::Config, "frames_per_minute must be >= 1");
    if (noise_amplitude < 0.0 || noise_amplitude > 1.0)
        throw Error(ErrorCategory::Config, "noise_amplitude must lie in [0, 1]");
    if (segments.empty())
        throw Error(ErrorCategory::Config, "profile needs at least one rate segment");
    int cursor = 0;
    for (const RateSegment& s : segments) {
        if (s.start_min != cursor)
            throw Error(ErrorCategory::Config,
                        "rate segments must partition [0, duration_min) in order, "
                        "without gaps or overlaps");
        if (s.end_min <= s.start_min)
            throw Error(ErrorCategory::Config, "rate segment must end after it starts");
        if (s.target_rate < 0.0 || s.target_rate > 1.0)
            throw Error(ErrorCategory::Config, "target_rate must lie in [0, 1]");
        cursor = s.end_min;
    }
    if (cursor != duration_min)
        throw Error(ErrorCategory::Config, "rate segments must cover [0, duration_min)");
}

SyntheticSession generate_synthetic(const SyntheticProfile& profile) {
    profile.validate();
    std::mt19937_64 gen(profile.seed);

    std::vector<DetectionFrame> frames;
    frames.reserve(static_cast<std::size_t>(profile.duration_min) *
                   profile.frames_per_minute);
    for (const RateSegment& seg : profile.segments) {
        for (int m = seg.start_min; m < seg.end_min; ++m) {
            for (int i = 0; i < profile.frames_per_minute; ++i) {
                DetectionFrame frame;
                frame.timestamp_s =
                    m * 60.0 + (i + 0.5) * 60.0 / profile.frames_per_minute;
                const double jitter =
                    (next_uniform(gen) * 2.0 - 1.0) * profile.noise_amplitude;
                const double p = std::clamp(seg.target_rate + jitter, 0.0, 1.0);
                frame.boxes.reserve(profile.students);
                for (int j = 0; j < profile.students; ++j) {
                    DetectionBox box;
                    box.category =
                        next_uniform(gen) < p ? Category::HeadUp : Category::HeadDown;
                    box.confidence = 0.9;
                    const double x = 10.0 + 90.0 * (j % 10);
                    const double y = 10.0 + 60.0 * (j / 10);
                    box.bbox = {x, y, x + 80.0, y + 50.0};
                    frame.boxes.push_back(box);
                }
                frames.push_back(std::move(frame));
            }
        }
    }

    std::vector<TranscriptSegment> segments;
    segments.reserve(profile.duration_min);
    for (int m = 0; m < profile.duration_min; ++m)
        segments.push_back({m * 60.0, (m + 1) * 60.0,
                            "Minute " + std::to_string(m + 1) +
                                ": placeholder teaching sentence."});

    SyntheticSession out;
    out.detections_jsonl = serialize_detections(frames);
    out.transcript_jsonl = serialize_transcript(segments);
    out.truth = profile_to_json(profile);
    return out;
}

nlohmann::json profile_to_json(const SyntheticProfile& profile) {
    json segments = json::array();
    for (const RateSegment& s : profile.segments)
        segments.push_back(json{{"end_min", s.end_min},
                                {"start_min", s.start_min},
                                {"target_rate", s.target_rate}});
    return json{{"duration_min", profile.duration_min},
                {"frames_per_minute", profile.frames_per_minute},
                {"noise_amplitude", profile.noise_amplitude},
                {"seed", profile.seed},
                {"segments", std::move(segments)},
                {"students", profile.students}};
}

SyntheticProfile profile_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw Error(ErrorCategory::Config, "synthetic profile must be a JSON object");
    for (const auto& item : j.items())
        if (!known_key(item.key(), kProfileKeys, std::size(kProfileKeys)))
            throw Error(ErrorCategory::Config,
                        "unknown profile key \"" + item.key() + "\"");
    try {
        SyntheticProfile p;
        if (j.contains("duration_min")) p.duration_min = j.at("duration_min").get<int>();
        if (j.contains("students")) p.students = j.at("students").get<int>();
        if (j.contains("noise_amplitude"))
            p.noise_amplitude = j.at("noise_amplitude").get<double>();
        if (j.contains("frames_per_minute"))
            p.frames_per_minute = j.at("frames_per_minute").get<int>();
        if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
        if (!j.contains("segments"))
            throw Error(ErrorCategory::Config, "synthetic profile needs \"segments\"");
        for (const json& s : j.at("segments")) {
            if (!s.is_object())
                throw Error(ErrorCategory::Config, "each rate segment must be an object");
            for (const auto& item : s.items())
                if (!known_key(item.key(), kSegmentKeys, std::size(kSegmentKeys)))
                    throw Error(ErrorCategory::Config,
                                "unknown segment key \"" + item.key() + "\"");
            p.segments.push_back({s.at("start_min").get<int>(),
                                  s.at("end_min").get<int>(),
                                  s.at("target_rate").get<double>()});
        }
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorCategory::Config,
                    std::string("bad synthetic profile: ") + e.what());
    }
}

}  // namespace lecturelens
