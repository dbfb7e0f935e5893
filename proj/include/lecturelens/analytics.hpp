#pragma once

#include <optional>
#include <vector>

#include "lecturelens/types.hpp"

namespace lecturelens {

/// What the head-up rate is divided by.
enum class DenominatorMode {
    UpPlusDown,    // up / (up + down), per recognition result
    Participants,  // up / participants, clamped to 1.0
};

enum class Stage { High, Medium, Low };
enum class Direction { Increase, Decrease };

const char* to_string(DenominatorMode m);
const char* to_string(Stage s);
const char* to_string(Direction d);
DenominatorMode denominator_mode_from_string(const std::string& s);
Stage stage_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);

/// Head-up rate of a single recognition result.
struct RecognitionRate {
    double timestamp_s = 0.0;
    int up_count = 0;
    int down_count = 0;
    double rate = 0.0;  // in [0,1]
};

/// One minute of the per-minute series. rate is empty (MISSING) only
/// when no frame fell into the minute and nothing was interpolated.
struct MinuteRate {
    int minute_index = 0;
    std::optional<double> rate;
    std::optional<double> up_avg;    // mean up count over the minute's frames
    std::optional<double> down_avg;  // stays empty on interpolated minutes
    int n_frames = 0;
    bool interpolated = false;

    bool operator==(const MinuteRate&) const = default;
};

struct SessionStats {
    int participants = 1;
    double avg_up_per_min = 0.0;
    double avg_down_per_min = 0.0;
    std::optional<double> up_down_ratio;  // empty when avg_down_per_min == 0
    int duration_min = 0;

    bool operator==(const SessionStats&) const = default;
};

/// Ratio rounded to 2 decimals for reporting; full precision stays in
/// SessionStats::up_down_ratio.
std::optional<double> reported_ratio(const SessionStats& stats);

/// Maximal run of minutes sharing a stage. Half-open [start_min, end_min).
struct StageInterval {
    int start_min = 0;
    int end_min = 0;
    Stage stage = Stage::Medium;
    double mean_rate = 0.0;

    bool operator==(const StageInterval&) const = default;
};

/// Minute where the head-up rate significantly increases or decreases.
struct ChangePoint {
    int minute = 0;
    Direction direction = Direction::Increase;
    double magnitude = 0.0;  // >= configured delta

    bool operator==(const ChangePoint&) const = default;
};

struct AnalyticsConfig {
    DenominatorMode denominator_mode = DenominatorMode::UpPlusDown;
    double high_threshold = 0.65;
    double low_threshold = 0.45;
    int window_w = 2;     // minutes; also the minimum stage length
    double delta = 0.15;  // absolute rate change counting as significant
    int contrast_k = 3;   // minutes each side of a change point

    bool operator==(const AnalyticsConfig&) const = default;
    void validate() const;  // throws Error(Config) on a bad combination
};

/// Counts HeadUp/HeadDown boxes and derives the rate for one frame.
/// Frames with zero boxes raise Error(Validation); callers drop them.
RecognitionRate frame_rate(const DetectionFrame& frame, DenominatorMode mode,
                           int participants = 1);

/// Buckets rates into half-open minutes [60m, 60(m+1)) and averages.
/// Output length is always minute_count(duration_s); minutes without
/// frames come back MISSING.
std::vector<MinuteRate> minute_series(const std::vector<RecognitionRate>& rates,
                                      double duration_s);

/// Fills MISSING minutes by linear interpolation between the nearest
/// non-missing neighbors; leading/trailing gaps extend the nearest value.
/// Filled minutes are flagged interpolated; their count averages stay empty.
std::vector<MinuteRate> interpolate_missing(std::vector<MinuteRate> series);

/// Max over frames of (up + down) box count.
int estimate_participants(const std::vector<DetectionFrame>& frames);

SessionStats session_stats(const std::vector<MinuteRate>& series,
                           int participants);

/// Splits a gapless series into High/Medium/Low stages.
///
/// Minutes are classified pointwise (rate >= high -> High, rate < low ->
/// Low, else Medium) and coalesced into maximal runs. Runs shorter than
/// window_w are then absorbed one at a time into the neighboring run
/// whose mean rate is closer to the short run's mean (ties merge left);
/// the absorbing run keeps its stage and adjacent same-stage runs
/// re-coalesce. Absorption order: shortest run first, then smallest
/// mean-distance to its merge target, then interior runs before edge
/// runs, then leftmost. The result partitions [0, series length).
std::vector<StageInterval> segment_stages(const std::vector<MinuteRate>& series,
                                          const AnalyticsConfig& cfg);

/// Scans a gapless series for minutes where the mean rate of the next
/// window_w minutes differs from the mean of the previous window_w by at
/// least delta. Overlapping candidates within window_w of a stronger one
/// are suppressed (greedy by |d|, ties to the earlier minute).
std::vector<ChangePoint> detect_change_points(const std::vector<MinuteRate>& series,
                                              const AnalyticsConfig& cfg);

}  // namespace lecturelens
