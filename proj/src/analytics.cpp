#include "lecturelens/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lecturelens/error.hpp"

namespace lecturelens {

const char* to_string(DenominatorMode m) {
    return m == DenominatorMode::UpPlusDown ? "up_plus_down" : "participants";
}

const char* to_string(Stage s) {
    switch (s) {
        case Stage::High: return "high";
        case Stage::Medium: return "medium";
        case Stage::Low: return "low";
    }
    return "?";
}

const char* to_string(Direction d) {
    return d == Direction::Increase ? "increase" : "decrease";
}

DenominatorMode denominator_mode_from_string(const std::string& s) {
    if (s == "up_plus_down") return DenominatorMode::UpPlusDown;
    if (s == "participants") return DenominatorMode::Participants;
    throw Error(ErrorCategory::Config, "unknown denominator_mode \"" + s + "\"");
}

Stage stage_from_string(const std::string& s) {
    if (s == "high") return Stage::High;
    if (s == "medium") return Stage::Medium;
    if (s == "low") return Stage::Low;
    throw Error(ErrorCategory::Parse, "unknown stage \"" + s + "\"");
}

Direction direction_from_string(const std::string& s) {
    if (s == "increase") return Direction::Increase;
    if (s == "decrease") return Direction::Decrease;
    throw Error(ErrorCategory::Parse, "unknown direction \"" + s + "\"");
}

void AnalyticsConfig::validate() const {
    if (!(low_threshold > 0.0 && low_threshold < high_threshold && high_threshold < 1.0))
        throw Error(ErrorCategory::Config, "thresholds must satisfy 0 < low < high < 1");
    if (window_w < 1)
        throw Error(ErrorCategory::Config, "window_w must be >= 1");
    if (delta <= 0.0)
        throw Error(ErrorCategory::Config, "delta must be > 0");
    if (contrast_k < 1)
        throw Error(ErrorCategory::Config, "contrast_k must be >= 1");
}

std::optional<double> reported_ratio(const SessionStats& stats) {
    if (!stats.up_down_ratio) return std::nullopt;
    return std::round(*stats.up_down_ratio * 100.0) / 100.0;
}

RecognitionRate frame_rate(const DetectionFrame& frame, DenominatorMode mode,
                           int participants) {
    RecognitionRate r;
    r.timestamp_s = frame.timestamp_s;
    for (const auto& box : frame.boxes)
        (box.category == Category::HeadUp ? r.up_count : r.down_count)++;
    const int total = r.up_count + r.down_count;
    if (total == 0)
        throw Error(ErrorCategory::Validation,
                    "frame at t=" + std::to_string(frame.timestamp_s) + " has no boxes");
    if (mode == DenominatorMode::UpPlusDown) {
        r.rate = static_cast<double>(r.up_count) / total;
    } else {
        if (participants < 1)
            throw Error(ErrorCategory::Config, "participants mode needs participants >= 1");
        r.rate = std::min(1.0, static_cast<double>(r.up_count) / participants);
    }
    return r;
}

std::vector<MinuteRate> minute_series(const std::vector<RecognitionRate>& rates,
                                      double duration_s) {
    const int n = minute_count(duration_s);
    std::vector<MinuteRate> series(std::max(n, 0));
    std::vector<double> rate_sum(series.size(), 0.0), up_sum(series.size(), 0.0),
        down_sum(series.size(), 0.0);

    for (const auto& r : rates) {
        int m = static_cast<int>(std::floor(r.timestamp_s / 60.0));
        // A frame exactly at the session end lands in the last minute.
        if (m >= n) m = n - 1;
        if (m < 0 || m >= n) continue;
        rate_sum[m] += r.rate;
        up_sum[m] += r.up_count;
        down_sum[m] += r.down_count;
        series[m].n_frames++;
    }
    for (int m = 0; m < n; ++m) {
        series[m].minute_index = m;
        if (series[m].n_frames > 0) {
            series[m].rate = rate_sum[m] / series[m].n_frames;
            series[m].up_avg = up_sum[m] / series[m].n_frames;
            series[m].down_avg = down_sum[m] / series[m].n_frames;
        }
    }
    return series;
}

std::vector<MinuteRate> interpolate_missing(std::vector<MinuteRate> series) {
    const int n = static_cast<int>(series.size());
    std::vector<int> known;
    for (int i = 0; i < n; ++i)
        if (series[i].rate) known.push_back(i);
    if (known.empty())
        throw Error(ErrorCategory::Analysis, "cannot interpolate an all-missing series");

    for (int i = 0; i < n; ++i) {
        if (series[i].rate) continue;
        auto next = std::lower_bound(known.begin(), known.end(), i);
        double value;
        if (next == known.begin()) {
            value = *series[known.front()].rate;  // leading gap: extend
        } else if (next == known.end()) {
            value = *series[known.back()].rate;  // trailing gap: extend
        } else {
            const int hi = *next, lo = *(next - 1);
            const double t = static_cast<double>(i - lo) / (hi - lo);
            value = *series[lo].rate + t * (*series[hi].rate - *series[lo].rate);
        }
        series[i].rate = value;
        series[i].interpolated = true;
    }
    return series;
}

int estimate_participants(const std::vector<DetectionFrame>& frames) {
    int best = 0;
    for (const auto& frame : frames)
        best = std::max(best, static_cast<int>(frame.boxes.size()));
    if (best == 0)
        throw Error(ErrorCategory::Validation, "no non-empty frames to estimate participants from");
    return best;
}

SessionStats session_stats(const std::vector<MinuteRate>& series, int participants) {
    double up_sum = 0.0, down_sum = 0.0;
    int n = 0;
    for (const auto& m : series) {
        if (m.n_frames == 0) continue;
        up_sum += *m.up_avg;
        down_sum += *m.down_avg;
        ++n;
    }
    if (n == 0)
        throw Error(ErrorCategory::Analysis, "no minute with frames; cannot compute session stats");

    SessionStats stats;
    stats.participants = participants;
    stats.avg_up_per_min = up_sum / n;
    stats.avg_down_per_min = down_sum / n;
    if (stats.avg_down_per_min > 0.0)
        stats.up_down_ratio = stats.avg_up_per_min / stats.avg_down_per_min;
    stats.duration_min = static_cast<int>(series.size());
    return stats;
}

namespace {

Stage classify(double rate, const AnalyticsConfig& cfg) {
    if (rate >= cfg.high_threshold) return Stage::High;
    if (rate < cfg.low_threshold) return Stage::Low;
    return Stage::Medium;
}

struct Run {
    int start, end;  // half-open minutes
    Stage stage;
};

double run_mean(const std::vector<double>& rates, const Run& r) {
    double sum = 0.0;
    for (int i = r.start; i < r.end; ++i) sum += rates[i];
    return sum / (r.end - r.start);
}

void coalesce(std::vector<Run>& runs) {
    std::size_t w = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].stage == runs[w].stage)
            runs[w].end = runs[i].end;
        else
            runs[++w] = runs[i];
    }
    runs.resize(w + 1);
}

std::vector<double> gapless_rates(const std::vector<MinuteRate>& series) {
    std::vector<double> rates;
    rates.reserve(series.size());
    for (const auto& m : series) {
        if (!m.rate)
            throw Error(ErrorCategory::Analysis,
                        "series has a missing minute " + std::to_string(m.minute_index) +
                            "; interpolate first");
        rates.push_back(*m.rate);
    }
    return rates;
}

}  // namespace

std::vector<StageInterval> segment_stages(const std::vector<MinuteRate>& series,
                                          const AnalyticsConfig& cfg) {
    cfg.validate();
    if (series.empty())
        throw Error(ErrorCategory::Analysis, "cannot segment an empty series");
    const std::vector<double> rates = gapless_rates(series);
    const int n = static_cast<int>(rates.size());

    std::vector<Run> runs;
    for (int i = 0; i < n; ++i) {
        const Stage s = classify(rates[i], cfg);
        if (!runs.empty() && runs.back().stage == s)
            runs.back().end = i + 1;
        else
            runs.push_back(Run{i, i + 1, s});
    }

    // Absorb short runs until every run spans at least window_w minutes.
    while (runs.size() > 1) {
        int pick = -1, pick_target = -1;
        double pick_dist = 0.0;
        for (int i = 0; i < static_cast<int>(runs.size()); ++i) {
            const int len = runs[i].end - runs[i].start;
            if (len >= cfg.window_w) continue;
            const double mean = run_mean(rates, runs[i]);
            int target;
            double dist;
            if (i == 0) {
                target = 1;
                dist = std::abs(mean - run_mean(rates, runs[1]));
            } else if (i + 1 == static_cast<int>(runs.size())) {
                target = i - 1;
                dist = std::abs(mean - run_mean(rates, runs[i - 1]));
            } else {
                const double dl = std::abs(mean - run_mean(rates, runs[i - 1]));
                const double dr = std::abs(mean - run_mean(rates, runs[i + 1]));
                target = dl <= dr ? i - 1 : i + 1;  // ties merge left
                dist = std::min(dl, dr);
            }
            const bool interior = i > 0 && i + 1 < static_cast<int>(runs.size());
            if (pick >= 0) {
                const int plen = runs[pick].end - runs[pick].start;
                const bool pick_interior =
                    pick > 0 && pick + 1 < static_cast<int>(runs.size());
                if (len > plen) continue;
                if (len == plen) {
                    if (dist > pick_dist) continue;
                    if (dist == pick_dist && !(interior && !pick_interior)) continue;
                }
            }
            pick = i;
            pick_target = target;
            pick_dist = dist;
        }
        if (pick < 0) break;

        Run& target = runs[pick_target];
        target.start = std::min(target.start, runs[pick].start);
        target.end = std::max(target.end, runs[pick].end);
        runs.erase(runs.begin() + pick);
        coalesce(runs);
    }

    std::vector<StageInterval> intervals;
    intervals.reserve(runs.size());
    for (const auto& r : runs)
        intervals.push_back(StageInterval{r.start, r.end, r.stage, run_mean(rates, r)});
    return intervals;
}

std::vector<ChangePoint> detect_change_points(const std::vector<MinuteRate>& series,
                                              const AnalyticsConfig& cfg) {
    cfg.validate();
    const std::vector<double> rates = gapless_rates(series);
    const int n = static_cast<int>(rates.size());
    const int w = cfg.window_w;
    if (n < 2 * w)
        throw Error(ErrorCategory::Analysis,
                    "series of " + std::to_string(n) + " minutes is shorter than 2*window_w");

    struct Candidate {
        int minute;
        double d;
    };
    std::vector<Candidate> candidates;
    for (int t = w; t <= n - w; ++t) {
        double after = 0.0, before = 0.0;
        for (int i = 0; i < w; ++i) {
            after += rates[t + i];
            before += rates[t - w + i];
        }
        const double d = (after - before) / w;
        if (std::abs(d) >= cfg.delta) candidates.push_back({t, d});
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (std::abs(a.d) != std::abs(b.d)) return std::abs(a.d) > std::abs(b.d);
        return a.minute < b.minute;
    });

    std::vector<Candidate> accepted;
    for (const auto& c : candidates) {
        const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](const Candidate& a) {
            return std::abs(a.minute - c.minute) < w;
        });
        if (clear) accepted.push_back(c);
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const Candidate& a, const Candidate& b) { return a.minute < b.minute; });

    std::vector<ChangePoint> points;
    points.reserve(accepted.size());
    for (const auto& c : accepted)
        points.push_back(ChangePoint{c.minute,
                                     c.d > 0 ? Direction::Increase : Direction::Decrease,
                                     std::abs(c.d)});
    return points;
}

}  // namespace lecturelens
