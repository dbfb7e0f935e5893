#include "lecturelens/corpus.hpp"

#include <algorithm>
#include <cmath>

#include "lecturelens/error.hpp"

namespace lecturelens {

const char* to_string(Polarity p) {
    return p == Polarity::Positive ? "positive" : "negative";
}

namespace {

// Joins the non-empty texts of minutes [from, to) with newlines.
std::string join_minutes(const std::vector<MinuteCorpus>& minutes, int from, int to) {
    std::string out;
    for (int m = from; m < to; ++m) {
        if (minutes[m].text.empty()) continue;
        if (!out.empty()) out += '\n';
        out += minutes[m].text;
    }
    return out;
}

}  // namespace

std::vector<MinuteCorpus> bucket_by_minute(const std::vector<TranscriptSegment>& segments,
                                           double duration_s) {
    const int n = minute_count(duration_s);
    if (n <= 0)
        throw Error(ErrorCategory::Validation, "session duration must be > 0");

    std::vector<MinuteCorpus> minutes(n);
    for (int m = 0; m < n; ++m) minutes[m].minute_index = m;

    // Midpoint rule keeps each utterance intact in exactly one minute.
    std::vector<std::size_t> order(segments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return segments[a].start_s < segments[b].start_s;
    });

    for (std::size_t idx : order) {
        const auto& seg = segments[idx];
        const double mid = (seg.start_s + seg.end_s) / 2.0;
        int m = static_cast<int>(std::floor(mid / 60.0));
        if (m >= n) m = n - 1;  // tolerated overshoot past session end
        if (m < 0) m = 0;
        auto& text = minutes[m].text;
        if (!text.empty()) text += ' ';
        text += seg.text;
    }
    return minutes;
}

std::vector<LabeledCorpus> label_by_stage(const std::vector<MinuteCorpus>& minutes,
                                          const std::vector<StageInterval>& intervals) {
    const int n = static_cast<int>(minutes.size());
    int expected_start = 0;
    for (const auto& iv : intervals) {
        if (iv.start_min != expected_start || iv.end_min <= iv.start_min)
            throw Error(ErrorCategory::Validation,
                        "stage intervals do not partition the minute range (gap or overlap at minute " +
                            std::to_string(iv.start_min) + ")");
        expected_start = iv.end_min;
    }
    if (expected_start != n)
        throw Error(ErrorCategory::Validation,
                    "stage intervals cover " + std::to_string(expected_start) + " of " +
                        std::to_string(n) + " minutes");

    std::vector<LabeledCorpus> labeled;
    labeled.reserve(intervals.size());
    for (const auto& iv : intervals) {
        labeled.push_back(LabeledCorpus{iv.start_min, iv.end_min, iv.stage,
                                        join_minutes(minutes, iv.start_min, iv.end_min),
                                        iv.mean_rate});
    }
    return labeled;
}

std::vector<ContrastPair> extract_contrast(const std::vector<MinuteCorpus>& minutes,
                                           const std::vector<ChangePoint>& points,
                                           int k) {
    if (k < 1)
        throw Error(ErrorCategory::Config, "contrast window k must be >= 1");
    const int n = static_cast<int>(minutes.size());

    std::vector<ContrastPair> pairs;
    pairs.reserve(points.size());
    for (const auto& p : points) {
        ContrastPair pair;
        pair.change_minute = p.minute;
        pair.polarity = p.direction == Direction::Increase ? Polarity::Positive
                                                           : Polarity::Negative;
        pair.magnitude = p.magnitude;
        pair.before_text = join_minutes(minutes, std::max(0, p.minute - k), p.minute);
        pair.after_text = join_minutes(minutes, p.minute, std::min(n, p.minute + k));
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

}  // namespace lecturelens
