#pragma once

#include <string>
#include <vector>

#include "lecturelens/analytics.hpp"
#include "lecturelens/types.hpp"

namespace lecturelens {

/// Teacher text spoken during one minute; empty when nothing was said.
struct MinuteCorpus {
    int minute_index = 0;
    std::string text;
};

/// One stage interval's worth of corpus text.
struct LabeledCorpus {
    int start_min = 0;
    int end_min = 0;
    Stage stage = Stage::Medium;
    std::string text;  // interval's non-empty minute texts joined with \n
    double mean_rate = 0.0;
};

enum class Polarity { Positive, Negative };
const char* to_string(Polarity p);

/// Corpus windows around a change point. Positive iff the rate increased.
struct ContrastPair {
    int change_minute = 0;
    Polarity polarity = Polarity::Positive;
    std::string before_text;  // minutes [max(0, t-k), t)
    std::string after_text;   // minutes [t, min(len, t+k))
    double magnitude = 0.0;
};

/// Assigns each segment to the minute containing its midpoint; texts
/// within a minute are joined in start-time order with a single space.
/// Output has one record per session minute.
std::vector<MinuteCorpus> bucket_by_minute(const std::vector<TranscriptSegment>& segments,
                                           double duration_s);

/// One LabeledCorpus per interval. Intervals must partition the minute
/// range exactly.
std::vector<LabeledCorpus> label_by_stage(const std::vector<MinuteCorpus>& minutes,
                                          const std::vector<StageInterval>& intervals);

/// Before/after corpus windows of up to k minutes per change point,
/// clipped at the session bounds. The change minute itself is in "after".
std::vector<ContrastPair> extract_contrast(const std::vector<MinuteCorpus>& minutes,
                                           const std::vector<ChangePoint>& points,
                                           int k);

}  // namespace lecturelens
