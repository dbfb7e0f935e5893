#pragma once

#include <string>
#include <vector>

namespace lecturelens {

/// The two annotated behavior categories.
enum class Category { HeadUp, HeadDown };

const char* to_string(Category c);  // "up" / "down"
Category category_from_string(const std::string& s);

/// Axis-aligned pixel box, corners (x1,y1) top-left and (x2,y2) bottom-right.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    bool valid() const { return x1 < x2 && y1 < y2; }
    double area() const { return (x2 - x1) * (y2 - y1); }
    bool operator==(const Box&) const = default;
};

struct DetectionBox {
    Category category = Category::HeadUp;
    double confidence = 0.0;  // in [0,1]
    Box bbox;

    bool operator==(const DetectionBox&) const = default;
};

/// One detector pass: everything recognized at a single instant.
struct DetectionFrame {
    double timestamp_s = 0.0;  // seconds from session start
    std::vector<DetectionBox> boxes;

    bool operator==(const DetectionFrame&) const = default;
};

struct TranscriptSegment {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string text;

    bool operator==(const TranscriptSegment&) const = default;
};

struct SessionMetadata {
    std::string course;
    std::string teacher;
    std::string date;

    bool operator==(const SessionMetadata&) const = default;
};

/// Validated pairing of detections, transcript and session metadata.
struct SessionBundle {
    std::string session_id;
    double duration_s = 0.0;
    std::vector<DetectionFrame> frames;
    std::vector<TranscriptSegment> segments;
    SessionMetadata metadata;
};

/// Whole-or-partial minutes covered by a session: ceil(duration_s / 60).
int minute_count(double duration_s);

}  // namespace lecturelens
