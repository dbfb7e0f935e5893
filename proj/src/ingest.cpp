#include "lecturelens/ingest.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "lecturelens/error.hpp"

using nlohmann::json;

namespace lecturelens {
namespace {

// Strict per-line JSON parse; nlohmann's own message is wrapped with the
// line number so errors stay positioned.
json parse_line(const std::string& line, std::size_t lineno) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(lineno, std::string("malformed JSON (") + e.what() + ")");
    }
}

double require_number(const json& j, const char* key, std::size_t lineno) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ParseError(lineno, std::string("missing or non-numeric \"") + key + "\"");
    return j.at(key).get<double>();
}

DetectionBox parse_box(const json& jb, std::size_t lineno) {
    if (!jb.is_object())
        throw ParseError(lineno, "box entry is not an object");
    if (!jb.contains("cls") || !jb.at("cls").is_string())
        throw ParseError(lineno, "box missing string \"cls\"");

    DetectionBox box;
    try {
        box.category = category_from_string(jb.at("cls").get<std::string>());
    } catch (const Error& e) {
        throw ParseError(lineno, e.what());
    }

    box.confidence = require_number(jb, "conf", lineno);
    if (box.confidence < 0.0 || box.confidence > 1.0)
        throw ParseError(lineno, "confidence " + std::to_string(box.confidence) + " outside [0,1]");

    if (!jb.contains("xyxy") || !jb.at("xyxy").is_array() || jb.at("xyxy").size() != 4)
        throw ParseError(lineno, "box missing 4-element \"xyxy\"");
    const auto& xy = jb.at("xyxy");
    for (const auto& v : xy)
        if (!v.is_number()) throw ParseError(lineno, "non-numeric coordinate in \"xyxy\"");
    box.bbox = Box{xy[0].get<double>(), xy[1].get<double>(),
                   xy[2].get<double>(), xy[3].get<double>()};
    if (box.bbox.x1 >= box.bbox.x2)
        throw ParseError(lineno, "bbox x1 >= x2");
    if (box.bbox.y1 >= box.bbox.y2)
        throw ParseError(lineno, "bbox y1 >= y2");
    return box;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<DetectionFrame> parse_detections(std::istream& raw) {
    std::vector<DetectionFrame> frames;
    std::string line;
    std::size_t lineno = 0;
    double prev_t = -1.0;
    while (std::getline(raw, line)) {
        ++lineno;
        if (blank(line)) continue;
        const json j = parse_line(line, lineno);

        DetectionFrame frame;
        frame.timestamp_s = require_number(j, "t", lineno);
        if (frame.timestamp_s < 0.0)
            throw ParseError(lineno, "negative timestamp");
        if (frame.timestamp_s < prev_t)
            throw ParseError(lineno, "decreasing timestamp (" + std::to_string(frame.timestamp_s) +
                                         " after " + std::to_string(prev_t) + ")");
        prev_t = frame.timestamp_s;

        if (!j.contains("boxes") || !j.at("boxes").is_array())
            throw ParseError(lineno, "missing \"boxes\" array");
        for (const auto& jb : j.at("boxes"))
            frame.boxes.push_back(parse_box(jb, lineno));
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<DetectionFrame> parse_detections(const std::string& raw) {
    std::istringstream in(raw);
    return parse_detections(in);
}

std::vector<TranscriptSegment> parse_transcript(std::istream& raw) {
    std::vector<TranscriptSegment> segments;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(raw, line)) {
        ++lineno;
        if (blank(line)) continue;
        const json j = parse_line(line, lineno);

        TranscriptSegment seg;
        seg.start_s = require_number(j, "start", lineno);
        seg.end_s = require_number(j, "end", lineno);
        if (seg.start_s < 0.0)
            throw ParseError(lineno, "negative segment start");
        if (seg.start_s >= seg.end_s)
            throw ParseError(lineno, "segment start >= end");
        if (!j.contains("text") || !j.at("text").is_string())
            throw ParseError(lineno, "missing string \"text\"");
        seg.text = j.at("text").get<std::string>();
        if (trimmed(seg.text).empty())
            throw ParseError(lineno, "empty segment text");
        segments.push_back(std::move(seg));
    }
    return segments;
}

std::vector<TranscriptSegment> parse_transcript(const std::string& raw) {
    std::istringstream in(raw);
    return parse_transcript(in);
}

std::string serialize_detections(const std::vector<DetectionFrame>& frames) {
    std::string out;
    for (const auto& frame : frames) {
        json jboxes = json::array();
        for (const auto& box : frame.boxes) {
            jboxes.push_back(json{{"cls", to_string(box.category)},
                                  {"conf", box.confidence},
                                  {"xyxy", {box.bbox.x1, box.bbox.y1, box.bbox.x2, box.bbox.y2}}});
        }
        out += json{{"t", frame.timestamp_s}, {"boxes", std::move(jboxes)}}.dump();
        out += '\n';
    }
    return out;
}

std::string serialize_transcript(const std::vector<TranscriptSegment>& segments) {
    std::string out;
    for (const auto& seg : segments) {
        out += json{{"start", seg.start_s}, {"end", seg.end_s}, {"text", seg.text}}.dump();
        out += '\n';
    }
    return out;
}

// ── ASR adapter ───────────────────────────────────────────────────

HttpAsrBackend::HttpAsrBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpAsrBackend::name() const { return "asr@" + endpoint_; }

std::string HttpAsrBackend::fetch_transcript(const std::string& audio_ref) {
    httplib::Client client(endpoint_);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    const json body{{"audio", audio_ref}};
    auto res = client.Post("/", body.dump(), "application/json");
    if (!res)
        throw Error(ErrorCategory::Transport,
                    "ASR endpoint " + endpoint_ + " unreachable (" + httplib::to_string(res.error()) + ")");
    if (res->status < 200 || res->status >= 300)
        throw Error(ErrorCategory::Backend,
                    "ASR endpoint " + endpoint_ + " returned HTTP " + std::to_string(res->status));
    return res->body;
}

FileReplayAsrBackend::FileReplayAsrBackend(std::string fixture_path)
    : fixture_path_(std::move(fixture_path)) {}

std::string FileReplayAsrBackend::name() const { return "asr-mock@" + fixture_path_; }

std::string FileReplayAsrBackend::fetch_transcript(const std::string&) {
    std::ifstream in(fixture_path_, std::ios::binary);
    if (!in)
        throw Error(ErrorCategory::Io, "cannot read ASR fixture " + fixture_path_);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<TranscriptSegment> transcribe(const std::string& audio_ref, AsrBackend& backend) {
    return parse_transcript(backend.fetch_transcript(audio_ref));
}

SessionBundle validate_session(std::vector<DetectionFrame> frames,
                               std::vector<TranscriptSegment> segments,
                               double duration_s,
                               SessionMetadata metadata,
                               std::string session_id) {
    if (duration_s <= 0.0)
        throw Error(ErrorCategory::Validation, "session duration must be > 0");
    if (frames.empty())
        throw Error(ErrorCategory::Validation, "empty detection stream");
    for (const auto& frame : frames)
        if (frame.timestamp_s > duration_s)
            throw Error(ErrorCategory::Validation,
                        "frame timestamp " + std::to_string(frame.timestamp_s) +
                            " beyond session duration " + std::to_string(duration_s));
    constexpr double kSegmentSlack = 1.0;  // ASR backends overshoot slightly
    for (const auto& seg : segments)
        if (seg.end_s > duration_s + kSegmentSlack)
            throw Error(ErrorCategory::Validation,
                        "segment end " + std::to_string(seg.end_s) +
                            " beyond session duration " + std::to_string(duration_s));

    SessionBundle bundle;
    bundle.session_id = std::move(session_id);
    bundle.duration_s = duration_s;
    bundle.frames = std::move(frames);
    bundle.segments = std::move(segments);
    bundle.metadata = std::move(metadata);
    return bundle;
}

}  // namespace lecturelens
