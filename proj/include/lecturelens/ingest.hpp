#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lecturelens/types.hpp"

namespace lecturelens {

// ── JSONL parsers ─────────────────────────────────────────────────
//
// Detection stream, one frame per line:
//   {"t": <seconds>, "boxes": [{"cls": "up"|"down", "conf": <0..1>,
//                               "xyxy": [x1,y1,x2,y2]}]}
// Transcript, one segment per line:
//   {"start": <s>, "end": <s>, "text": "<utf-8>"}
//
// Records come back in input order; any malformed or invariant-violating
// line raises ParseError with its 1-based line number.

std::vector<DetectionFrame> parse_detections(std::istream& raw);
std::vector<DetectionFrame> parse_detections(const std::string& raw);
std::vector<TranscriptSegment> parse_transcript(std::istream& raw);
std::vector<TranscriptSegment> parse_transcript(const std::string& raw);

std::string serialize_detections(const std::vector<DetectionFrame>& frames);
std::string serialize_transcript(const std::vector<TranscriptSegment>& segments);

// ── ASR adapter ───────────────────────────────────────────────────

/// Turns an opaque audio locator into transcript JSONL.
class AsrBackend {
public:
    virtual ~AsrBackend() = default;
    virtual std::string fetch_transcript(const std::string& audio_ref) = 0;
    virtual std::string name() const = 0;
};

/// POSTs {"audio": <locator>} to the endpoint and expects transcript
/// JSONL as the response body.
class HttpAsrBackend final : public AsrBackend {
public:
    explicit HttpAsrBackend(std::string endpoint);
    std::string fetch_transcript(const std::string& audio_ref) override;
    std::string name() const override;

private:
    std::string endpoint_;
};

/// Replays a fixture file, ignoring the audio locator.
class FileReplayAsrBackend final : public AsrBackend {
public:
    explicit FileReplayAsrBackend(std::string fixture_path);
    std::string fetch_transcript(const std::string& audio_ref) override;
    std::string name() const override;

private:
    std::string fixture_path_;
};

/// Fetches and parses a transcript. Segments violating their invariants
/// are rejected (ParseError), never silently fixed. Identical in effect
/// to parse_transcript on whatever the backend returns.
std::vector<TranscriptSegment> transcribe(const std::string& audio_ref,
                                          AsrBackend& backend);

/// Bundles inputs after checking the session invariants: duration > 0,
/// at least one frame, every frame timestamp <= duration, every segment
/// end <= duration + 1 s.
SessionBundle validate_session(std::vector<DetectionFrame> frames,
                               std::vector<TranscriptSegment> segments,
                               double duration_s,
                               SessionMetadata metadata,
                               std::string session_id = "session");

}  // namespace lecturelens
