#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lecturelens {

enum class RecordKind { StageCorpus, ContrastCorpus, Stats, Report };

const char* to_string(RecordKind k);
RecordKind record_kind_from_string(const std::string& s);

struct TeachingRecord {
    std::string session_id;
    RecordKind kind = RecordKind::Stats;
    nlohmann::json payload;
    std::string created_at;  // ISO-8601 UTC; filled by persist when empty
};

std::string current_utc_iso8601();

/// Append-only JSONL teaching database.
///
/// One record per line: {"created_at":..., "crc32":"<hex>", "kind":...,
/// "payload":..., "session_id":...}. The crc32 covers the canonical dump
/// of the record without the crc field. Duplicates — same (session_id,
/// kind, payload) — are skipped on persist, keyed by a payload hash, so
/// re-running a pipeline writes nothing new. A sidecar index
/// <data>.idx.json maps (session_id, kind) to byte offsets and is
/// regenerable from the data file at any time.
///
/// Writers take an advisory lock file for the duration of a persist();
/// readers never lock.
class TeachingStore {
public:
    explicit TeachingStore(std::filesystem::path data_path);

    /// Appends records that are not already present. Returns the number
    /// actually written.
    std::size_t persist(const std::vector<TeachingRecord>& records);

    /// Matching records in insertion order. Corrupted lines raise
    /// Error(Io) naming the offending line.
    std::vector<TeachingRecord> query(const std::string& session_id,
                                      std::optional<RecordKind> kind = std::nullopt) const;

    void rebuild_index() const;

    const std::filesystem::path& path() const { return data_path_; }

private:
    std::filesystem::path data_path_;
    std::filesystem::path index_path_;
    std::filesystem::path lock_path_;
};

}  // namespace lecturelens
