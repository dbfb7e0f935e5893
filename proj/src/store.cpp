#include "lecturelens/store.hpp"

#include <zlib.h>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "lecturelens/error.hpp"

using nlohmann::json;

namespace lecturelens {

const char* to_string(RecordKind k) {
    switch (k) {
        case RecordKind::StageCorpus: return "stage_corpus";
        case RecordKind::ContrastCorpus: return "contrast_corpus";
        case RecordKind::Stats: return "stats";
        case RecordKind::Report: return "report";
    }
    return "?";
}

RecordKind record_kind_from_string(const std::string& s) {
    if (s == "stage_corpus") return RecordKind::StageCorpus;
    if (s == "contrast_corpus") return RecordKind::ContrastCorpus;
    if (s == "stats") return RecordKind::Stats;
    if (s == "report") return RecordKind::Report;
    throw Error(ErrorCategory::Parse, "unknown record kind \"" + s + "\"");
}

std::string current_utc_iso8601() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

std::string crc32_hex(const std::string& data) {
    const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()),
                             static_cast<uInt>(data.size()));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

// Checksum input: the record without its crc field, canonically dumped.
std::string record_body(const TeachingRecord& r) {
    return json{{"created_at", r.created_at},
                {"kind", to_string(r.kind)},
                {"payload", r.payload},
                {"session_id", r.session_id}}
        .dump();
}

// Identity for dedup: created_at excluded on purpose, so replaying the
// same pipeline later still counts as a duplicate.
using DedupKey = std::tuple<std::string, std::string, std::string>;

DedupKey dedup_key(const TeachingRecord& r) {
    return {r.session_id, to_string(r.kind), crc32_hex(r.payload.dump())};
}

TeachingRecord parse_record_line(const std::string& line, std::size_t lineno,
                                 const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error&) {
        throw Error(ErrorCategory::Io, path.string() + ": corrupted record at line " +
                                           std::to_string(lineno) + " (not JSON)");
    }
    TeachingRecord r;
    try {
        r.session_id = j.at("session_id").get<std::string>();
        r.kind = record_kind_from_string(j.at("kind").get<std::string>());
        r.payload = j.at("payload");
        r.created_at = j.at("created_at").get<std::string>();
        const auto stored_crc = j.at("crc32").get<std::string>();
        if (stored_crc != crc32_hex(record_body(r)))
            throw Error(ErrorCategory::Io, path.string() + ": checksum mismatch at line " +
                                               std::to_string(lineno));
    } catch (const json::exception&) {
        throw Error(ErrorCategory::Io, path.string() + ": corrupted record at line " +
                                           std::to_string(lineno) + " (missing field)");
    }
    return r;
}

/// Exclusive advisory lock; exists only while a writer is active.
class LockFile {
public:
    explicit LockFile(const std::filesystem::path& path) : path_(path) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        FILE* f = std::fopen(path.c_str(), "wx");
        if (!f)
            throw Error(ErrorCategory::Io,
                        "store is locked by another writer (" + path.string() + ")");
        std::fclose(f);
    }
    ~LockFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::filesystem::path path_;
};

}  // namespace

TeachingStore::TeachingStore(std::filesystem::path data_path)
    : data_path_(std::move(data_path)),
      index_path_(data_path_.string() + ".idx.json"),
      lock_path_(data_path_.string() + ".lock") {}

std::size_t TeachingStore::persist(const std::vector<TeachingRecord>& records) {
    LockFile lock(lock_path_);

    std::set<DedupKey> seen;
    {
        std::ifstream in(data_path_, std::ios::binary);
        std::string line;
        std::size_t lineno = 0;
        while (in && std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            seen.insert(dedup_key(parse_record_line(line, lineno, data_path_)));
        }
    }

    std::ofstream out(data_path_, std::ios::binary | std::ios::app);
    if (!out)
        throw Error(ErrorCategory::Io, "cannot open store for writing: " + data_path_.string());

    std::size_t written = 0;
    for (const auto& record : records) {
        TeachingRecord r = record;
        if (r.created_at.empty()) r.created_at = current_utc_iso8601();
        const auto key = dedup_key(r);
        if (!seen.insert(key).second) continue;

        json j{{"created_at", r.created_at},
               {"crc32", crc32_hex(record_body(r))},
               {"kind", to_string(r.kind)},
               {"payload", r.payload},
               {"session_id", r.session_id}};
        out << j.dump() << '\n';
        ++written;
    }
    out.flush();
    if (!out)
        throw Error(ErrorCategory::Io, "write failure on store: " + data_path_.string());

    rebuild_index();
    return written;
}

std::vector<TeachingRecord> TeachingStore::query(const std::string& session_id,
                                                 std::optional<RecordKind> kind) const {
    std::vector<TeachingRecord> matches;
    std::ifstream in(data_path_, std::ios::binary);
    if (!in) return matches;  // no store yet: nothing persisted

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        TeachingRecord r = parse_record_line(line, lineno, data_path_);
        if (r.session_id != session_id) continue;
        if (kind && r.kind != *kind) continue;
        matches.push_back(std::move(r));
    }
    return matches;
}

void TeachingStore::rebuild_index() const {
    json index = json::object();
    std::ifstream in(data_path_, std::ios::binary);
    if (in) {
        std::string line;
        std::size_t lineno = 0;
        std::streampos offset = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty()) {
                const TeachingRecord r = parse_record_line(line, lineno, data_path_);
                index[r.session_id][to_string(r.kind)].push_back(
                    static_cast<long long>(offset));
            }
            offset = in.tellg();
        }
    }
    std::ofstream out(index_path_, std::ios::binary | std::ios::trunc);
    out << json{{"file", data_path_.filename().string()}, {"offsets", index}}.dump(2) << '\n';
}

}  // namespace lecturelens
