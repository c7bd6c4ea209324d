#include "dscms/audit.hpp"

#include "dscms/digest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dscms {

namespace {

Json unsigned_record(const AuditRecord& r) {
    Json j;
    j["seq"] = r.seq;
    j["ts"] = r.ts;
    j["actor"] = r.actor;
    j["event"] = r.event;
    j["payload"] = r.payload;
    j["payload_digest"] = r.payload_digest;
    j["prev_digest"] = r.prev_digest;
    return j;
}

std::vector<std::string_view> split_lines(std::string_view text, bool& terminated) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            out.push_back(text.substr(pos));
            terminated = false;
            return out;
        }
        out.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    terminated = true;
    return out;
}

ChainVerdict fail_at(std::size_t index, std::string reason) {
    return ChainVerdict{false, index, std::move(reason)};
}

}  // namespace

Json to_json(const AuditRecord& record) {
    Json j = unsigned_record(record);
    j["digest"] = record.digest;
    return j;
}

std::string audit_header_line() {
    Json h;
    h["format"] = "dscms-audit";
    h["version"] = 1;
    h["digest_algorithm"] = kDigestAlgorithm;
    return h.dump();
}

ChainVerdict verify_chain(std::string_view log_text) {
    if (log_text.empty()) {
        return {};
    }
    bool terminated = true;
    const auto lines = split_lines(log_text, terminated);
    const std::string header = audit_header_line();
    if (lines.front() != header) {
        return fail_at(0, "unrecognised header");
    }
    if (!terminated && lines.size() == 1) {
        return fail_at(0, "unterminated header");
    }
    std::string prev = content_digest(header);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (!terminated && i + 1 == lines.size()) {
            return fail_at(i, "unterminated record");
        }
        Json record;
        try {
            record = Json::parse(lines[i]);
        } catch (const Json::exception&) {
            return fail_at(i, "record is not valid JSON");
        }
        if (!record.is_object() || record.dump() != lines[i]) {
            return fail_at(i, "record is not canonically encoded");
        }
        AuditRecord r;
        try {
            r.seq = record.at("seq").get<std::uint64_t>();
            r.ts = record.at("ts").get<std::string>();
            r.actor = record.at("actor").get<std::string>();
            r.event = record.at("event").get<std::string>();
            r.payload = record.at("payload");
            r.payload_digest = record.at("payload_digest").get<std::string>();
            r.prev_digest = record.at("prev_digest").get<std::string>();
            r.digest = record.at("digest").get<std::string>();
        } catch (const Json::exception&) {
            return fail_at(i, "record is missing fields");
        }
        if (to_json(r).dump() != lines[i]) {
            return fail_at(i, "record has unexpected fields");
        }
        if (r.prev_digest != prev) {
            return fail_at(i, i == 1 ? "first record does not link to the header" : "broken prev link");
        }
        if (r.seq != i) {
            return fail_at(i, "sequence gap");
        }
        if (r.payload_digest != content_digest(r.payload.dump())) {
            return fail_at(i, "payload digest mismatch");
        }
        if (r.digest != content_digest(unsigned_record(r).dump())) {
            return fail_at(i, "record digest mismatch");
        }
        prev = r.digest;
    }
    return {};
}

AuditLog::AuditLog() : lines_{audit_header_line()}, head_(content_digest(lines_.front())) {}

AuditLog::AuditLog(AuditLog&& other) noexcept {
    const std::lock_guard lock(other.mutex_);
    path_ = std::move(other.path_);
    lines_ = std::move(other.lines_);
    records_ = std::move(other.records_);
    head_ = std::move(other.head_);
}

AuditLog& AuditLog::operator=(AuditLog&& other) noexcept {
    if (this != &other) {
        const std::scoped_lock lock(mutex_, other.mutex_);
        path_ = std::move(other.path_);
        lines_ = std::move(other.lines_);
        records_ = std::move(other.records_);
        head_ = std::move(other.head_);
    }
    return *this;
}

Result<AuditLog> AuditLog::open(const std::filesystem::path& path) {
    AuditLog log;
    log.path_ = path;
    if (!std::filesystem::exists(path)) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << log.lines_.front() << '\n';
        if (!out) {
            return Error::make("io-error", "cannot create audit log", path.string());
        }
        return log;
    }
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const ChainVerdict verdict = verify_chain(text);
    if (!verdict.ok) {
        return Error::make("audit-chain-broken", verdict.reason,
                           "line " + std::to_string(verdict.first_bad.value_or(0)));
    }
    if (text.empty()) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << log.lines_.front() << '\n';
        return log;
    }
    log.lines_.clear();
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        log.lines_.push_back(line);
    }
    for (std::size_t i = 1; i < log.lines_.size(); ++i) {
        const Json j = Json::parse(log.lines_[i]);
        AuditRecord r;
        r.seq = j.at("seq").get<std::uint64_t>();
        r.ts = j.at("ts").get<std::string>();
        r.actor = j.at("actor").get<std::string>();
        r.event = j.at("event").get<std::string>();
        r.payload = j.at("payload");
        r.payload_digest = j.at("payload_digest").get<std::string>();
        r.prev_digest = j.at("prev_digest").get<std::string>();
        r.digest = j.at("digest").get<std::string>();
        log.head_ = r.digest;
        log.records_.push_back(std::move(r));
    }
    return log;
}

AuditRecord AuditLog::append(std::string ts, std::string actor, std::string_view event, Json payload) {
    const std::lock_guard lock(mutex_);
    AuditRecord r;
    r.seq = records_.size() + 1;
    r.ts = std::move(ts);
    r.actor = std::move(actor);
    r.event = std::string(event);
    r.payload = std::move(payload);
    r.payload_digest = content_digest(r.payload.dump());
    r.prev_digest = head_;
    r.digest = content_digest(unsigned_record(r).dump());
    std::string line = to_json(r).dump();
    if (path_) {
        std::ofstream out(*path_, std::ios::binary | std::ios::app);
        out << line << '\n';
        out.flush();
        if (!out) {
            throw std::runtime_error("cannot append to audit log " + path_->string());
        }
    }
    lines_.push_back(std::move(line));
    head_ = r.digest;
    records_.push_back(r);
    return r;
}

std::string AuditLog::head_digest() const {
    const std::lock_guard lock(mutex_);
    return head_;
}

std::size_t AuditLog::size() const {
    const std::lock_guard lock(mutex_);
    return records_.size();
}

std::vector<AuditRecord> AuditLog::records() const {
    const std::lock_guard lock(mutex_);
    return records_;
}

std::string AuditLog::text() const {
    const std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& line : lines_) {
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace dscms
