#pragma once

#include "dscms/json.hpp"
#include "dscms/result.hpp"

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dscms {

/// Event kinds recorded in the audit log.
inline constexpr std::string_view kAuditAlert = "alert";
inline constexpr std::string_view kAuditGate = "gate";
inline constexpr std::string_view kAuditRecovery = "recovery";
inline constexpr std::string_view kAuditIngest = "ingest";
inline constexpr std::string_view kAuditCheck = "check";

struct AuditRecord {
    std::uint64_t seq = 0;
    std::string ts;
    std::string actor;
    std::string event;
    Json payload;
    std::string payload_digest;
    std::string prev_digest;
    std::string digest;
};

[[nodiscard]] Json to_json(const AuditRecord& record);

/// First line of every log; names the digest algorithm.
[[nodiscard]] std::string audit_header_line();

struct ChainVerdict {
    bool ok = true;
    /// Line index of the first failure; the header is line 0.
    std::optional<std::size_t> first_bad;
    std::string reason;
};

/// Checks header, canonical encoding, sequence numbers, payload digests and
/// the prev-digest links of a complete log file. An empty log verifies.
[[nodiscard]] ChainVerdict verify_chain(std::string_view log_text);

/// Append-only hash-chained log, optionally mirrored to a file. Appends are
/// serialized internally.
class AuditLog {
public:
    AuditLog();
    /// Opens or creates the file; an existing file must verify.
    [[nodiscard]] static Result<AuditLog> open(const std::filesystem::path& path);

    AuditLog(AuditLog&& other) noexcept;
    AuditLog& operator=(AuditLog&& other) noexcept;
    AuditLog(const AuditLog&) = delete;
    AuditLog& operator=(const AuditLog&) = delete;
    ~AuditLog() = default;

    AuditRecord append(std::string ts, std::string actor, std::string_view event, Json payload);

    [[nodiscard]] std::string head_digest() const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::vector<AuditRecord> records() const;
    /// Full log text, header included.
    [[nodiscard]] std::string text() const;

private:
    mutable std::mutex mutex_;
    std::optional<std::filesystem::path> path_;
    std::vector<std::string> lines_;
    std::vector<AuditRecord> records_;
    std::string head_;
};

}  // namespace dscms
