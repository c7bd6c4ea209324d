#pragma once

#include "dscms/audit.hpp"
#include "dscms/consistency.hpp"
#include "dscms/governance.hpp"
#include "dscms/ingestion.hpp"
#include "dscms/result.hpp"
#include "dscms/workspace.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace dscms {

/// What one consistency check produced.
struct CheckSummary {
    ImpactReport report;
    std::vector<SpiEvent> breach_events;
    std::vector<SpiEvent> trend_events;
    Classification classification;
    /// Raised only when the impact area or the breach set changed.
    std::optional<Alert> alert;
    std::string evaluated_at;
};

[[nodiscard]] Json to_json(const CheckSummary& summary);

struct IngestOutcome {
    IngestReceipt receipt;
    /// Present when new observations were accepted.
    std::optional<CheckSummary> check;
};

[[nodiscard]] Json to_json(const IngestOutcome& outcome);

struct RecoveryCommit {
    int version = 0;
    Json diff;
};

/// Governance report inputs viewing `state`, which must outlive the result.
[[nodiscard]] ReportInputs report_inputs(const WorkspaceState& state);

/// Owns the live workspace state. Mutating calls are queued to a single
/// writer thread; each one appends exactly one audit record, persists a
/// snapshot when backed by a directory, and then publishes the new state.
class Engine {
public:
    static constexpr std::size_t kRetainedEvents = 4096;

    /// Volatile engine; nothing is written to disk.
    [[nodiscard]] static std::unique_ptr<Engine> in_memory(WorkspaceState initial);
    /// Creates a workspace directory with `initial` as its first snapshot.
    [[nodiscard]] static Result<std::unique_ptr<Engine>> create(const std::filesystem::path& root,
                                                                WorkspaceState initial);
    /// Resumes an existing workspace.
    [[nodiscard]] static Result<std::unique_ptr<Engine>> open(const std::filesystem::path& root);

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;
    ~Engine();

    /// Consistent read-only view; never blocks on a running command.
    [[nodiscard]] std::shared_ptr<const WorkspaceState> snapshot() const;
    [[nodiscard]] const AuditLog& audit() const noexcept { return audit_; }
    /// Non-empty when the newest snapshot was unreadable at open time.
    [[nodiscard]] const std::vector<Error>& recovered_from() const noexcept { return recovered_from_; }

    /// Stores observations and, if any are new, runs a check at `at`.
    [[nodiscard]] Result<IngestOutcome> ingest(std::vector<Observation> observations, Timestamp at,
                                               const std::string& actor);
    [[nodiscard]] Result<CheckSummary> run_check(Timestamp at, const std::string& actor,
                                                 const std::set<std::string>& changed_artifacts = {});
    /// Ingests a bundled scenario and checks at its trigger time.
    [[nodiscard]] Result<IngestOutcome> simulate(std::string_view scenario, const std::string& actor);
    /// Fails with stale-version when `base_version` is not the current version.
    [[nodiscard]] Result<RecoveryCommit> recover(int base_version, const std::vector<RecoveryAction>& actions,
                                                 Timestamp at, const std::string& actor);
    [[nodiscard]] Result<RevalidationReport> revalidate(Timestamp at, const std::string& actor);
    [[nodiscard]] Result<GateResult> evaluate_gate(std::string_view gate, Timestamp at, const std::string& actor);

    /// Events with seq greater than `after`.
    [[nodiscard]] std::vector<EventRecord> events_since(std::uint64_t after) const;
    /// Blocks until an event newer than `after` exists or the timeout expires.
    [[nodiscard]] std::vector<EventRecord> wait_for_events(std::uint64_t after,
                                                           std::chrono::milliseconds timeout) const;

private:
    Engine(WorkspaceState initial, AuditLog audit, std::optional<Workspace> workspace);

    /// Runs `job` on the writer thread and waits for its result.
    template <typename F>
    auto on_writer(F job) -> decltype(job());
    void writer_loop();

    Result<Unit> commit(WorkspaceState next, const std::string& ts, const std::string& actor, std::string_view event,
                        Json payload);
    Result<CheckSummary> check_into(WorkspaceState& state, Timestamp at,
                                    const std::set<std::string>& changed_artifacts) const;
    void refresh_gates(WorkspaceState& state, const std::string& ts) const;
    static void push_event(WorkspaceState& state, const std::string& ts, std::string type, Json payload);

    mutable std::mutex publish_mutex_;
    mutable std::condition_variable published_;
    std::shared_ptr<const WorkspaceState> current_;
    AuditLog audit_;
    std::optional<Workspace> workspace_;
    std::vector<GateDef> gates_ = default_gates();
    std::vector<Error> recovered_from_;

    std::mutex queue_mutex_;
    std::condition_variable queue_ready_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::thread writer_;
};

}  // namespace dscms
