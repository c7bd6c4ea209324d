#pragma once

#include "dscms/argument_model.hpp"
#include "dscms/consistency.hpp"
#include "dscms/governance.hpp"
#include "dscms/json.hpp"
#include "dscms/observation.hpp"
#include "dscms/result.hpp"
#include "dscms/spi_catalog.hpp"
#include "dscms/time.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dscms {

/// One entry of the server-push event stream.
struct EventRecord {
    std::uint64_t seq = 0;
    std::string ts;
    /// breach, trend, alert, gate, check, ingest or recovery.
    std::string type;
    Json payload;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

[[nodiscard]] Json to_json(const EventRecord& event);

/// Everything the service needs to resume, tied to one case version.
struct WorkspaceState {
    SafetyCase safety_case;
    SpiCatalog catalog;
    ObservationStore store;
    std::vector<SpiStatus> statuses;
    std::optional<ImpactReport> last_report;
    std::optional<Alert> last_alert;
    std::vector<GateResult> gates;
    std::vector<OpenRecovery> open_recoveries;
    std::string audit_head;
    /// Evaluation time of the last check.
    std::optional<Timestamp> clock;
    std::vector<EventRecord> events;

    friend bool operator==(const WorkspaceState&, const WorkspaceState&) = default;
};

[[nodiscard]] Json to_json(const WorkspaceState& state);
[[nodiscard]] Result<WorkspaceState> state_from_json(const Json& doc);

/// Fresh state over the bundled case and catalog.
[[nodiscard]] Result<WorkspaceState> bundled_state(Timestamp loaded_at);

struct LoadedSnapshot {
    WorkspaceState state;
    std::uint64_t generation = 0;
    /// Newer generations that failed to load, newest first.
    std::vector<Error> skipped;
};

/// Directory holding numbered snapshot generations and the audit log.
/// Writes go to a temporary file that is synced and then renamed, so a
/// reader sees either the previous or the new generation.
class Workspace {
public:
    static constexpr std::size_t kRetainedGenerations = 3;

    explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

    [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
    [[nodiscard]] std::filesystem::path audit_path() const { return root_ / "audit.log"; }
    [[nodiscard]] bool initialized() const;

    /// Writes a new generation and prunes old ones. Returns its number.
    [[nodiscard]] Result<std::uint64_t> persist(const WorkspaceState& state) const;
    /// Loads the newest generation whose digest verifies.
    [[nodiscard]] Result<LoadedSnapshot> load() const;
    /// Existing generation numbers, ascending.
    [[nodiscard]] std::vector<std::uint64_t> generations() const;
    [[nodiscard]] std::filesystem::path snapshot_path(std::uint64_t generation) const;

private:
    std::filesystem::path root_;
};

}  // namespace dscms
