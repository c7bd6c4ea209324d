#include "dscms/engine.hpp"

#include "dscms/fixtures.hpp"

#include <algorithm>
#include <future>

namespace dscms {

namespace {

Json spi_events(const std::vector<SpiEvent>& events) {
    Json out = Json::array();
    for (const auto& e : events) {
        out.push_back(to_json(e));
    }
    return out;
}

std::set<std::string> breached_set(std::span<const SpiStatus> statuses) {
    std::set<std::string> out;
    for (const auto& s : statuses) {
        if (s.breached) {
            out.insert(s.spi);
        }
    }
    return out;
}

}  // namespace

Json to_json(const CheckSummary& summary) {
    Json j;
    j["evaluated_at"] = summary.evaluated_at;
    j["severity"] = to_string(summary.classification.severity);
    j["impact"] = to_json(summary.report);
    j["breach_events"] = spi_events(summary.breach_events);
    j["trend_events"] = spi_events(summary.trend_events);
    j["alert"] = summary.alert ? to_json(*summary.alert) : Json(nullptr);
    return j;
}

Json to_json(const IngestOutcome& outcome) {
    Json j;
    j["accepted"] = outcome.receipt.accepted;
    j["deduplicated"] = outcome.receipt.deduplicated;
    j["evaluation_trigger"] = outcome.receipt.evaluation_trigger;
    j["check"] = outcome.check ? to_json(*outcome.check) : Json(nullptr);
    return j;
}

ReportInputs report_inputs(const WorkspaceState& state) {
    ReportInputs in;
    in.safety_case = &state.safety_case;
    in.catalog = &state.catalog;
    in.statuses = state.statuses;
    if (state.last_alert) {
        in.alerts = std::span<const Alert>(&*state.last_alert, 1);
    }
    in.gates = state.gates;
    in.impact = state.last_report ? &*state.last_report : nullptr;
    return in;
}

Engine::Engine(WorkspaceState initial, AuditLog audit, std::optional<Workspace> workspace)
    : current_(std::make_shared<const WorkspaceState>(std::move(initial))),
      audit_(std::move(audit)),
      workspace_(std::move(workspace)) {
    writer_ = std::thread([this] { writer_loop(); });
}

Engine::~Engine() {
    {
        std::lock_guard lock(queue_mutex_);
        stopping_ = true;
    }
    queue_ready_.notify_all();
    writer_.join();
}

void Engine::writer_loop() {
    for (;;) {
        std::function<void()> job;
        {
            std::unique_lock lock(queue_mutex_);
            queue_ready_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) {
                return;
            }
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job();
    }
}

template <typename F>
auto Engine::on_writer(F job) -> decltype(job()) {
    using R = decltype(job());
    auto task = std::make_shared<std::packaged_task<R()>>(std::move(job));
    auto result = task->get_future();
    {
        std::lock_guard lock(queue_mutex_);
        queue_.emplace_back([task] { (*task)(); });
    }
    queue_ready_.notify_one();
    return result.get();
}

std::unique_ptr<Engine> Engine::in_memory(WorkspaceState initial) {
    return std::unique_ptr<Engine>(new Engine(std::move(initial), AuditLog{}, std::nullopt));
}

Result<std::unique_ptr<Engine>> Engine::create(const std::filesystem::path& root, WorkspaceState initial) {
    Workspace ws(root);
    if (initial.gates.empty()) {
        for (const auto& def : default_gates()) {
            if (auto g = dscms::evaluate_gate(def.id, default_gates(), initial.safety_case, initial.statuses,
                                              initial.open_recoveries)) {
                initial.gates.push_back(std::move(g).value());
            }
        }
    }
    if (ws.initialized()) {
        return Error::make("workspace-exists", "workspace is already initialized", root.string());
    }
    if (auto persisted = ws.persist(initial); !persisted) {
        return std::move(persisted).errors();
    }
    auto audit = AuditLog::open(ws.audit_path());
    if (!audit) {
        return std::move(audit).errors();
    }
    return std::unique_ptr<Engine>(new Engine(std::move(initial), std::move(audit).value(), std::move(ws)));
}

Result<std::unique_ptr<Engine>> Engine::open(const std::filesystem::path& root) {
    Workspace ws(root);
    auto loaded = ws.load();
    if (!loaded) {
        return std::move(loaded).errors();
    }
    auto audit = AuditLog::open(ws.audit_path());
    if (!audit) {
        return std::move(audit).errors();
    }
    auto snapshot = std::move(loaded).value();
    auto engine = std::unique_ptr<Engine>(
        new Engine(std::move(snapshot.state), std::move(audit).value(), std::move(ws)));
    engine->recovered_from_ = std::move(snapshot.skipped);
    return engine;
}

std::shared_ptr<const WorkspaceState> Engine::snapshot() const {
    std::lock_guard lock(publish_mutex_);
    return current_;
}

void Engine::push_event(WorkspaceState& state, const std::string& ts, std::string type, Json payload) {
    const std::uint64_t seq = state.events.empty() ? 1 : state.events.back().seq + 1;
    state.events.push_back({seq, ts, std::move(type), std::move(payload)});
    if (state.events.size() > kRetainedEvents) {
        state.events.erase(state.events.begin(),
                           state.events.begin() + static_cast<std::ptrdiff_t>(state.events.size() - kRetainedEvents));
    }
}

Result<Unit> Engine::commit(WorkspaceState next, const std::string& ts, const std::string& actor,
                            std::string_view event, Json payload) {
    const AuditRecord record = audit_.append(ts, actor, event, std::move(payload));
    next.audit_head = record.digest;
    if (workspace_) {
        if (auto persisted = workspace_->persist(next); !persisted) {
            return std::move(persisted).errors();
        }
    }
    {
        std::lock_guard lock(publish_mutex_);
        current_ = std::make_shared<const WorkspaceState>(std::move(next));
    }
    published_.notify_all();
    return Unit{};
}

void Engine::refresh_gates(WorkspaceState& state, const std::string& ts) const {
    for (const auto& def : gates_) {
        auto result = dscms::evaluate_gate(def.id, gates_, state.safety_case, state.statuses, state.open_recoveries);
        if (!result) {
            continue;
        }
        auto fresh = std::move(result).value();
        fresh.evaluated_at = ts;
        const auto it = std::find_if(state.gates.begin(), state.gates.end(),
                                     [&](const GateResult& g) { return g.gate == fresh.gate; });
        if (it != state.gates.end() && it->passed == fresh.passed && it->blockers == fresh.blockers) {
            continue;
        }
        const bool flipped = it == state.gates.end() || it->passed != fresh.passed;
        if (flipped) {
            push_event(state, ts, "gate", to_json(fresh));
        }
        if (it != state.gates.end()) {
            *it = std::move(fresh);
        } else {
            state.gates.push_back(std::move(fresh));
        }
    }
    std::sort(state.gates.begin(), state.gates.end(),
              [](const GateResult& a, const GateResult& b) { return a.gate < b.gate; });
}

Result<CheckSummary> Engine::check_into(WorkspaceState& state, Timestamp at,
                                        const std::set<std::string>& changed_artifacts) const {
    auto checked = check(state.safety_case, state.catalog, state.store, at, state.statuses, changed_artifacts);
    if (!checked) {
        return std::move(checked).errors();
    }
    auto result = std::move(checked).value();
    const std::string ts = format_timestamp(at);

    CheckSummary summary;
    summary.evaluated_at = ts;
    summary.breach_events = result.evaluation.breach_events;
    summary.trend_events = result.evaluation.trend_events;
    summary.classification = classify(result.report, apply_statuses(state.safety_case, result.report,
                                                                     result.evaluation.statuses));

    const bool area_changed =
        !state.last_report || state.last_report->impact_area() != result.report.impact_area();
    const bool breach_changed = breached_set(state.statuses) != breached_set(result.evaluation.statuses);
    if (area_changed || breach_changed || !summary.breach_events.empty()) {
        if (auto alert = route(summary.classification.severity, summary.classification.categories)) {
            alert->case_version = result.report.case_version;
            const auto area = result.report.impact_area();
            alert->impact_area.assign(area.begin(), area.end());
            alert->raised_at = ts;
            summary.alert = std::move(alert);
        }
    }

    state.safety_case = apply_statuses(state.safety_case, result.report, result.evaluation.statuses);
    state.statuses = std::move(result.evaluation.statuses);
    state.clock = at;
    if (!result.report.empty()) {
        const std::string id = "restore-v" + std::to_string(state.safety_case.version());
        const bool already_open = std::any_of(state.open_recoveries.begin(), state.open_recoveries.end(),
                                              [&](const OpenRecovery& r) { return r.id == id; });
        if (!already_open) {
            std::string nodes;
            for (const auto& n : result.report.impact_area()) {
                nodes += nodes.empty() ? n : ", " + n;
            }
            state.open_recoveries.push_back({id, "restore invalidated claims: " + nodes});
        }
    }
    for (const auto& e : summary.breach_events) {
        push_event(state, ts, "breach", to_json(e));
    }
    for (const auto& e : summary.trend_events) {
        push_event(state, ts, "trend", to_json(e));
    }
    if (summary.alert) {
        state.last_alert = summary.alert;
        push_event(state, ts, "alert", to_json(*summary.alert));
    }
    summary.report = result.report;
    state.last_report = std::move(result.report);
    refresh_gates(state, ts);
    return summary;
}

Result<IngestOutcome> Engine::ingest(std::vector<Observation> observations, Timestamp at, const std::string& actor) {
    return on_writer([&]() -> Result<IngestOutcome> {
        WorkspaceState next = *snapshot();

        std::vector<Error> unknown;
        for (const auto& obs : observations) {
            if (next.catalog.find(obs.spi) == nullptr) {
                unknown.push_back(Error::make("unknown-spi", "observation refers to an unknown indicator", obs.spi));
            }
        }
        if (!unknown.empty()) {
            return unknown;
        }

        IngestOutcome outcome;
        outcome.receipt = dscms::ingest(next.store, observations);
        if (outcome.receipt.accepted == 0) {
            return outcome;
        }
        auto summary = check_into(next, at, {});
        if (!summary) {
            return std::move(summary).errors();
        }
        outcome.check = std::move(summary).value();
        const std::string ts = format_timestamp(at);
        push_event(next, ts, "ingest", {{"accepted", outcome.receipt.accepted}, {"deduplicated", outcome.receipt.deduplicated}});

        Json payload = to_json(outcome);
        payload["trigger"] = "ingest";
        const std::string_view event = outcome.check->alert ? kAuditAlert : kAuditIngest;
        if (auto committed = commit(std::move(next), ts, actor, event, std::move(payload)); !committed) {
            return std::move(committed).errors();
        }
        return outcome;
    });
}

Result<CheckSummary> Engine::run_check(Timestamp at, const std::string& actor,
                                       const std::set<std::string>& changed_artifacts) {
    return on_writer([&]() -> Result<CheckSummary> {
        WorkspaceState next = *snapshot();
        auto summary = check_into(next, at, changed_artifacts);
        if (!summary) {
            return summary;
        }
        const std::string ts = format_timestamp(at);
        push_event(next, ts, "check", {{"severity", to_string(summary.value().classification.severity)}});
        Json payload = to_json(summary.value());
        payload["trigger"] = "check";
        const std::string_view event = summary.value().alert ? kAuditAlert : kAuditCheck;
        if (auto committed = commit(std::move(next), ts, actor, event, std::move(payload)); !committed) {
            return std::move(committed).errors();
        }
        return summary;
    });
}

Result<IngestOutcome> Engine::simulate(std::string_view scenario, const std::string& actor) {
    auto bundled = fixtures::scenario(scenario);
    if (!bundled) {
        return std::move(bundled).errors();
    }
    auto s = std::move(bundled).value();
    return ingest(std::move(s.observations), s.trigger, actor);
}

Result<RecoveryCommit> Engine::recover(int base_version, const std::vector<RecoveryAction>& actions, Timestamp at,
                                       const std::string& actor) {
    return on_writer([&]() -> Result<RecoveryCommit> {
        WorkspaceState next = *snapshot();
        if (base_version != next.safety_case.version()) {
            return Error::make("stale-version",
                               "recovery was prepared against version " + std::to_string(base_version) +
                                   " but the case is at version " + std::to_string(next.safety_case.version()));
        }
        auto applied = apply_recovery(next.safety_case, next.catalog, actions, at);
        if (!applied) {
            return std::move(applied).errors();
        }
        auto outcome = std::move(applied).value();
        next.safety_case = std::move(outcome.safety_case);
        next.catalog = std::move(outcome.catalog);

        RecoveryCommit out{next.safety_case.version(), outcome.diff};
        const std::string ts = format_timestamp(at);
        push_event(next, ts, "recovery", outcome.diff);
        refresh_gates(next, ts);
        if (auto committed = commit(std::move(next), ts, actor, kAuditRecovery, std::move(outcome.diff)); !committed) {
            return std::move(committed).errors();
        }
        return out;
    });
}

Result<RevalidationReport> Engine::revalidate(Timestamp at, const std::string& actor) {
    return on_writer([&]() -> Result<RevalidationReport> {
        WorkspaceState next = *snapshot();
        auto report = dscms::revalidate(next.safety_case, next.catalog, next.store, at);
        if (!report) {
            return report;
        }
        auto evaluation = evaluate_all(next.catalog, next.store, at, next.statuses);
        next.safety_case = apply_statuses(next.safety_case, report.value().residual, evaluation.statuses);
        next.statuses = std::move(evaluation.statuses);
        next.clock = at;
        next.last_report = report.value().residual;
        if (report.value().clean) {
            next.open_recoveries.clear();
        }

        const std::string ts = format_timestamp(at);
        refresh_gates(next, ts);
        Json payload;
        payload["trigger"] = "revalidate";
        payload["clean"] = report.value().clean;
        payload["residual"] = to_json(report.value().residual);
        push_event(next, ts, "check", payload);
        if (auto committed = commit(std::move(next), ts, actor, kAuditCheck, std::move(payload)); !committed) {
            return std::move(committed).errors();
        }
        return report;
    });
}

Result<GateResult> Engine::evaluate_gate(std::string_view gate, Timestamp at, const std::string& actor) {
    return on_writer([&]() -> Result<GateResult> {
        WorkspaceState next = *snapshot();
        auto result = dscms::evaluate_gate(gate, gates_, next.safety_case, next.statuses, next.open_recoveries);
        if (!result) {
            return result;
        }
        result.value().evaluated_at = format_timestamp(at);
        const auto it = std::find_if(next.gates.begin(), next.gates.end(),
                                     [&](const GateResult& g) { return g.gate == result.value().gate; });
        if (it != next.gates.end()) {
            *it = result.value();
        } else {
            next.gates.push_back(result.value());
            std::sort(next.gates.begin(), next.gates.end(),
                      [](const GateResult& a, const GateResult& b) { return a.gate < b.gate; });
        }
        const std::string ts = format_timestamp(at);
        push_event(next, ts, "gate", to_json(result.value()));
        if (auto committed = commit(std::move(next), ts, actor, kAuditGate, to_json(result.value())); !committed) {
            return std::move(committed).errors();
        }
        return result;
    });
}

std::vector<EventRecord> Engine::events_since(std::uint64_t after) const {
    const auto state = snapshot();
    std::vector<EventRecord> out;
    for (const auto& e : state->events) {
        if (e.seq > after) {
            out.push_back(e);
        }
    }
    return out;
}

std::vector<EventRecord> Engine::wait_for_events(std::uint64_t after, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(publish_mutex_);
    published_.wait_for(lock, timeout,
                        [&] { return !current_->events.empty() && current_->events.back().seq > after; });
    const auto state = current_;
    lock.unlock();
    std::vector<EventRecord> out;
    for (const auto& e : state->events) {
        if (e.seq > after) {
            out.push_back(e);
        }
    }
    return out;
}

}  // namespace dscms
