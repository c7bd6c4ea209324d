#include "dscms/workspace.hpp"

#include "dscms/digest.hpp"
#include "dscms/fixtures.hpp"
#include "dscms/ingestion.hpp"
#include "json_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dscms {

namespace {

constexpr std::string_view kSnapshotPrefix = "snapshot-";
constexpr std::string_view kSnapshotSuffix = ".json";

Error io_error(const std::string& what, const std::filesystem::path& path) {
    return Error::make("io-error", what + ": " + std::strerror(errno), path.string());
}

/// Writes bytes to `path` and flushes them to stable storage.
Result<Unit> write_synced(const std::filesystem::path& path, std::string_view bytes) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) {
        return io_error("cannot open", path);
    }
    std::size_t written = 0;
    while (written < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            ::close(fd);
            return io_error("cannot write", path);
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        return io_error("cannot sync", path);
    }
    ::close(fd);
    return Unit{};
}

void sync_directory(const std::filesystem::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Json event_list(const std::vector<EventRecord>& events) {
    Json out = Json::array();
    for (const auto& e : events) {
        out.push_back(to_json(e));
    }
    return out;
}

}  // namespace

Json to_json(const EventRecord& event) {
    Json j;
    j["seq"] = event.seq;
    j["ts"] = event.ts;
    j["type"] = event.type;
    j["payload"] = event.payload;
    return j;
}

Json to_json(const WorkspaceState& state) {
    Json j;
    j["case"] = to_json(state.safety_case);
    j["catalog"] = to_json(state.catalog);
    Json store = Json::array();
    for (const auto& obs : state.store.all()) {
        store.push_back(to_json(obs));
    }
    j["observations"] = std::move(store);
    Json statuses = Json::array();
    for (const auto& s : state.statuses) {
        statuses.push_back(to_json(s));
    }
    j["statuses"] = std::move(statuses);
    j["last_report"] = state.last_report ? to_json(*state.last_report) : Json(nullptr);
    j["last_alert"] = state.last_alert ? to_json(*state.last_alert) : Json(nullptr);
    Json gates = Json::array();
    for (const auto& g : state.gates) {
        gates.push_back(to_json(g));
    }
    j["gates"] = std::move(gates);
    Json open = Json::array();
    for (const auto& r : state.open_recoveries) {
        open.push_back(to_json(r));
    }
    j["open_recoveries"] = std::move(open);
    j["audit_head"] = state.audit_head;
    j["clock"] = state.clock ? Json(format_timestamp(*state.clock)) : Json(nullptr);
    j["events"] = event_list(state.events);
    return j;
}

Result<WorkspaceState> state_from_json(const Json& doc) {
    if (!doc.is_object()) {
        return Error::make("bad-snapshot", "snapshot state must be an object");
    }
    const auto need = [&](const char* key) -> const Json* {
        const auto it = doc.find(key);
        return it == doc.end() ? nullptr : &*it;
    };
    WorkspaceState state;
    std::vector<Error> errors;
    const auto absorb = [&](const std::vector<Error>& errs) { errors.insert(errors.end(), errs.begin(), errs.end()); };

    if (const Json* c = need("case")) {
        if (auto parsed = case_from_json(*c)) {
            state.safety_case = std::move(parsed).value();
        } else {
            absorb(parsed.errors());
        }
    } else {
        errors.push_back(Error::make("bad-snapshot", "missing case"));
    }
    if (const Json* c = need("catalog")) {
        if (auto parsed = catalog_from_json(*c)) {
            state.catalog = std::move(parsed).value();
        } else {
            absorb(parsed.errors());
        }
    } else {
        errors.push_back(Error::make("bad-snapshot", "missing catalog"));
    }
    if (const Json* obs = need("observations"); obs != nullptr && obs->is_array()) {
        for (const auto& o : *obs) {
            if (auto parsed = observation_from_json(o)) {
                state.store.add(std::move(parsed).value());
            } else {
                absorb(parsed.errors());
            }
        }
    } else {
        errors.push_back(Error::make("bad-snapshot", "missing observations"));
    }
    if (const Json* st = need("statuses"); st != nullptr && st->is_array()) {
        for (const auto& s : *st) {
            if (auto parsed = spi_status_from_json(s)) {
                state.statuses.push_back(std::move(parsed).value());
            } else {
                absorb(parsed.errors());
            }
        }
    } else {
        errors.push_back(Error::make("bad-snapshot", "missing statuses"));
    }
    if (const Json* r = need("last_report"); r != nullptr && !r->is_null()) {
        if (auto parsed = impact_report_from_json(*r)) {
            state.last_report = std::move(parsed).value();
        } else {
            absorb(parsed.errors());
        }
    }
    if (const Json* a = need("last_alert"); a != nullptr && !a->is_null()) {
        if (auto parsed = alert_from_json(*a)) {
            state.last_alert = std::move(parsed).value();
        } else {
            absorb(parsed.errors());
        }
    }
    if (const Json* g = need("gates"); g != nullptr && g->is_array()) {
        for (const auto& item : *g) {
            if (auto parsed = gate_result_from_json(item)) {
                state.gates.push_back(std::move(parsed).value());
            } else {
                absorb(parsed.errors());
            }
        }
    }
    if (const Json* o = need("open_recoveries"); o != nullptr && o->is_array()) {
        for (const auto& item : *o) {
            state.open_recoveries.push_back({item.value("id", ""), item.value("description", "")});
        }
    }
    state.audit_head = doc.value("audit_head", "");
    if (const Json* clock = need("clock"); clock != nullptr && clock->is_string()) {
        state.clock = parse_timestamp(clock->get<std::string>());
        if (!state.clock) {
            errors.push_back(Error::make("bad-snapshot", "unparseable clock"));
        }
    }
    if (const Json* ev = need("events"); ev != nullptr && ev->is_array()) {
        for (const auto& e : *ev) {
            EventRecord rec;
            rec.seq = e.value("seq", std::uint64_t{0});
            rec.ts = e.value("ts", "");
            rec.type = e.value("type", "");
            rec.payload = e.contains("payload") ? e.at("payload") : Json(nullptr);
            state.events.push_back(std::move(rec));
        }
    }
    if (!errors.empty()) {
        return errors;
    }
    return state;
}

Result<WorkspaceState> bundled_state(Timestamp loaded_at) {
    auto safety_case = fixtures::cyber_case();
    if (!safety_case) {
        return std::move(safety_case).errors();
    }
    auto catalog = fixtures::cyber_catalog(loaded_at);
    if (!catalog) {
        return std::move(catalog).errors();
    }
    WorkspaceState state;
    state.safety_case = std::move(safety_case).value();
    state.catalog = std::move(catalog).value();
    return state;
}

bool Workspace::initialized() const {
    return !generations().empty();
}

std::filesystem::path Workspace::snapshot_path(std::uint64_t generation) const {
    char name[32];
    std::snprintf(name, sizeof name, "%s%08llu%s", kSnapshotPrefix.data(), static_cast<unsigned long long>(generation),
                  kSnapshotSuffix.data());
    return root_ / name;
}

std::vector<std::uint64_t> Workspace::generations() const {
    std::vector<std::uint64_t> out;
    std::error_code ec;
    if (!std::filesystem::is_directory(root_, ec)) {
        return out;
    }
    for (const auto& entry : std::filesystem::directory_iterator(root_, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.size() <= kSnapshotPrefix.size() + kSnapshotSuffix.size() || !name.starts_with(kSnapshotPrefix) ||
            !name.ends_with(kSnapshotSuffix)) {
            continue;
        }
        const std::string digits =
            name.substr(kSnapshotPrefix.size(), name.size() - kSnapshotPrefix.size() - kSnapshotSuffix.size());
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            continue;
        }
        out.push_back(std::stoull(digits));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Result<std::uint64_t> Workspace::persist(const WorkspaceState& state) const {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) {
        return Error::make("io-error", "cannot create workspace: " + ec.message(), root_.string());
    }
    const auto existing = generations();
    const std::uint64_t generation = existing.empty() ? 1 : existing.back() + 1;

    Json body = to_json(state);
    const std::string state_text = body.dump();
    Json envelope;
    envelope["generation"] = generation;
    envelope["digest"] = content_digest(state_text);
    envelope["state"] = std::move(body);
    const std::string bytes = envelope.dump() + "\n";

    const auto final_path = snapshot_path(generation);
    auto tmp_path = final_path;
    tmp_path += ".tmp";
    if (auto written = write_synced(tmp_path, bytes); !written) {
        return std::move(written).errors();
    }
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) {
        return Error::make("io-error", "cannot publish snapshot: " + ec.message(), final_path.string());
    }
    sync_directory(root_);

    auto all = generations();
    while (all.size() > kRetainedGenerations) {
        std::filesystem::remove(snapshot_path(all.front()), ec);
        all.erase(all.begin());
    }
    return generation;
}

Result<LoadedSnapshot> Workspace::load() const {
    auto all = generations();
    if (all.empty()) {
        return Error::make("no-snapshot", "workspace has no snapshot; run init first", root_.string());
    }
    LoadedSnapshot out;
    for (auto it = all.rbegin(); it != all.rend(); ++it) {
        const auto path = snapshot_path(*it);
        const std::string text = read_file(path);
        Json envelope;
        try {
            envelope = Json::parse(text);
        } catch (const Json::exception&) {
            out.skipped.push_back(Error::make("corrupt-snapshot", "snapshot does not parse", path.string()));
            continue;
        }
        if (!envelope.is_object() || !envelope.contains("state") || !envelope.contains("digest") ||
            !envelope.at("digest").is_string()) {
            out.skipped.push_back(Error::make("corrupt-snapshot", "snapshot envelope incomplete", path.string()));
            continue;
        }
        if (content_digest(envelope.at("state").dump()) != envelope.at("digest").get<std::string>()) {
            out.skipped.push_back(Error::make("digest-mismatch", "snapshot digest mismatch", path.string()));
            continue;
        }
        auto state = state_from_json(envelope.at("state"));
        if (!state) {
            out.skipped.push_back(Error::make("corrupt-snapshot", state.error().message, path.string()));
            continue;
        }
        out.state = std::move(state).value();
        out.generation = *it;
        return out;
    }
    return out.skipped;
}

}  // namespace dscms
