// Command-line entry point for the dynamic safety case monitor.

#include "http_server.hpp"

#include "dscms/api.hpp"
#include "dscms/argument_model.hpp"
#include "dscms/audit.hpp"
#include "dscms/engine.hpp"
#include "dscms/fixtures.hpp"
#include "dscms/ingestion.hpp"
#include "dscms/spi_catalog.hpp"
#include "dscms/traceability.hpp"
#include "dscms/workspace.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using dscms::Error;
using dscms::Json;

namespace {

constexpr int kExitFailure = 1;
constexpr std::string_view kActor = "cli";

int fail(const std::vector<Error>& errors) {
    for (const auto& e : errors) {
        Json j;
        j["error"] = e.code;
        j["message"] = e.message;
        if (!e.location.empty()) {
            j["location"] = e.location;
        }
        std::cerr << j.dump() << '\n';
    }
    return kExitFailure;
}

int fail(const Error& error) {
    return fail(std::vector<Error>{error});
}

void print(const Json& doc) {
    std::cout << doc.dump(2) << '\n';
}

dscms::Result<std::string> read_text(const std::string& path) {
    if (path == "-") {
        std::stringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return Error::make("io-error", "cannot read file", path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

dscms::Result<dscms::Timestamp> resolve_time(const std::string& text) {
    if (text.empty()) {
        return dscms::now_utc();
    }
    if (const auto ts = dscms::parse_timestamp(text)) {
        return *ts;
    }
    return Error::make("bad-timestamp", "not an RFC 3339 timestamp with zone", text);
}

/// Catalog documents from files, or every *.json file of a directory.
dscms::Result<std::vector<std::string>> read_catalog_documents(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<std::string> in_dir;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.path().extension() == ".json") {
                    in_dir.push_back(entry.path().string());
                }
            }
            std::sort(in_dir.begin(), in_dir.end());
            files.insert(files.end(), in_dir.begin(), in_dir.end());
        } else {
            files.push_back(p);
        }
    }
    std::vector<std::string> docs;
    std::vector<Error> errors;
    for (const auto& f : files) {
        if (auto text = read_text(f)) {
            docs.push_back(std::move(text).value());
        } else {
            errors.push_back(text.error());
        }
    }
    if (!errors.empty()) {
        return errors;
    }
    return docs;
}

struct Context {
    std::string workspace;

    [[nodiscard]] dscms::Result<std::unique_ptr<dscms::Engine>> open() const {
        return dscms::Engine::open(workspace);
    }
};

int cmd_init(const Context& ctx, const std::string& case_path, const std::vector<std::string>& catalog_paths,
             const std::string& at_text) {
    auto at = resolve_time(at_text);
    if (!at) {
        return fail(at.errors());
    }
    dscms::WorkspaceState state;
    if (case_path.empty() && catalog_paths.empty()) {
        auto bundled = dscms::bundled_state(at.value());
        if (!bundled) {
            return fail(bundled.errors());
        }
        state = std::move(bundled).value();
    } else {
        if (case_path.empty() || catalog_paths.empty()) {
            return fail(Error::make("usage", "--case and --catalog must be given together"));
        }
        auto text = read_text(case_path);
        if (!text) {
            return fail(text.errors());
        }
        auto parsed = dscms::parse_case(text.value());
        if (!parsed) {
            return fail(parsed.errors());
        }
        auto docs = read_catalog_documents(catalog_paths);
        if (!docs) {
            return fail(docs.errors());
        }
        auto catalog = dscms::load_catalog(docs.value(), at.value());
        if (!catalog) {
            return fail(catalog.errors());
        }
        state.safety_case = std::move(parsed).value();
        state.catalog = std::move(catalog).value();
    }
    auto engine = dscms::Engine::create(ctx.workspace, std::move(state));
    if (!engine) {
        return fail(engine.errors());
    }
    const auto snap = engine.value()->snapshot();
    print({{"workspace", fs::absolute(ctx.workspace).string()},
           {"case_id", snap->safety_case.case_id()},
           {"case_version", snap->safety_case.version()},
           {"spis", snap->catalog.defs().size()}});
    return 0;
}

int cmd_validate(const std::string& case_path, const std::vector<std::string>& catalog_paths) {
    auto text = read_text(case_path);
    if (!text) {
        return fail(text.errors());
    }
    auto docs = read_catalog_documents(catalog_paths);
    if (!docs) {
        return fail(docs.errors());
    }
    auto parsed = dscms::parse_case(text.value());
    if (!parsed) {
        return fail(parsed.errors());
    }
    auto catalog = dscms::load_catalog(docs.value(), dscms::now_utc());
    if (!catalog) {
        return fail(catalog.errors());
    }
    const auto warnings = dscms::validate_traceability(parsed.value(), catalog.value());
    Json out;
    out["case_id"] = parsed.value().case_id();
    out["nodes"] = parsed.value().nodes().size();
    out["edges"] = parsed.value().edges().size();
    out["spis"] = catalog.value().defs().size();
    Json list = Json::array();
    for (const auto& w : warnings) {
        list.push_back(Json{{"code", w.code}, {"element", w.element}});
    }
    out["traceability_warnings"] = std::move(list);
    out["clean"] = warnings.empty();
    print(out);
    return warnings.empty() ? 0 : kExitFailure;
}

int cmd_ingest(const Context& ctx, const std::string& path, const std::string& at_text) {
    auto at = resolve_time(at_text);
    if (!at) {
        return fail(at.errors());
    }
    auto text = read_text(path);
    if (!text) {
        return fail(text.errors());
    }
    auto parsed = dscms::parse_observations(text.value());
    if (!parsed.errors.empty()) {
        std::vector<Error> errors;
        for (const auto& e : parsed.errors) {
            errors.push_back(Error::make(e.code, e.message, path + ":" + std::to_string(e.line)));
        }
        return fail(errors);
    }
    auto engine = ctx.open();
    if (!engine) {
        return fail(engine.errors());
    }
    auto outcome = engine.value()->ingest(std::move(parsed.observations), at.value(), std::string(kActor));
    if (!outcome) {
        return fail(outcome.errors());
    }
    print(to_json(outcome.value()));
    return 0;
}

int cmd_check(const Context& ctx, const std::string& at_text) {
    auto at = resolve_time(at_text);
    if (!at) {
        return fail(at.errors());
    }
    auto engine = ctx.open();
    if (!engine) {
        return fail(engine.errors());
    }
    auto summary = engine.value()->run_check(at.value(), std::string(kActor));
    if (!summary) {
        return fail(summary.errors());
    }
    std::cout << dscms::serialize_report(summary.value().report);
    return 0;
}

int cmd_simulate(const Context& ctx, const std::string& name) {
    auto scenario = dscms::fixtures::scenario(name);
    if (!scenario) {
        return fail(scenario.errors());
    }
    std::unique_ptr<dscms::Engine> engine;
    if (dscms::Workspace(ctx.workspace).initialized()) {
        auto opened = ctx.open();
        if (!opened) {
            return fail(opened.errors());
        }
        engine = std::move(opened).value();
    } else {
        auto state = dscms::bundled_state(scenario.value().trigger);
        if (!state) {
            return fail(state.errors());
        }
        engine = dscms::Engine::in_memory(std::move(state).value());
    }
    auto outcome = engine->simulate(name, std::string(kActor));
    if (!outcome) {
        return fail(outcome.errors());
    }
    const auto snap = engine->snapshot();
    Json out;
    out["scenario"] = name;
    out["title"] = scenario.value().title;
    out["trigger"] = dscms::format_timestamp(scenario.value().trigger);
    out["accepted"] = outcome.value().receipt.accepted;
    out["report"] = snap->last_report ? to_json(*snap->last_report) : Json(nullptr);
    const auto* check = outcome.value().check ? &*outcome.value().check : nullptr;
    out["severity"] = check ? std::string(to_string(check->classification.severity)) : "none";
    out["alert"] = check && check->alert ? to_json(*check->alert) : Json(nullptr);
    print(out);
    return 0;
}

int cmd_recover(const Context& ctx, const std::string& path, int base_version_override, const std::string& at_text) {
    auto at = resolve_time(at_text);
    if (!at) {
        return fail(at.errors());
    }
    auto text = read_text(path);
    if (!text) {
        return fail(text.errors());
    }
    Json doc;
    try {
        doc = Json::parse(text.value());
    } catch (const Json::parse_error& e) {
        return fail(Error::make("bad-document", e.what(), path));
    }
    const Json* actions_doc = &doc;
    int base_version = base_version_override;
    if (doc.is_object()) {
        if (!doc.contains("actions")) {
            return fail(Error::make("missing-field", "missing field 'actions'", path));
        }
        actions_doc = &doc.at("actions");
        if (base_version < 0 && doc.contains("base_version") && doc.at("base_version").is_number_integer()) {
            base_version = doc.at("base_version").get<int>();
        }
    }
    auto actions = dscms::parse_recovery_actions(*actions_doc);
    if (!actions) {
        return fail(actions.errors());
    }
    auto engine = ctx.open();
    if (!engine) {
        return fail(engine.errors());
    }
    if (base_version < 0) {
        base_version = engine.value()->snapshot()->safety_case.version();
    }
    auto committed = engine.value()->recover(base_version, actions.value(), at.value(), std::string(kActor));
    if (!committed) {
        return fail(committed.errors());
    }
    print({{"version", committed.value().version}, {"diff", committed.value().diff}});
    return 0;
}

int cmd_revalidate(const Context& ctx, const std::string& at_text) {
    auto at = resolve_time(at_text);
    if (!at) {
        return fail(at.errors());
    }
    auto engine = ctx.open();
    if (!engine) {
        return fail(engine.errors());
    }
    auto report = engine.value()->revalidate(at.value(), std::string(kActor));
    if (!report) {
        return fail(report.errors());
    }
    print({{"clean", report.value().clean}, {"residual", to_json(report.value().residual)}});
    return report.value().clean ? 0 : kExitFailure;
}

int cmd_gate(const Context& ctx, const std::string& gate, const std::string& at_text) {
    auto at = resolve_time(at_text);
    if (!at) {
        return fail(at.errors());
    }
    auto engine = ctx.open();
    if (!engine) {
        return fail(engine.errors());
    }
    auto result = engine.value()->evaluate_gate(gate, at.value(), std::string(kActor));
    if (!result) {
        return fail(result.errors());
    }
    print(to_json(result.value()));
    return result.value().passed ? 0 : kExitFailure;
}

int cmd_report(const Context& ctx) {
    auto engine = ctx.open();
    if (!engine) {
        return fail(engine.errors());
    }
    const auto snap = engine.value()->snapshot();
    std::cout << dscms::render_governance_report(dscms::report_inputs(*snap));
    return 0;
}

int cmd_audit_verify(const Context& ctx, const std::string& path) {
    const std::string log_path = path.empty() ? dscms::Workspace(ctx.workspace).audit_path().string() : path;
    auto text = read_text(log_path);
    if (!text) {
        return fail(text.errors());
    }
    const auto verdict = dscms::verify_chain(text.value());
    Json out;
    out["log"] = log_path;
    out["ok"] = verdict.ok;
    if (!verdict.ok) {
        out["first_bad_line"] = verdict.first_bad ? Json(*verdict.first_bad) : Json(nullptr);
        out["reason"] = verdict.reason;
    }
    print(out);
    return verdict.ok ? 0 : kExitFailure;
}

dscms::http::Server* g_server = nullptr;

extern "C" void handle_signal(int) {
    if (g_server != nullptr) {
        g_server->stop();
    }
}

int cmd_serve(const Context& ctx, const std::string& addr, const std::string& token_file) {
    const auto colon = addr.rfind(':');
    int port = -1;
    if (colon != std::string::npos) {
        try {
            port = std::stoi(addr.substr(colon + 1));
        } catch (const std::exception&) {
            port = -1;
        }
    }
    if (colon == std::string::npos || port < 0 || port > 65535) {
        return fail(Error::make("usage", "--addr must be host:port", addr));
    }
    const std::string host = addr.substr(0, colon);
    auto tokens = read_text(token_file);
    if (!tokens) {
        return fail(tokens.errors());
    }
    auto policy = dscms::AccessPolicy::parse(tokens.value());
    if (!policy) {
        return fail(policy.errors());
    }
    auto engine = ctx.open();
    if (!engine) {
        return fail(engine.errors());
    }
    for (const auto& skipped : engine.value()->recovered_from()) {
        fail(skipped);
    }
    dscms::Api api(*engine.value(), std::move(policy).value());
    dscms::http::Server server(api);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cerr << Json({{"event", "listening"}, {"addr", addr}}).dump() << '\n';
    const bool ok = server.listen(host, port);
    g_server = nullptr;
    if (!ok) {
        return fail(Error::make("bind-failed", "cannot listen", addr));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic safety case monitor"};
    app.require_subcommand(1);

    Context ctx;
    const char* env_workspace = std::getenv("DSCMS_WORKSPACE");
    ctx.workspace = env_workspace != nullptr && *env_workspace != '\0' ? env_workspace : ".dscms";
    app.add_option("-w,--workspace", ctx.workspace, "Workspace directory (env DSCMS_WORKSPACE)");

    std::string at;
    std::string case_path;
    std::vector<std::string> catalog_paths;

    auto* init = app.add_subcommand("init", "Create a workspace from the bundled or given case and catalog");
    init->add_option("--case", case_path, "Case document");
    init->add_option("--catalog", catalog_paths, "Catalog files or directories");
    init->add_option("--at", at, "Catalog load time (default now)");

    auto* validate = app.add_subcommand("validate", "Check structure and traceability; exit 0 iff clean");
    validate->add_option("case", case_path, "Case document")->required();
    validate->add_option("catalog", catalog_paths, "Catalog files or directories")->required();

    std::string file;
    auto* ingest = app.add_subcommand("ingest", "Store observations and run a check");
    ingest->add_option("file", file, "Observation file, one record per line ('-' for stdin)")->required();
    ingest->add_option("--at", at, "Check time (default now)");

    auto* check = app.add_subcommand("check", "Evaluate indicators and print the impact report");
    check->add_option("--at", at, "Evaluation time (default now)");

    std::string name;
    auto* simulate = app.add_subcommand(
        "simulate", "Replay a bundled scenario; uses the workspace when it exists, otherwise a fresh in-memory case");
    simulate->add_option("scenario", name, "Scenario name, e.g. scenario-1")->required();

    int base_version = -1;
    auto* recover = app.add_subcommand("recover", "Apply a batch of recovery actions");
    recover->add_option("file", file, "Recovery document")->required();
    recover->add_option("--base-version", base_version, "Case version the batch was prepared against");
    recover->add_option("--at", at, "Recovery time (default now)");

    auto* revalidate = app.add_subcommand("revalidate", "Re-run the check after recovery; exit 0 iff clean");
    revalidate->add_option("--at", at, "Evaluation time (default now)");

    std::string gate;
    auto* gate_cmd = app.add_subcommand("gate", "Evaluate a lifecycle gate; exit 0 iff it passes");
    gate_cmd->add_option("gate", gate, "Gate id, e.g. G3")->required();
    gate_cmd->add_option("--at", at, "Evaluation time (default now)");

    auto* report = app.add_subcommand("report", "Print the governance report");

    auto* audit = app.add_subcommand("audit", "Audit log commands");
    audit->require_subcommand(1);
    std::string log_path;
    auto* verify = audit->add_subcommand("verify", "Verify the hash chain of an audit log");
    verify->add_option("log", log_path, "Log file (default: the workspace log)");

    std::string addr = "127.0.0.1:8080";
    std::string token_file;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP interface");
    serve->add_option("--addr", addr, "host:port to listen on");
    serve->add_option("--token-file", token_file, "Bearer token and scope configuration")->required();

    CLI11_PARSE(app, argc, argv);

    if (*init) {
        return cmd_init(ctx, case_path, catalog_paths, at);
    }
    if (*validate) {
        return cmd_validate(case_path, catalog_paths);
    }
    if (*ingest) {
        return cmd_ingest(ctx, file, at);
    }
    if (*check) {
        return cmd_check(ctx, at);
    }
    if (*simulate) {
        return cmd_simulate(ctx, name);
    }
    if (*recover) {
        return cmd_recover(ctx, file, base_version, at);
    }
    if (*revalidate) {
        return cmd_revalidate(ctx, at);
    }
    if (*gate_cmd) {
        return cmd_gate(ctx, gate, at);
    }
    if (*report) {
        return cmd_report(ctx);
    }
    if (*verify) {
        return cmd_audit_verify(ctx, log_path);
    }
    if (*serve) {
        return cmd_serve(ctx, addr, token_file);
    }
    return kExitFailure;
}
