// toolrange CLI: build tool universes, validate them, index and serve
// retrieval, synthesize tasks, run planner-actor episodes under fault
// policies, evaluate trajectories, and curate SFT exports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "toolrange/agent/runtime.hpp"
#include "toolrange/eval/analytics.hpp"
#include "toolrange/harness/curation.hpp"
#include "toolrange/harness/leaderboard.hpp"
#include "toolrange/harness/store.hpp"
#include "toolrange/llm/gateway.hpp"
#include "toolrange/mcp/dispatcher.hpp"
#include "toolrange/registry/synthetic.hpp"
#include "toolrange/registry/validation.hpp"
#include "toolrange/retrieval/service.hpp"
#include "toolrange/tasks/engine.hpp"

namespace fs = std::filesystem;
using namespace toolrange;

namespace {

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return Json::parse(in);
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << j.dump(2) << "\n";
}

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string config_path;
    int parallelism = 1;
    Json config = Json::object();

    Json section(const std::string& name) const { return config.value(name, Json::object()); }
};

llm::Gateway gateway_from(const GlobalOptions& global, const std::string& profiles_path) {
    llm::Gateway gateway;
    if (!profiles_path.empty()) {
        Json doc = load_json_file(profiles_path);
        const Json list = doc.is_array() ? doc : doc.value("profiles", Json::array());
        for (const auto& p : list) gateway.add_profile(llm::GatewayProfile::from_json(p));
    }
    for (const auto& p : global.section("gateway_profiles")) {
        gateway.add_profile(llm::GatewayProfile::from_json(p));
    }
    return gateway;
}

std::vector<tasks::TaskSpec> load_tasks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tasks file: " + path);
    std::vector<tasks::TaskSpec> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(tasks::TaskSpec::from_json(Json::parse(line)));
    }
    return out;
}

std::vector<harness::TrajectoryRecord> load_traj_dir(const std::string& dir) {
    std::vector<harness::TrajectoryRecord> records;
    std::vector<fs::path> files;
    if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(dir);
    }
    for (const auto& file : files) {
        auto report = harness::load_trajectories(file.string(), /*skip_corrupt=*/false);
        for (auto& r : report.records) records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------

int cmd_universe(const GlobalOptions& global, std::uint64_t seed, int servers, int tools,
                 double flaky_fraction, double flaky_rate, const std::string& out) {
    (void)global;
    registry::BehaviorProfile profile;
    profile.flaky_fraction = flaky_fraction;
    profile.flaky_rate = flaky_rate;
    auto reg = registry::generate_synthetic_universe(seed, servers, tools, profile);
    reg.save_file(out);
    std::cout << "wrote " << reg.tool_count() << " tools across " << reg.servers().size()
              << " servers to " << out << "\n";
    return 0;
}

int cmd_validate(const GlobalOptions& global, const std::string& registry_path,
                 const std::string& out, const std::vector<std::string>& credentials) {
    (void)global;
    auto reg = registry::Registry::load_file(registry_path);
    registry::Persona persona;
    persona.credential_refs = credentials;
    if (credentials.empty()) {
        // grant every referenced credential; offline validation exercises
        // the pipeline rather than real secrets
        for (const auto& server : reg.servers())
            if (server.credential_ref) persona.credential_refs.push_back(*server.credential_ref);
    }
    auto validation = registry::validate_registry(reg, persona);
    write_json_file(out, validation.to_json());
    std::cout << "working set: " << validation.working_set.size() << " / " << reg.tool_count()
              << " tools\n";
    return 0;
}

int cmd_index_build(const GlobalOptions& global, const std::string& registry_path,
                    const std::string& out_dir) {
    auto reg = registry::Registry::load_file(registry_path);
    std::vector<retrieval::ToolDocument> documents;
    documents.reserve(reg.tool_count());
    for (const auto& tool : reg.tools()) documents.push_back(retrieval::build_document(tool));
    const Json retrieval_cfg = global.section("retrieval");
    const int dim = retrieval_cfg.value("dim", 256);
    auto index = retrieval::ToolIndex::build(documents,
                                             std::make_shared<retrieval::HashEmbedder>(dim));
    index.save(out_dir);
    std::cout << "indexed " << index.size() << " documents (dim " << index.dim() << ") into "
              << out_dir << "\n";
    return 0;
}

int cmd_index_serve(const GlobalOptions&, const std::string& dir, int port,
                    const std::string& host) {
    auto index = retrieval::ToolIndex::load(dir);
    retrieval::SearchService service(index, host, port);
    std::cout << "search_tools serving on " << host << ":" << service.port() << "\n";
    // Foreground service; terminate with SIGINT.
    for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
    return 0;
}

int cmd_serve_stdio(const GlobalOptions&, const std::string& registry_path) {
    auto reg = registry::Registry::load_file(registry_path);
    mcp::Dispatcher dispatcher("toolrange-registry");
    for (const auto& tool : reg.tools()) {
        dispatcher.add_tool(mcp::ServedTool{
            tool.tool_id,  // unambiguous wire name across servers
            tool.description,
            tool.input_schema,
            [&reg, tool_id = tool.tool_id](const Json& args) {
                return reg.invoke(tool_id, args);
            },
        });
    }
    mcp::serve_stdio(dispatcher, std::cin, std::cout);
    return 0;
}

int cmd_synthesize(const GlobalOptions& global, const std::string& registry_path,
                   const std::string& index_dir, int n, std::uint64_t seed,
                   const std::string& out, const std::string& profiles_path,
                   const std::string& profile) {
    auto reg = registry::Registry::load_file(registry_path);
    auto index = retrieval::ToolIndex::load(index_dir);
    auto gateway = gateway_from(global, profiles_path);

    tasks::EngineConfig config = tasks::EngineConfig::from_json(global.section("task_engine"));
    if (!profile.empty()) config.gateway_profile = profile;

    auto specs = tasks::synthesize_tasks(reg, index, config, seed, n, gateway);
    std::ofstream out_file(out, std::ios::trunc);
    if (!out_file) throw std::runtime_error("cannot write: " + out);
    for (const auto& task : specs) out_file << task.to_json().dump() << "\n";
    std::cout << "synthesized " << specs.size() << " tasks into " << out << "\n";
    return 0;
}

int cmd_run(const GlobalOptions& global, const std::string& tasks_path,
            const std::string& registry_path, const std::string& index_dir,
            const std::vector<std::string>& models, const std::string& policy_path, int runs,
            const std::string& out_dir, const std::string& profiles_path) {
    auto reg = registry::Registry::load_file(registry_path);
    auto index = retrieval::ToolIndex::load(index_dir);
    auto gateway = gateway_from(global, profiles_path);
    auto task_list = load_tasks(tasks_path);

    std::optional<faults::InterventionPolicy> policy;
    if (!policy_path.empty()) policy = faults::InterventionPolicy::load(policy_path);

    agent::RuntimeConfig runtime_config =
        agent::RuntimeConfig::from_json(global.section("runtime"));

    struct Job {
        const tasks::TaskSpec* task;
        std::string model;
        int run_index;
    };
    std::vector<Job> jobs;
    for (const auto& model : models)
        for (const auto& task : task_list)
            for (int run = 0; run < runs; ++run) jobs.push_back(Job{&task, model, run});

    std::vector<harness::TrajectoryRecord> records(jobs.size());
    std::mutex failure_mutex;
    std::vector<std::string> failures;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            agent::RuntimeConfig cfg = runtime_config;
            cfg.planner_profile = job.model;
            cfg.actor_profile = job.model;
            try {
                harness::TrajectoryRecord record;
                record.task_id = job.task->task_id;
                record.run_index = job.run_index;
                record.model = job.model;
                record.trajectory =
                    agent::run_episode(*job.task, cfg, gateway, reg, index,
                                       policy ? &*policy : nullptr, job.run_index);
                records[i] = std::move(record);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                failures.push_back(job.task->task_id + "#" + std::to_string(job.run_index) +
                                   ": " + e.what());
            }
        }
    };

    const int threads = std::max(1, global.parallelism);
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (const auto& f : failures) std::cerr << "episode failed: " << f << "\n";

    fs::create_directories(out_dir);
    std::map<std::string, std::vector<harness::TrajectoryRecord>> by_model;
    for (auto& record : records) {
        if (record.task_id.empty()) continue;  // failed episode slot
        by_model[record.model].push_back(std::move(record));
    }
    std::size_t stored = 0;
    for (auto& [model, model_records] : by_model) {
        std::sort(model_records.begin(), model_records.end(),
                  [](const auto& a, const auto& b) {
                      return std::tie(a.task_id, a.run_index) < std::tie(b.task_id, b.run_index);
                  });
        harness::store_trajectories(model_records,
                                    (fs::path(out_dir) / (model + ".jsonl")).string());
        stored += model_records.size();
    }
    std::cout << "stored " << stored << " trajectories in " << out_dir << "\n";
    return failures.empty() ? 0 : 1;
}

int cmd_evaluate(const GlobalOptions& global, const std::string& traj_dir,
                 const std::string& tasks_path, const std::string& registry_path,
                 const std::string& judges_path, const std::string& out_dir,
                 const std::string& profiles_path) {
    auto reg = registry::Registry::load_file(registry_path);
    auto task_list = load_tasks(tasks_path);
    std::map<std::string, tasks::TaskSpec> task_map;
    for (auto& t : task_list) task_map[t.task_id] = t;

    Json judges_doc = load_json_file(judges_path);
    llm::Gateway gateway = gateway_from(global, profiles_path);
    for (const auto& p : judges_doc.value("profiles", Json::array()))
        gateway.add_profile(llm::GatewayProfile::from_json(p));
    eval::JudgeConfig judges = eval::JudgeConfig::from_json(judges_doc);

    Json weights = global.section("eval").value("weights", Json());
    if (weights.is_null() || weights.empty()) weights = eval::default_overall_weights();

    auto records = load_traj_dir(traj_dir);
    fs::create_directories(out_dir);

    std::ofstream episodes((fs::path(out_dir) / "episodes.jsonl").string(), std::ios::trunc);
    std::map<std::string, std::vector<eval::MetricVector>> vectors_by_model;
    std::map<std::string, std::map<std::string, std::vector<bool>>> success_by_model_task;
    std::map<std::string, std::vector<agent::Trajectory>> trajectories_by_model;

    for (const auto& record : records) {
        auto task_it = task_map.find(record.task_id);
        if (task_it == task_map.end()) {
            std::cerr << "no task spec for " << record.task_id << ", skipping\n";
            continue;
        }
        auto report = eval::evaluate_episode(task_it->second, record.trajectory, reg, gateway,
                                             judges, weights);
        episodes << Json{{"model", record.model},
                         {"task_id", record.task_id},
                         {"run_index", record.run_index},
                         {"metrics", report.metrics.to_json()},
                         {"verdict", report.verdict.to_json()}}
                        .dump()
                 << "\n";
        vectors_by_model[record.model].push_back(report.metrics);
        success_by_model_task[record.model][record.task_id].push_back(
            report.verdict.task_success);
        trajectories_by_model[record.model].push_back(record.trajectory);
    }

    agent::RuntimeConfig runtime_config =
        agent::RuntimeConfig::from_json(global.section("runtime"));
    Json aggregates = Json::array();
    for (const auto& [model, vectors] : vectors_by_model) {
        auto agg = eval::aggregate_model(model, vectors, success_by_model_task[model], weights);
        Json agg_json = agg.to_json();
        agg_json["persona"] = eval::persona(trajectories_by_model[model], vectors,
                                            runtime_config.step_cap, runtime_config.max_turns)
                                  .to_json();
        aggregates.push_back(std::move(agg_json));
    }
    write_json_file((fs::path(out_dir) / "aggregates.json").string(),
                    Json{{"weights", weights}, {"models", aggregates}});
    std::cout << "evaluated " << records.size() << " episodes into " << out_dir << "\n";
    return 0;
}

int cmd_report(const GlobalOptions&, const std::string& reports_dir, const std::string& format,
               const std::string& sort_field) {
    Json doc = load_json_file((fs::path(reports_dir) / "aggregates.json").string());
    std::vector<eval::ModelAggregate> aggregates;
    std::map<std::string, double> turn1_scores, final_completeness;
    for (const auto& entry : doc.value("models", Json::array())) {
        eval::ModelAggregate agg;
        agg.model = entry.value("model", "");
        agg.episodes = entry.value("episodes", 0);
        agg.mean = eval::MetricVector::from_json(entry.value("mean", Json::object()));
        agg.best = eval::MetricVector::from_json(entry.value("best", Json::object()));
        if (entry.contains("pass_at_3")) agg.pass_at_3 = entry["pass_at_3"].get<double>();
        if (entry.contains("turn1_score")) {
            agg.turn1_score = entry["turn1_score"].get<double>();
            turn1_scores[agg.model] = *agg.turn1_score;
        }
        if (agg.mean.completeness) final_completeness[agg.model] = *agg.mean.completeness;
        aggregates.push_back(std::move(agg));
    }

    auto board = harness::make_leaderboard(std::move(aggregates));
    if (!sort_field.empty()) board.sort_by(sort_field);

    if (format == "json") {
        Json out = board.to_json();
        if (turn1_scores.size() >= 2 && final_completeness.size() >= 2) {
            Json shifts = Json::object();
            for (const auto& [model, delta] : eval::rank_shift(turn1_scores, final_completeness))
                shifts[model] = delta;
            out["rank_shift"] = shifts;
        }
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << board.to_text();
    }
    return 0;
}

int cmd_curate(const GlobalOptions&, const std::string& traj_dir, const std::string& tasks_path,
               const std::string& registry_path, const std::string& out) {
    auto reg = registry::Registry::load_file(registry_path);
    auto task_list = load_tasks(tasks_path);
    std::map<std::string, tasks::TaskSpec> task_map;
    for (auto& t : task_list) task_map[t.task_id] = t;

    auto records = load_traj_dir(traj_dir);
    auto samples = harness::curate_first_round(records, task_map, reg);
    std::ofstream out_file(out, std::ios::trunc);
    if (!out_file) throw std::runtime_error("cannot write: " + out);
    for (const auto& s : samples) out_file << s.to_json().dump() << "\n";
    std::cout << "curated " << samples.size() << " samples from " << records.size()
              << " trajectories\n";
    return 0;
}

int cmd_export(const GlobalOptions&, const std::string& samples_path, const std::string& out) {
    std::vector<harness::SftSample> samples;
    std::ifstream in(samples_path);
    if (!in) throw std::runtime_error("cannot open: " + samples_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        samples.push_back(harness::SftSample::from_json(Json::parse(line)));
    }
    harness::export_sft(samples, out);
    std::cout << "exported " << samples.size() << " sft samples to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"toolrange: open-world tool-use benchmark harness and data engine"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "master seed");
    app.add_option("--config", global.config_path, "JSON config file");
    app.add_option("--parallelism", global.parallelism, "episode parallelism");

    // universe
    auto* universe = app.add_subcommand("universe", "generate a synthetic tool universe");
    std::uint64_t u_seed = 7;
    int u_servers = 30, u_tools = 6;
    double u_flaky_fraction = 0.0, u_flaky_rate = 0.3;
    std::string u_out = "manifest.json";
    universe->add_option("--seed", u_seed, "universe seed");
    universe->add_option("--servers", u_servers, "server count")->check(CLI::PositiveNumber);
    universe->add_option("--tools", u_tools, "tools per server")->check(CLI::PositiveNumber);
    universe->add_option("--flaky-fraction", u_flaky_fraction, "share of flaky tools");
    universe->add_option("--flaky-rate", u_flaky_rate, "failure rate of flaky tools");
    universe->add_option("--out", u_out, "output manifest path")->required();

    // validate
    auto* validate = app.add_subcommand("validate", "run the 3-stage tool validation");
    std::string v_registry, v_out = "validation.json";
    std::vector<std::string> v_credentials;
    validate->add_option("--registry", v_registry, "registry manifest")->required();
    validate->add_option("--out", v_out, "validation report output")->required();
    validate->add_option("--credential", v_credentials, "credential refs granted to the persona");

    // index build | serve
    auto* index_cmd = app.add_subcommand("index", "tool retrieval index");
    index_cmd->require_subcommand(1);
    auto* index_build = index_cmd->add_subcommand("build", "build an index from a registry");
    std::string ib_registry, ib_out;
    index_build->add_option("--registry", ib_registry)->required();
    index_build->add_option("--out", ib_out, "index directory")->required();
    auto* index_serve = index_cmd->add_subcommand("serve", "serve search_tools over MCP/HTTP");
    std::string is_dir, is_host = "127.0.0.1";
    int is_port = 8750;
    index_serve->add_option("--dir", is_dir, "index directory")->required();
    index_serve->add_option("--port", is_port, "port");
    index_serve->add_option("--host", is_host, "bind host");

    // serve-stdio
    auto* stdio_cmd = app.add_subcommand("serve-stdio", "serve a registry over MCP stdio");
    std::string ss_registry;
    stdio_cmd->add_option("--registry", ss_registry)->required();

    // synthesize
    auto* synth = app.add_subcommand("synthesize", "synthesize tasks from the tool universe");
    std::string sy_registry, sy_index, sy_out = "tasks.jsonl", sy_profiles, sy_profile;
    int sy_n = 50;
    std::uint64_t sy_seed = 17;
    synth->add_option("--registry", sy_registry)->required();
    synth->add_option("--index", sy_index, "index directory")->required();
    synth->add_option("--n", sy_n, "number of tasks");
    synth->add_option("--seed", sy_seed, "synthesis seed");
    synth->add_option("--out", sy_out)->required();
    synth->add_option("--profiles", sy_profiles, "gateway profiles JSON");
    synth->add_option("--profile", sy_profile, "synthesis gateway profile id");

    // run
    auto* run = app.add_subcommand("run", "run planner-actor episodes");
    std::string r_tasks, r_registry, r_index, r_policy, r_out = "traj", r_profiles;
    std::vector<std::string> r_models;
    int r_runs = 3;
    run->add_option("--tasks", r_tasks)->required();
    run->add_option("--registry", r_registry)->required();
    run->add_option("--index", r_index)->required();
    run->add_option("--model", r_models, "gateway profile (repeatable)")->required();
    run->add_option("--policy", r_policy, "intervention policy JSON");
    run->add_option("--runs", r_runs, "runs per task");
    run->add_option("--out", r_out, "trajectory output directory");
    run->add_option("--profiles", r_profiles, "gateway profiles JSON");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score trajectories");
    std::string e_traj, e_tasks, e_registry, e_judges, e_out = "reports", e_profiles;
    evaluate->add_option("--traj", e_traj)->required();
    evaluate->add_option("--tasks", e_tasks)->required();
    evaluate->add_option("--registry", e_registry)->required();
    evaluate->add_option("--judges", e_judges, "judges JSON")->required();
    evaluate->add_option("--out", e_out, "reports directory");
    evaluate->add_option("--profiles", e_profiles, "extra gateway profiles JSON");

    // report
    auto* report = app.add_subcommand("report", "render the leaderboard");
    std::string rp_reports, rp_format = "table", rp_sort;
    report->add_option("--reports", rp_reports)->required();
    report->add_option("--format", rp_format)->check(CLI::IsMember({"table", "json"}));
    report->add_option("--sort", rp_sort, "sort column");

    // curate
    auto* curate = app.add_subcommand("curate", "extract first-round SFT samples");
    std::string c_traj, c_tasks, c_registry, c_out = "samples.jsonl";
    curate->add_option("--traj", c_traj)->required();
    curate->add_option("--tasks", c_tasks)->required();
    curate->add_option("--registry", c_registry)->required();
    curate->add_option("--out", c_out);

    // export
    auto* export_cmd = app.add_subcommand("export", "export curated samples as SFT JSONL");
    std::string x_samples, x_out = "sft.jsonl";
    export_cmd->add_option("--samples", x_samples)->required();
    export_cmd->add_option("--out", x_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!global.config_path.empty()) global.config = load_json_file(global.config_path);

        if (universe->parsed())
            return cmd_universe(global, u_seed, u_servers, u_tools, u_flaky_fraction,
                                u_flaky_rate, u_out);
        if (validate->parsed()) return cmd_validate(global, v_registry, v_out, v_credentials);
        if (index_cmd->parsed()) {
            if (index_build->parsed()) return cmd_index_build(global, ib_registry, ib_out);
            return cmd_index_serve(global, is_dir, is_port, is_host);
        }
        if (stdio_cmd->parsed()) return cmd_serve_stdio(global, ss_registry);
        if (synth->parsed())
            return cmd_synthesize(global, sy_registry, sy_index, sy_n, sy_seed, sy_out,
                                  sy_profiles, sy_profile);
        if (run->parsed())
            return cmd_run(global, r_tasks, r_registry, r_index, r_models, r_policy, r_runs,
                           r_out, r_profiles);
        if (evaluate->parsed())
            return cmd_evaluate(global, e_traj, e_tasks, e_registry, e_judges, e_out, e_profiles);
        if (report->parsed()) return cmd_report(global, rp_reports, rp_format, rp_sort);
        if (curate->parsed()) return cmd_curate(global, c_traj, c_tasks, c_registry, c_out);
        if (export_cmd->parsed()) return cmd_export(global, x_samples, x_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
