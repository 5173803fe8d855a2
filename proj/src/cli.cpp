#include "wsc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <sstream>

#include "wsc/genbench.hpp"
#include "wsc/name_engine.hpp"
#include "wsc/online.hpp"
#include "wsc/online_stream.hpp"
#include "wsc/oo.hpp"
#include "wsc/relational.hpp"
#include "wsc/taxonomy.hpp"

namespace wsc::cli {

using io::Json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Json report_json(const ValidationReport& r, const ParameterRegistry& names) {
    Json j{{"valid", r.valid}, {"goalCovered", r.goal_covered}};
    if (r.first_violation)
        j["firstViolation"] = {{"position", r.first_violation->position},
                               {"missing", io::to_json(r.first_violation->missing, names)}};
    if (!r.missing_goal.empty()) j["missingGoal"] = io::to_json(r.missing_goal, names);
    return j;
}

void load_online(const Json& instance, OnlineSession& session, std::vector<std::string>& ids) {
    try {
        for (const auto& s : instance.at("services"))
            session.apply({{"op", "register_service"}, {"name", s.at("name")}, {"in", s.at("in")}, {"out", s.at("out")}});
    } catch (const Json::exception& e) {
        throw io::InputError(std::string("online instance: ") + e.what());
    }
    if (!instance.contains("queries")) throw io::InputError("online instance: missing field \"queries\"");
    for (const auto& q : instance.at("queries")) ids.push_back(q.value("id", std::string{}));
}

std::vector<Json> find_online(const Json& instance, OnlineSession& session) {
    std::vector<Json> events;
    for (const auto& q : instance.at("queries")) {
        Json op = q;
        op["op"] = "find_composition";
        for (auto& e : session.apply(op)) events.push_back(std::move(e));
    }
    session.finish();
    return events;
}

}  // namespace

Json to_json(const RunReport& r) {
    Json j{{"model", r.model}, {"timeMs", r.time_ms}, {"solved", r.solved}, {"length", r.length}, {"valid", r.valid}};
    if (r.execution_path) j["executionPath"] = *r.execution_path;
    if (r.rule_applications) j["ruleApplications"] = *r.rule_applications;
    return j;
}

RunReport solve_instance(const Json& instance, const SolveOptions& options, Json* composition) {
    const io::Model model = io::model_of(instance);
    if (options.expected_model && *options.expected_model != model)
        throw io::InputError("instance model is " + std::string(io::model_tag(model)) + ", expected " +
                             std::string(io::model_tag(*options.expected_model)));
    RunReport report;
    report.model = std::string(io::model_tag(model));
    Json comp_json;

    switch (model) {
        case io::Model::name: {
            auto p = io::parse_name(instance);
            auto start = Clock::now();
            auto comp = find_composition(p.repo, p.request, {options.use_scores, options.reduce});
            report.time_ms = elapsed_ms(start);
            if (comp) {
                report.solved = true;
                report.length = comp->length();
                report.valid = validate_composition(p.repo, p.request, *comp).valid;
                comp_json = io::to_json(*comp);
            }
            break;
        }
        case io::Model::hierarchical: {
            auto inst = io::parse_hierarchical(instance);
            auto start = Clock::now();
            auto comp = find_composition_hierarchical(inst, {options.use_scores, options.reduce});
            report.time_ms = elapsed_ms(start);
            if (comp) {
                report.solved = true;
                report.length = comp->length();
                report.execution_path = execution_path(*comp);
                report.valid = validate_hierarchical(inst, *comp).valid;
                comp_json = io::to_json(*comp);
            }
            break;
        }
        case io::Model::relational: {
            auto inst = io::parse_relational(instance);
            RelSearchOptions o;
            o.use_rules = options.use_rules;
            o.object_cap = options.object_cap;
            o.both_orientations = options.both_orientations;
            auto start = Clock::now();
            auto comp = search_composition_relational(inst, o);
            report.time_ms = elapsed_ms(start);
            if (comp) {
                report.solved = true;
                report.length = comp->length();
                report.rule_applications = comp->rule_applications();
                report.valid = validate_relational(inst, *comp, options.both_orientations).valid;
                comp_json = io::to_json(*comp);
            }
            break;
        }
        case io::Model::oo: {
            auto inst = io::parse_oo(instance);
            auto start = Clock::now();
            auto comp = find_comp(inst, {options.oo_reduce});
            report.time_ms = elapsed_ms(start);
            if (comp) {
                report.solved = true;
                report.length = comp->length();
                report.valid = validate_oo(inst, *comp).valid;
                comp_json = io::to_json(*comp);
            }
            break;
        }
        case io::Model::online: {
            OnlineSession session;
            std::vector<std::string> ids;
            load_online(instance, session, ids);
            auto start = Clock::now();
            find_online(instance, session);
            report.time_ms = elapsed_ms(start);
            Json queries = Json::object();
            report.solved = true;
            for (const auto& id : ids) {
                const Solution* sol = session.state().solution(id);
                if (!sol) {
                    report.solved = false;
                    queries[id] = nullptr;
                    continue;
                }
                report.length += sol->main.size();
                queries[id] = sol->main;
            }
            report.valid = report.solved && session.state().solutions_valid();
            comp_json = Json{{"queries", queries}};
            break;
        }
    }
    if (composition) *composition = std::move(comp_json);
    return report;
}

Json validate_instance(const Json& instance, const Json& composition, bool both_orientations) {
    const io::Model model = io::model_of(instance);
    switch (model) {
        case io::Model::name: {
            auto p = io::parse_name(instance);
            auto comp = io::parse_composition(composition);
            try {
                return report_json(validate_composition(p.repo, p.request, comp), *p.names);
            } catch (const std::invalid_argument& e) {
                throw io::InputError(e.what());
            }
        }
        case io::Model::hierarchical: {
            auto inst = io::parse_hierarchical(instance);
            auto r = validate_hierarchical(inst, io::parse_composition(composition));
            Json j{{"valid", r.valid}, {"goalCovered", r.goal_covered}};
            if (r.violation_position) j["violationPosition"] = *r.violation_position;
            return j;
        }
        case io::Model::relational: {
            auto inst = io::parse_relational(instance);
            auto r = validate_relational(inst, io::parse_rel_composition(composition), both_orientations);
            Json j{{"valid", r.valid}, {"goalCovered", r.goal_covered}};
            if (r.violation_position) j["violationPosition"] = *r.violation_position, j["reason"] = r.reason;
            return j;
        }
        case io::Model::oo: {
            auto inst = io::parse_oo(instance);
            auto r = validate_oo(inst, io::parse_composition(composition));
            Json j{{"valid", r.valid}, {"goalCovered", r.goal_covered}};
            if (r.violation_position) j["violationPosition"] = *r.violation_position;
            return j;
        }
        case io::Model::online: {
            auto p = io::parse_name(Json{{"services", instance.at("services")}, {"query", {{"known", Json::array()}, {"required", Json::array()}}}});
            bool valid = true;
            Json per = Json::object();
            if (!composition.contains("queries")) throw io::InputError("online composition lacks \"queries\"");
            for (const auto& q : instance.at("queries")) {
                const std::string id = q.value("id", std::string{});
                Request req;
                for (const auto& s : q.at("known")) req.init.push_back(p.names->intern(s.get<std::string>()));
                for (const auto& s : q.at("required")) req.goal.push_back(p.names->intern(s.get<std::string>()));
                req.init = make_param_set(req.init);
                req.goal = make_param_set(req.goal);
                const Json& calls = composition.at("queries").value(id, Json());
                if (calls.is_null()) {
                    per[id] = Json{{"valid", false}};
                    valid = false;
                    continue;
                }
                auto r = validate_composition(p.repo, req, io::parse_composition(Json{{"calls", calls}}));
                per[id] = report_json(r, *p.names);
                valid = valid && r.valid;
            }
            return Json{{"valid", valid}, {"queries", per}};
        }
    }
    throw io::InputError("unknown model");
}

namespace {

int cmd_solve(const std::string& model, const std::string& instance_path, const std::string& out_path,
              const std::string& format, const SolveOptions& base, std::ostream& out) {
    SolveOptions options = base;
    if (!model.empty()) options.expected_model = io::parse_model(model);
    Json instance = io::read_json_file(instance_path);
    Json composition;
    RunReport report = solve_instance(instance, options, &composition);
    Json rj = to_json(report);
    if (!out_path.empty() && report.solved) io::write_text_file(out_path, composition.dump(2) + "\n");
    if (format == "csv") {
        out << "model,time_ms,solved,length,execution_path,valid\n"
            << report.model << "," << report.time_ms << "," << report.solved << "," << report.length << ","
            << (report.execution_path ? std::to_string(*report.execution_path) : "") << "," << report.valid << "\n";
    } else if (out_path.empty()) {
        out << Json{{"report", rj}, {"composition", composition}}.dump(2) << "\n";
    } else {
        out << rj.dump(2) << "\n";
    }
    return report.solved && report.valid ? 0 : 1;
}

int cmd_validate(const std::string& instance_path, const std::string& comp_path, bool both, std::ostream& out) {
    Json instance = io::read_json_file(instance_path);
    Json comp = io::read_json_file(comp_path);
    Json r = validate_instance(instance, comp, both);
    out << r.dump(2) << "\n";
    return r.at("valid").get<bool>() ? 0 : 1;
}

int cmd_generate(const std::string& model, const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir, std::ostream& out) {
    gen::GenConfig cfg = config_path.empty() ? gen::GenConfig{} : gen::parse_config(io::read_json_file(config_path));
    if (seed) cfg.seed = *seed;
    gen::check_config(cfg);
    auto g = gen::generate(io::parse_model(model), cfg);
    std::filesystem::path dir(out_dir);
    io::write_text_file(dir / "instance.json", g.instance.dump(1) + "\n");
    io::write_text_file(dir / "groundtruth.json", to_json(g.truth).dump(1) + "\n");
    if (!g.events.empty()) {
        std::string lines;
        for (const auto& e : g.events) lines += e.dump() + "\n";
        io::write_text_file(dir / "events.jsonl", lines);
    }
    out << Json{{"model", model}, {"seed", cfg.seed}, {"out", dir.string()},
                {"plantedChainLength", g.truth.planted_chain.size()}}
               .dump()
        << "\n";
    return 0;
}

struct BenchRow {
    std::string file;
    std::optional<RunReport> report;
    std::string error;
};

int cmd_bench(const std::string& dir, const std::string& format, const std::string& out_path, std::size_t jobs,
              const SolveOptions& options, std::ostream& out) {
    if (!std::filesystem::is_directory(dir)) throw io::InputError("not a directory: " + dir);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        if (entry.path().filename() == "groundtruth.json") continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<BenchRow> rows(files.size());
    auto work = [&](std::size_t worker, std::size_t stride) {
        for (std::size_t i = worker; i < files.size(); i += stride) {
            rows[i].file = std::filesystem::relative(files[i], dir).string();
            try {
                rows[i].report = solve_instance(io::read_json_file(files[i]), options);
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
    };
    jobs = std::max<std::size_t>(1, jobs);
    std::vector<std::future<void>> workers;
    for (std::size_t w = 1; w < jobs; ++w) workers.push_back(std::async(std::launch::async, work, w, jobs));
    work(0, jobs);
    for (auto& f : workers) f.get();

    std::ostringstream text;
    if (format == "csv") {
        text << "file,model,time_ms,solved,length,execution_path,valid,error\n";
        for (const auto& r : rows) {
            text << r.file << ",";
            if (r.report)
                text << r.report->model << "," << r.report->time_ms << "," << r.report->solved << ","
                     << r.report->length << ","
                     << (r.report->execution_path ? std::to_string(*r.report->execution_path) : "") << ","
                     << r.report->valid << ",";
            else
                text << ",,,,,,";
            std::string err = r.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            text << err << "\n";
        }
    } else {
        Json list = Json::array();
        for (const auto& r : rows) {
            Json j = r.report ? to_json(*r.report) : Json{{"error", r.error}};
            j["file"] = r.file;
            list.push_back(j);
        }
        text << list.dump(2) << "\n";
    }
    if (out_path.empty())
        out << text.str();
    else
        io::write_text_file(out_path, text.str());
    return 0;
}

int cmd_online(const std::string& stream_path, const std::string& out_path, OnlineOptions options, std::ostream& out) {
    std::ifstream in(stream_path);
    if (!in) throw io::InputError("cannot open " + stream_path);
    OnlineSession session(options);
    auto events = run_stream(in, session);
    std::string text;
    for (const auto& e : events) text += e.dump() + "\n";
    if (out_path.empty())
        out << text;
    else
        io::write_text_file(out_path, text);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Automatic web service composition"};
    app.name("composer");
    app.require_subcommand(1);

    std::string model, instance, out_path, format = "json", comp_path, config, dir, stream;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    bool no_scores = false, no_reduce = false, oo_reduce = false, ignore_rules = false, both = false, async = false,
         reoptimize = false;
    std::size_t object_cap = 4;

    auto* solve = app.add_subcommand("solve", "Find a composition for an instance");
    solve->add_option("--model", model, "Expected model tag");
    solve->add_option("--instance", instance, "Instance JSON")->required();
    solve->add_option("--out", out_path, "Composition output file");
    solve->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    solve->add_flag("--no-scores", no_scores, "Pick accessible services by name only");
    solve->add_flag("--no-reduce", no_reduce, "Skip the reduction pass");
    solve->add_flag("--reduce", oo_reduce, "Run the reduction pass in the object-oriented engine");
    solve->add_flag("--ignore-rules", ignore_rules, "Do not apply user inference rules");
    solve->add_option("--object-cap", object_cap, "Fresh-output rounds per service and input types");
    solve->add_flag("--both-orientations", both, "Match any relation in either direction");

    auto* validate = app.add_subcommand("validate", "Check a composition against an instance");
    validate->add_option("--instance", instance, "Instance JSON")->required();
    validate->add_option("--composition", comp_path, "Composition JSON")->required();
    validate->add_flag("--both-orientations", both, "Match any relation in either direction");

    auto* generate = app.add_subcommand("generate", "Generate a seeded instance");
    generate->add_option("--model", model, "Model")->required()->check(
        CLI::IsMember({"name", "hierarchical", "relational", "oo", "online"}));
    generate->add_option("--config", config, "Generator config JSON");
    generate->add_option("--seed", seed, "Seed (overrides the config)");
    generate->add_option("--out", out_path, "Output directory")->required();

    auto* bench = app.add_subcommand("bench", "Solve every instance in a directory");
    bench->add_option("--dir", dir, "Instance directory")->required();
    bench->add_option("--format", format, "Table format")->check(CLI::IsMember({"json", "csv"}));
    bench->add_option("--out", out_path, "Table output file");
    bench->add_option("--jobs", jobs, "Parallel workers");
    bench->add_flag("--no-scores", no_scores, "Pick accessible services by name only");
    bench->add_flag("--ignore-rules", ignore_rules, "Do not apply user inference rules");

    auto* online = app.add_subcommand("online", "Replay an online event stream");
    online->add_option("--stream", stream, "Operations, one JSON object per line")->required();
    online->add_option("--out", out_path, "Outcome events file");
    online->add_flag("--async", async, "Compute backups in the background");
    online->add_flag("--reoptimize", reoptimize, "Re-solve solved queries when a service is registered");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    SolveOptions options;
    options.use_scores = !no_scores;
    options.reduce = !no_reduce;
    options.oo_reduce = oo_reduce;
    options.use_rules = !ignore_rules;
    options.object_cap = object_cap;
    options.both_orientations = both;

    try {
        if (*solve) return cmd_solve(model, instance, out_path, format, options, out);
        if (*validate) return cmd_validate(instance, comp_path, both, out);
        if (*generate) return cmd_generate(model, config, seed, out_path, out);
        if (*bench) return cmd_bench(dir, format, out_path, jobs, options, out);
        if (*online) return cmd_online(stream, out_path, OnlineOptions{.reoptimize = reoptimize, .async_backups = async}, out);
    } catch (const io::InputError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownServiceError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace wsc::cli
