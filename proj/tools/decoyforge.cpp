#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "decoyforge/decoyforge.hpp"

namespace fs = std::filesystem;
using namespace decoyforge;

namespace {

enum Exit { Ok = 0, LoadFailure = 1, Invalid = 2, NoRefinement = 3 };

struct Options {
    std::string scenario;
    std::string catalog;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    bool json_errors = false;
    bool reveal = false;
    std::size_t max_paths = 0;
    std::optional<std::size_t> max_len;
    std::string procedure_order = "seeded";
    bool no_secret_priority = false;
};

void report_load(const LoadError& e, const Options& o)
{
    if (o.json_errors)
        std::cerr << json{{"error", "load"}, {"issues", e.to_json()}}.dump() << "\n";
    else
        std::cerr << "error: " << e.what() << "\n";
}

int report_diagnostics(const std::vector<Diagnostic>& ds, const Options& o)
{
    if (o.json_errors) {
        json arr = json::array();
        for (const auto& d : ds)
            arr.push_back({{"kind", to_string(d.kind)}, {"subject", d.subject}, {"message", d.message}});
        std::cerr << json{{"error", "validation"}, {"diagnostics", arr}}.dump() << "\n";
    } else {
        for (const auto& d : ds)
            std::cerr << to_string(d.kind) << " " << d.subject << ": " << d.message << "\n";
    }
    return Invalid;
}

void write_file(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

int cmd_validate(const Options& o)
{
    const auto s = load_scenario_file(o.scenario);
    if (!o.catalog.empty())
        load_catalog_file(o.catalog);
    const auto ds = validate_scenario(s);
    if (!ds.empty())
        return report_diagnostics(ds, o);
    std::cout << "ok: " << s.positions.size() << " positions, " << s.transitions.size() << " transitions\n";
    return Ok;
}

int cmd_paths(const Options& o)
{
    const auto s = load_scenario_file(o.scenario);
    if (auto ds = validate_scenario(s); !ds.empty())
        return report_diagnostics(ds, o);
    const auto paths = enumerate_winning_paths(s, o.max_len.value_or(s.transitions.size()));
    const auto families = paths.families();
    std::cout << families.size() << " winning path families (" << paths.sequences.size() << " minimal sequences)\n";
    if (paths.truncated)
        std::cout << "MaxLenExceeded: some paths were cut at length " << o.max_len.value_or(s.transitions.size())
                  << "\n";
    const auto shown = o.max_paths == 0 ? families.size() : std::min(o.max_paths, families.size());
    for (std::size_t f = 0; f < shown; ++f) {
        std::cout << "family " << f + 1 << ":";
        for (auto i : families[f])
            std::cout << " t" << i + 1;
        std::cout << "\n";
        for (auto i : families[f]) {
            const auto& t = s.transitions[i];
            std::cout << "  t" << i + 1 << " " << t.src.str() << " -> " << t.dst.str() << " " << t.label() << "\n";
        }
    }
    return families.empty() ? Invalid : Ok;
}

int cmd_refine(const Options& o)
{
    const auto s = load_scenario_file(o.scenario);
    const auto c = load_catalog_file(o.catalog);
    if (auto ds = validate_scenario(s); !ds.empty())
        return report_diagnostics(ds, o);

    std::uint64_t seed = 0;
    if (o.seed) {
        seed = *o.seed;
    } else if (std::getenv("CI")) {
        std::cerr << "error: --seed is mandatory when CI is set\n";
        return LoadFailure;
    } else {
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
        std::cerr << "seed: " << seed << "\n";
    }

    RefineOptions opt;
    opt.seed = seed;
    opt.prioritize_secrets = !o.no_secret_priority;
    opt.order = o.procedure_order == "catalog" ? ProcedureOrder::Catalog : ProcedureOrder::Seeded;
    const auto result = refine(s, c, opt);
    const fs::path out(o.out);
    write_file(out / "report.txt", emit_report(s, result, seed, o.reveal));

    if (const auto* inf = std::get_if<Infeasible>(&result)) {
        if (o.json_errors) {
            json j{{"error", "infeasible"}, {"reasons", inf->reasons}};
            if (inf->transition)
                j["transition"] = *inf->transition + 1;
            std::cerr << j.dump() << "\n";
        } else {
            std::cerr << "infeasible: no refinement exists";
            if (inf->transition)
                std::cerr << " (deepest failure at t" << *inf->transition + 1 << ")";
            std::cerr << "\n";
            for (const auto& r : inf->reasons)
                std::cerr << "  " << r << "\n";
        }
        return NoRefinement;
    }
    const auto& r = std::get<Refinement>(result);
    const auto deployment = apply_defaults(r.dictionary, r.secrets, c, seed);
    write_file(out / "config.json", emit_config(deployment.config));
    write_file(out / "scenario.dot", emit_graph(r.procedural));
    for (const auto& f : deployment.files)
        write_file(out / f.path, f.content);
    std::cout << "refined " << r.procedural.transitions.size() << " transitions; wrote " << (out / "config.json").string()
              << ", " << (out / "scenario.dot").string() << ", " << (out / "report.txt").string() << "\n";
    return Ok;
}

int cmd_count(const Options& o)
{
    const auto s = load_scenario_file(o.scenario);
    const auto c = load_catalog_file(o.catalog);
    if (auto ds = validate_scenario(s); !ds.empty())
        return report_diagnostics(ds, o);
    const auto table = count_architectures(s, c);
    for (const auto& m : table.machines)
        std::cout << m << "\t";
    std::cout << "N\tN_OS\tN_OS,F\n";
    for (const auto& row : table.rows) {
        for (const auto& f : row.families)
            std::cout << f << "\t";
        std::cout << row.n << "\t" << row.n_os << "\t" << row.n_os_f << "\n";
    }
    std::cout << "total N_OS,F: " << table.total << "\n";
    std::cout << "procedure assignments: " << table.refinements << "\n";
    std::cout << "assumptions:\n";
    for (const auto& a : table.assumptions)
        std::cout << "  - " << a << "\n";
    return Ok;
}

int cmd_graph(const Options& o)
{
    const auto s = load_scenario_file(o.scenario);
    if (auto ds = validate_scenario(s); !ds.empty())
        return report_diagnostics(ds, o);
    const auto path = fs::path(o.out) / "scenario.dot";
    write_file(path, emit_graph(s));
    std::cout << "wrote " << path.string() << "\n";
    return Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Refines technique-level attack scenarios into deployable decoy architectures."};
    app.require_subcommand(1);
    Options o;
    app.add_flag("--json-errors", o.json_errors, "Machine-readable diagnostics on stderr");

    auto* validate = app.add_subcommand("validate", "Check a scenario (and optionally a catalog)");
    validate->add_option("scenario", o.scenario)->required();
    validate->add_option("catalog", o.catalog);

    auto* paths = app.add_subcommand("paths", "List minimal winning path families");
    paths->add_option("scenario", o.scenario)->required();
    paths->add_option("--max-paths", o.max_paths, "Print at most this many families (0: all)");
    paths->add_option("--max-len", o.max_len, "Longest path explored (default: number of transitions)");

    auto* ref = app.add_subcommand("refine", "Refine into a procedure-level scenario and architecture");
    ref->add_option("scenario", o.scenario)->required();
    ref->add_option("catalog", o.catalog)->required();
    ref->add_option("--seed", o.seed, "RNG seed");
    ref->add_option("--out", o.out, "Output directory");
    ref->add_flag("--reveal-secrets", o.reveal, "Show secret values in the report");
    ref->add_option("--procedure-order", o.procedure_order, "seeded or catalog")
        ->check(CLI::IsMember({"seeded", "catalog"}));
    ref->add_flag("--no-secret-priority", o.no_secret_priority, "Keep the scenario's transition order");

    auto* count = app.add_subcommand("count", "Count valid architectures per OS-family assignment");
    count->add_option("scenario", o.scenario)->required();
    count->add_option("catalog", o.catalog)->required();

    auto* graph = app.add_subcommand("graph", "Write the scenario graph as DOT");
    graph->add_option("scenario", o.scenario)->required();
    graph->add_option("--out", o.out, "Output directory");

    for (auto* sub : {validate, paths, ref, count, graph})
        sub->add_flag("--json-errors", o.json_errors, "Machine-readable diagnostics on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : LoadFailure;
    }

    try {
        if (*validate)
            return cmd_validate(o);
        if (*paths)
            return cmd_paths(o);
        if (*ref)
            return cmd_refine(o);
        if (*count)
            return cmd_count(o);
        return cmd_graph(o);
    } catch (const LoadError& e) {
        report_load(e, o);
        return LoadFailure;
    } catch (const std::exception& e) {
        if (o.json_errors)
            std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        else
            std::cerr << "error: " << e.what() << "\n";
        return LoadFailure;
    }
}
