#pragma once

#include <sstream>
#include <string>
#include <variant>

#include "architecture.hpp"
#include "json_io.hpp"
#include "refine.hpp"
#include "scenario.hpp"

namespace decoyforge {

inline ordered_json config_to_json(const ArchitectureConfig& a)
{
    ordered_json doc = ordered_json::array();
    for (const auto& m : a) {
        ordered_json j;
        j["Name"] = m.name;
        j["OS"] = {{"Type", m.os.type}, {"Version", m.os.version}};
        j["Software"] = ordered_json::array();
        for (const auto& s : m.software)
            j["Software"].push_back({{"Type", s.type}, {"Version", s.version}});
        j["Users"] = ordered_json::array();
        for (const auto& u : m.users) {
            ordered_json uj;
            uj["Name"] = u.name;
            uj["Group"] = u.group;
            uj["Privilege"] = u.privilege;
            uj["Credentials"] = {{"Type", u.credentials.type}, {"Value", u.credentials.value}};
            j["Users"].push_back(std::move(uj));
        }
        j["Files"] = ordered_json::array();
        for (const auto& f : m.files) {
            ordered_json fj;
            fj["Source"] = f.source;
            fj["Destination"] = f.destination;
            fj["Permissions"] = f.permissions;
            fj["Modification"] = f.modification;
            fj["Owner"] = f.owner;
            fj["Group"] = f.group;
            j["Files"].push_back(std::move(fj));
        }
        doc.push_back(std::move(j));
    }
    return doc;
}

/// Two-space indented, keys in document order, trailing newline.
inline std::string emit_config(const ArchitectureConfig& a) { return config_to_json(a).dump(2) + "\n"; }

inline ArchitectureConfig config_from_json(const json& doc)
{
    detail::IssueSink sink;
    ArchitectureConfig out;
    if (!doc.is_array()) {
        sink.schema("", "configuration must be an array of machines");
        sink.throw_if_any();
    }
    auto str = [&](const json& obj, const std::string& path, const char* key) {
        return sink.string_at(obj, path, key).value_or("");
    };
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto path = "/" + std::to_string(i);
        const auto& j = doc[i];
        MachineConfig m;
        m.name = str(j, path, "Name");
        if (const auto* os = sink.member(j, path, "OS"))
            m.os = {str(*os, path + "/OS", "Type"), str(*os, path + "/OS", "Version")};
        if (const auto* arr = sink.array_at(j, path, "Software"))
            for (std::size_t k = 0; k < arr->size(); ++k) {
                const auto p = path + "/Software/" + std::to_string(k);
                m.software.push_back({str((*arr)[k], p, "Type"), str((*arr)[k], p, "Version")});
            }
        if (const auto* arr = sink.array_at(j, path, "Users"))
            for (std::size_t k = 0; k < arr->size(); ++k) {
                const auto p = path + "/Users/" + std::to_string(k);
                const auto& u = (*arr)[k];
                UserConfig uc{str(u, p, "Name"), str(u, p, "Group"), str(u, p, "Privilege"), {}};
                if (const auto* cred = sink.member(u, p, "Credentials"))
                    uc.credentials = {str(*cred, p + "/Credentials", "Type"), str(*cred, p + "/Credentials", "Value")};
                m.users.push_back(std::move(uc));
            }
        if (const auto* arr = sink.array_at(j, path, "Files"))
            for (std::size_t k = 0; k < arr->size(); ++k) {
                const auto p = path + "/Files/" + std::to_string(k);
                const auto& f = (*arr)[k];
                m.files.push_back({str(f, p, "Source"), str(f, p, "Destination"), str(f, p, "Permissions"),
                                   str(f, p, "Modification"), str(f, p, "Owner"), str(f, p, "Group")});
            }
        out.push_back(std::move(m));
    }
    sink.throw_if_any();
    return out;
}

inline ArchitectureConfig load_config(const std::string& text) { return config_from_json(parse_json_text(text)); }

namespace detail {

inline std::string dot_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

inline std::string join_set(const std::set<SecretId>& xs)
{
    std::string out;
    for (const auto& x : xs)
        out += (out.empty() ? "" : ", ") + x;
    return out;
}

} // namespace detail

/// DOT digraph: one node per position, one edge per transition. Starting
/// positions are filled green, winning ones red with a double border.
inline std::string emit_graph(const Scenario& s)
{
    std::ostringstream out;
    out << "digraph scenario {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box, style=rounded];\n";
    for (const auto& p : s.positions) {
        out << "  \"" << detail::dot_escape(p.str()) << "\" [label=\"(" << detail::dot_escape(p.machine) << ", "
            << detail::dot_escape(p.user) << ")\"";
        const bool start = s.starting.count(p) > 0;
        const bool win = s.winning.count(p) > 0;
        if (start && win)
            out << ", style=\"rounded,filled\", fillcolor=gold, peripheries=2";
        else if (start)
            out << ", style=\"rounded,filled\", fillcolor=palegreen";
        else if (win)
            out << ", style=\"rounded,filled\", fillcolor=lightcoral, peripheries=2";
        out << "];\n";
    }
    for (std::size_t i = 0; i < s.transitions.size(); ++i) {
        const auto& t = s.transitions[i];
        std::string label = detail::dot_escape("t" + std::to_string(i + 1) + ": " + t.label());
        if (!t.pre.empty())
            label += "\\npre: {" + detail::dot_escape(detail::join_set(t.pre)) + "}";
        if (!t.post.empty())
            label += "\\npost: {" + detail::dot_escape(detail::join_set(t.post)) + "}";
        out << "  \"" << detail::dot_escape(t.src.str()) << "\" -> \"" << detail::dot_escape(t.dst.str())
            << "\" [label=\"" << label << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

namespace detail {

inline std::string describe_constraint(const MachineConstraint& m)
{
    std::ostringstream out;
    out << "os " << m.os.platform << " " << m.os.versions.str() << "\n";
    for (const auto& a : m.accounts) {
        out << "    account " << a.name << " group=" << a.group.value_or("*")
            << " privilege=" << (a.privilege ? std::string(to_string(*a.privilege)) : "*")
            << " credentials=" << describe(a.credentials) << "\n";
    }
    for (const auto& sw : m.software)
        out << "    software " << sw.product << " " << sw.versions.str() << " port "
            << (sw.port ? std::to_string(*sw.port) : "*") << "\n";
    for (const auto& f : m.files) {
        out << "    file " << f.path << " " << to_string(f.mode) << " perms " << f.permissions.value_or("*");
        for (const auto& frag : f.content)
            out << " [" << frag.template_name << "]";
        out << "\n";
    }
    return out.str();
}

} // namespace detail

/// Human-readable account of a refinement run. Secret values are shown only
/// with `reveal`.
inline std::string emit_report(const Scenario& s, const RefineResult& result, std::uint64_t seed, bool reveal = false)
{
    std::ostringstream out;
    out << "refinement report\n";
    out << "seed: " << seed << "\n";
    const auto& trace =
        std::visit([](const auto& r) -> const std::vector<TraceEvent>& { return r.trace; }, result);

    if (const auto* inf = std::get_if<Infeasible>(&result)) {
        out << "status: infeasible\n";
        if (inf->transition) {
            const auto& t = s.transitions[*inf->transition];
            out << "deepest failing transition: t" << *inf->transition + 1 << " " << t.src.str() << " -> "
                << t.dst.str() << " " << t.technique << "\n";
        }
        out << "conflicts:\n";
        for (const auto& r : inf->reasons)
            out << "  " << r << "\n";
    } else {
        const auto& r = std::get<Refinement>(result);
        out << "status: refined\n\n";
        out << "transitions (refinement order):\n";
        for (auto i : r.order) {
            const auto& t = r.procedural.transitions[i];
            out << "  t" << i + 1 << " " << t.src.str() << " -> " << t.dst.str() << " " << t.technique << " => "
                << t.procedure.value_or("?") << "\n";
        }
        out << "\nmachines:\n";
        for (const auto& [m, c] : r.dictionary.entries()) {
            out << "  " << m << ": ";
            if (c)
                out << detail::describe_constraint(*c);
            else
                out << "UNSAT " << c.unsat().reason << "\n";
        }
        out << "\nsecrets:\n";
        for (const auto& [id, sec] : r.secrets.entries()) {
            out << "  " << id << " " << to_string(sec.type) << " ";
            if (!reveal) {
                out << "<redacted>\n";
            } else if (sec.public_part.empty()) {
                out << sec.value << "\n";
            } else {
                out << sec.public_part << "\n";
            }
        }
    }
    out << "\nprocedure sequence:\n";
    for (const auto& e : trace) {
        out << "  " << to_string(e.kind) << " t" << e.transition + 1;
        if (!e.procedure.empty())
            out << " \"" << e.procedure << "\"";
        if (!e.detail.empty())
            out << ": " << e.detail;
        out << "\n";
    }
    return out.str();
}

} // namespace decoyforge
