#pragma once

#include <string>

#include "json_io.hpp"
#include "scenario.hpp"

namespace decoyforge {

namespace detail {

// Positions are written either as {"machine": m, "user": u} or "m/u".
inline std::optional<Position> read_position(const json& j, const std::string& path, IssueSink& sink)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto slash = s.find('/');
        if (slash == std::string::npos) {
            sink.schema(path, "position string must be 'machine/user'");
            return std::nullopt;
        }
        return Position{s.substr(0, slash), s.substr(slash + 1)};
    }
    auto machine = sink.string_at(j, path, "machine");
    auto user = sink.string_at(j, path, "user");
    if (!machine || !user)
        return std::nullopt;
    return Position{*machine, *user};
}

inline std::set<SecretId> read_secret_set(const json& obj, const std::string& path, const char* key,
                                          IssueSink& sink)
{
    std::set<SecretId> out;
    const auto* arr = sink.array_at(obj, path, key, false);
    if (!arr)
        return out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto& v = (*arr)[i];
        if (!v.is_string())
            sink.schema(path + "/" + key + "/" + std::to_string(i), "expected a secret id string");
        else
            out.insert(v.get<std::string>());
    }
    return out;
}

inline std::set<Position> read_position_set(const json& doc, const char* key, IssueSink& sink)
{
    std::set<Position> out;
    const auto* arr = sink.array_at(doc, "", key);
    if (!arr)
        return out;
    for (std::size_t i = 0; i < arr->size(); ++i)
        if (auto p = read_position((*arr)[i], std::string("/") + key + "/" + std::to_string(i), sink))
            out.insert(*p);
    return out;
}

} // namespace detail

/// Builds a scenario from its document form. Throws LoadError listing every
/// schema problem; semantic checks are left to validate_scenario.
inline Scenario scenario_from_json(const json& doc)
{
    detail::IssueSink sink;
    Scenario s;
    if (!doc.is_object()) {
        sink.schema("", "scenario document must be an object");
        sink.throw_if_any();
    }

    if (const auto* arr = sink.array_at(doc, "", "positions")) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const auto path = "/positions/" + std::to_string(i);
            const auto& j = (*arr)[i];
            auto p = detail::read_position(j, path, sink);
            if (!p)
                continue;
            s.positions.push_back(*p);
            if (j.is_object() && j.contains("privilege")) {
                const auto& pj = j["privilege"];
                auto priv = pj.is_string() ? parse_privilege(pj.get<std::string>()) : std::nullopt;
                if (!priv)
                    sink.schema(path + "/privilege", "expected \"User\" or \"SuperUser\"");
                else
                    s.privileges[*p] = *priv;
            }
        }
    }

    if (const auto* arr = sink.array_at(doc, "", "transitions")) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const auto path = "/transitions/" + std::to_string(i);
            const auto& j = (*arr)[i];
            Transition t;
            const auto* src = sink.member(j, path, "src");
            const auto* dst = sink.member(j, path, "dst");
            auto technique = sink.string_at(j, path, "technique");
            std::optional<Position> sp, dp;
            if (src)
                sp = detail::read_position(*src, path + "/src", sink);
            if (dst)
                dp = detail::read_position(*dst, path + "/dst", sink);
            t.procedure = sink.string_at(j, path, "procedure", false);
            t.pre = detail::read_secret_set(j, path, "pre", sink);
            t.post = detail::read_secret_set(j, path, "post", sink);
            if (!sp || !dp || !technique)
                continue;
            t.src = *sp;
            t.dst = *dp;
            t.technique = *technique;
            s.transitions.push_back(std::move(t));
        }
    }

    s.starting = detail::read_position_set(doc, "starting", sink);
    s.winning = detail::read_position_set(doc, "winning", sink);

    if (const auto* arr = sink.array_at(doc, "", "secrets")) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const auto& v = (*arr)[i];
            if (!v.is_string())
                sink.schema("/secrets/" + std::to_string(i), "expected a secret id string");
            else
                s.secrets.push_back(v.get<std::string>());
        }
    }

    if (const auto* arr = sink.array_at(doc, "", "external_machines", false)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const auto& v = (*arr)[i];
            if (!v.is_string())
                sink.schema("/external_machines/" + std::to_string(i), "expected a machine name");
            else
                s.external_machines.insert(v.get<std::string>());
        }
    }

    sink.throw_if_any();
    return s;
}

inline Scenario load_scenario_text(const std::string& text) { return scenario_from_json(parse_json_text(text)); }

inline Scenario load_scenario_file(const std::string& path) { return load_scenario_text(read_text_file(path)); }

inline ordered_json scenario_to_json(const Scenario& s)
{
    auto pos = [](const Position& p) { return ordered_json{{"machine", p.machine}, {"user", p.user}}; };
    ordered_json doc;
    doc["positions"] = ordered_json::array();
    for (const auto& p : s.positions) {
        auto j = pos(p);
        if (auto it = s.privileges.find(p); it != s.privileges.end())
            j["privilege"] = to_string(it->second);
        doc["positions"].push_back(std::move(j));
    }
    doc["transitions"] = ordered_json::array();
    for (const auto& t : s.transitions) {
        ordered_json j{{"src", pos(t.src)}, {"dst", pos(t.dst)}, {"technique", t.technique}};
        if (t.procedure)
            j["procedure"] = *t.procedure;
        j["pre"] = t.pre;
        j["post"] = t.post;
        doc["transitions"].push_back(std::move(j));
    }
    doc["starting"] = ordered_json::array();
    for (const auto& p : s.starting)
        doc["starting"].push_back(pos(p));
    doc["winning"] = ordered_json::array();
    for (const auto& p : s.winning)
        doc["winning"].push_back(pos(p));
    doc["secrets"] = s.secrets;
    if (!s.external_machines.empty())
        doc["external_machines"] = s.external_machines;
    return doc;
}

} // namespace decoyforge
