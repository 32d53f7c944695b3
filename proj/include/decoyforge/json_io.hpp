#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace decoyforge {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class LoadErrorKind {
    Io,
    Syntax,
    Schema,
    EmptyCatalog,
    EmptyOsPool,
    UnknownPlatform,
    InvalidVersion,
    InvalidCpe,
    InvalidTechnique,
    InvalidPermissions,
    DuplicateProcedure,
    UnknownTemplate,
    UnsatisfiableProcedure,
};

inline std::string_view to_string(LoadErrorKind k)
{
    switch (k) {
    case LoadErrorKind::Io: return "Io";
    case LoadErrorKind::Syntax: return "Syntax";
    case LoadErrorKind::Schema: return "Schema";
    case LoadErrorKind::EmptyCatalog: return "EmptyCatalog";
    case LoadErrorKind::EmptyOsPool: return "EmptyOsPool";
    case LoadErrorKind::UnknownPlatform: return "UnknownPlatform";
    case LoadErrorKind::InvalidVersion: return "InvalidVersion";
    case LoadErrorKind::InvalidCpe: return "InvalidCpe";
    case LoadErrorKind::InvalidTechnique: return "InvalidTechnique";
    case LoadErrorKind::InvalidPermissions: return "InvalidPermissions";
    case LoadErrorKind::DuplicateProcedure: return "DuplicateProcedure";
    case LoadErrorKind::UnknownTemplate: return "UnknownTemplate";
    case LoadErrorKind::UnsatisfiableProcedure: return "UnsatisfiableProcedure";
    }
    return "?";
}

/// One problem found while loading a document. `location` is `line:column`
/// for syntax errors and a JSON pointer otherwise.
struct LoadIssue {
    LoadErrorKind kind;
    std::string location;
    std::string message;
};

class LoadError : public std::runtime_error {
    std::vector<LoadIssue> issues_;

    static std::string summarize(const std::vector<LoadIssue>& issues)
    {
        std::string out;
        for (const auto& i : issues) {
            if (!out.empty())
                out += "\n";
            out += std::string(to_string(i.kind)) + " at " + (i.location.empty() ? "/" : i.location) + ": " +
                   i.message;
        }
        return out;
    }

public:
    explicit LoadError(std::vector<LoadIssue> issues)
        : std::runtime_error(summarize(issues)), issues_(std::move(issues))
    {}

    const std::vector<LoadIssue>& issues() const noexcept { return issues_; }

    bool has(LoadErrorKind k) const
    {
        for (const auto& i : issues_)
            if (i.kind == k)
                return true;
        return false;
    }

    json to_json() const
    {
        json arr = json::array();
        for (const auto& i : issues_)
            arr.push_back({{"kind", to_string(i.kind)}, {"location", i.location}, {"message", i.message}});
        return arr;
    }
};

inline json parse_json_text(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw LoadError({{LoadErrorKind::Syntax, std::to_string(line) + ":" + std::to_string(col), e.what()}});
    }
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw LoadError({{LoadErrorKind::Io, path, "cannot open file"}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

/// Collects schema issues while walking a document, so a load reports every
/// problem at once rather than the first.
class IssueSink {
    std::vector<LoadIssue> issues_;

public:
    void add(LoadErrorKind k, std::string location, std::string message)
    {
        issues_.push_back({k, std::move(location), std::move(message)});
    }
    void schema(const std::string& location, std::string message)
    {
        add(LoadErrorKind::Schema, location, std::move(message));
    }
    bool empty() const { return issues_.empty(); }
    void throw_if_any()
    {
        if (!issues_.empty())
            throw LoadError(std::move(issues_));
    }

    const json* member(const json& obj, const std::string& path, const char* key, bool required = true)
    {
        if (!obj.is_object()) {
            schema(path, "expected an object");
            return nullptr;
        }
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required)
                schema(path, std::string("missing key '") + key + "'");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string_at(const json& obj, const std::string& path, const char* key,
                                         bool required = true)
    {
        const auto* v = member(obj, path, key, required);
        if (!v)
            return std::nullopt;
        if (!v->is_string()) {
            schema(path + "/" + key, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    const json* array_at(const json& obj, const std::string& path, const char* key, bool required = true)
    {
        const auto* v = member(obj, path, key, required);
        if (v && !v->is_array()) {
            schema(path + "/" + key, "expected an array");
            return nullptr;
        }
        return v;
    }
};

} // namespace detail

} // namespace decoyforge
