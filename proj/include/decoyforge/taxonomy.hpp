#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace decoyforge {

class TaxonomyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// OS platform tree (e.g. Any > Linux > Debian). Loaded from data so new
/// platforms do not need a rebuild. The root stands for "any platform" and is
/// spelled `*` in constraints.
class OsTaxonomy {
    struct Node {
        std::string name;
        std::string cpe; // vendor:product, empty for abstract nodes
        std::optional<std::size_t> parent;
    };
    std::vector<Node> nodes_;
    std::map<std::string, std::size_t, std::less<>> index_;

    void add(const nlohmann::json& j, std::optional<std::size_t> parent)
    {
        if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
            throw TaxonomyError("taxonomy node must be an object with a string 'name'");
        auto name = j["name"].get<std::string>();
        if (name.empty() || name == "*")
            throw TaxonomyError("invalid taxonomy node name '" + name + "'");
        if (index_.count(name))
            throw TaxonomyError("duplicate taxonomy node '" + name + "'");
        std::string cpe;
        if (j.contains("cpe")) {
            if (!j["cpe"].is_string())
                throw TaxonomyError("taxonomy node '" + name + "': 'cpe' must be a string");
            cpe = j["cpe"].get<std::string>();
        }
        const auto id = nodes_.size();
        nodes_.push_back({name, cpe, parent});
        index_.emplace(name, id);
        if (j.contains("children")) {
            if (!j["children"].is_array())
                throw TaxonomyError("taxonomy node '" + name + "': 'children' must be an array");
            for (const auto& c : j["children"])
                add(c, id);
        }
    }

    std::optional<std::size_t> find(std::string_view name) const
    {
        if (name == "*")
            return 0;
        auto it = index_.find(name);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

public:
    static OsTaxonomy from_json(const nlohmann::json& j)
    {
        OsTaxonomy t;
        t.add(j, std::nullopt);
        return t;
    }

    /// Any > {Windows > {...}, Linux > {...}}: a small default used by tests.
    static OsTaxonomy builtin()
    {
        return from_json(nlohmann::json::parse(R"({"name": "Any", "children": [
            {"name": "Windows", "children": [
                {"name": "Windows7", "cpe": "microsoft:windows_7"},
                {"name": "Windows8.1", "cpe": "microsoft:windows_8.1"},
                {"name": "Windows10", "cpe": "microsoft:windows_10"},
                {"name": "WindowsXP", "cpe": "microsoft:windows_xp"}]},
            {"name": "Linux", "children": [
                {"name": "Debian", "cpe": "debian:debian_linux"},
                {"name": "Ubuntu", "cpe": "canonical:ubuntu_linux"},
                {"name": "Fedora", "cpe": "fedoraproject:fedora"}]}]})"));
    }

    const std::string& root() const { return nodes_.front().name; }

    bool contains(std::string_view name) const { return find(name).has_value(); }

    /// True when `ancestor` lies on the path from `node` to the root
    /// (inclusive). `*` is the root.
    bool subsumes(std::string_view ancestor, std::string_view node) const
    {
        auto a = find(ancestor);
        auto n = find(node);
        if (!a || !n)
            return false;
        for (std::optional<std::size_t> cur = *n; cur; cur = nodes_[*cur].parent)
            if (*cur == *a)
                return true;
        return false;
    }

    /// Top-level family of a node (the child of the root on its path), or the
    /// root itself.
    std::string family(std::string_view name) const
    {
        auto n = find(name);
        if (!n)
            throw TaxonomyError("unknown platform '" + std::string(name) + "'");
        std::size_t cur = *n;
        while (nodes_[cur].parent && nodes_[cur].parent != std::size_t{0})
            cur = *nodes_[cur].parent;
        return nodes_[cur].name;
    }

    /// Children of the root, in declaration order.
    std::vector<std::string> families() const
    {
        std::vector<std::string> out;
        for (const auto& n : nodes_)
            if (n.parent == std::size_t{0})
                out.push_back(n.name);
        return out;
    }

    const std::string& cpe(std::string_view name) const
    {
        auto n = find(name);
        if (!n)
            throw TaxonomyError("unknown platform '" + std::string(name) + "'");
        return nodes_[*n].cpe;
    }

    /// Canonical spelling: the root becomes `*`.
    std::string canonical(std::string_view name) const
    {
        if (name == "*" || name == root())
            return "*";
        return std::string(name);
    }
};

} // namespace decoyforge
