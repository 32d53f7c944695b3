#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "constraint.hpp"
#include "json_io.hpp"
#include "scenario.hpp"

namespace decoyforge {

/// `count` empty means "any positive number" (written `*`).
struct SecretRequirement {
    SecretType type;
    std::optional<std::size_t> count;

    friend bool operator==(const SecretRequirement&, const SecretRequirement&) = default;
};

struct SecretPrecondition {
    std::vector<SecretRequirement> required;
    std::vector<SecretRequirement> rewarded;
};

// Placeholders usable in procedure constraints; bound per transition.
inline constexpr std::string_view kRequiredSlot = "$requires";
inline constexpr std::string_view kRewardedSlot = "$rewards";
inline constexpr std::string_view kUserMarker = "{{user}}";

struct Procedure {
    std::string id;
    std::string name;
    TechniqueId technique = TechniqueId::of("T0");
    std::string description;
    MachineConstraint entry; // applies to the transition's source machine
    MachineConstraint exit;  // applies to the destination machine
    SecretPrecondition preconditions;
    bool corpus = false; // a file-corpus variant, collapsed in N / N_OS counts
    std::size_t order = 0;
};

struct OsImage {
    std::string platform;
    Version version;
};

struct Catalog {
    std::vector<Procedure> procedures;
    OsTaxonomy taxonomy = OsTaxonomy::builtin();
    std::vector<OsImage> os_pool;
    std::filesystem::path templates_dir; // empty: no bundled bodies
    std::vector<std::string> notes;

    const Procedure* find(std::string_view id) const
    {
        for (const auto& p : procedures)
            if (p.id == id)
                return &p;
        return nullptr;
    }

    std::vector<const Procedure*> for_technique(std::string_view technique) const
    {
        std::vector<const Procedure*> out;
        for (const auto& p : procedures)
            if (p.technique.str() == technique)
                out.push_back(&p);
        return out;
    }

    bool deployable(const OsConstraint& os) const
    {
        for (const auto& img : os_pool)
            if (taxonomy.subsumes(os.platform, img.platform) && os.versions.contains(img.version))
                return true;
        return false;
    }
};

/// Secret id -> type, as fixed by a procedure choice.
using Typing = std::map<SecretId, SecretType>;

namespace detail {

inline void match_side(const std::vector<SecretRequirement>& reqs, const std::vector<SecretId>& secrets,
                       const std::map<SecretId, SecretType>& resolved, std::size_t next, std::vector<std::size_t>& load,
                       Typing& typing, std::set<Typing>& out)
{
    if (next == secrets.size()) {
        for (std::size_t i = 0; i < reqs.size(); ++i) {
            if (reqs[i].count ? load[i] != *reqs[i].count : load[i] == 0)
                return;
        }
        out.insert(typing);
        return;
    }
    const auto& id = secrets[next];
    const auto known = resolved.find(id);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        if (known != resolved.end() && known->second != reqs[i].type)
            continue;
        if (reqs[i].count && load[i] == *reqs[i].count)
            continue;
        ++load[i];
        typing[id] = reqs[i].type;
        match_side(reqs, secrets, resolved, next + 1, load, typing, out);
        typing.erase(id);
        --load[i];
    }
}

inline std::vector<Typing> side_typings(const std::vector<SecretRequirement>& reqs, const std::set<SecretId>& secrets,
                                        const std::map<SecretId, SecretType>& resolved)
{
    std::set<Typing> out;
    std::vector<std::size_t> load(reqs.size(), 0);
    Typing typing;
    const std::vector<SecretId> ordered(secrets.begin(), secrets.end());
    match_side(reqs, ordered, resolved, 0, load, typing, out);
    return {out.begin(), out.end()};
}

} // namespace detail

/// Every way of typing the transition's secrets that satisfies the
/// procedure's requires/rewards lists: each secret fills exactly one entry,
/// numeric counts match exactly, `*` counts take at least one, and already
/// resolved secrets keep their type. Empty when the procedure does not fit.
inline std::vector<Typing> precondition_typings(const Procedure& p, const Transition& t,
                                                const std::map<SecretId, SecretType>& resolved)
{
    const auto pre = detail::side_typings(p.preconditions.required, t.pre, resolved);
    if (pre.empty())
        return {};
    const auto post = detail::side_typings(p.preconditions.rewarded, t.post, resolved);
    std::vector<Typing> out;
    for (const auto& a : pre)
        for (const auto& b : post) {
            Typing merged = a;
            merged.insert(b.begin(), b.end());
            out.push_back(std::move(merged));
        }
    return out;
}

/// Comp(t): same-technique procedures whose secret preconditions fit, in
/// catalog order.
inline std::vector<const Procedure*> compatible(const Transition& t, const std::map<SecretId, SecretType>& resolved,
                                                const Catalog& c)
{
    std::vector<const Procedure*> out;
    for (const auto* p : c.for_technique(t.technique))
        if (!precondition_typings(*p, t, resolved).empty())
            out.push_back(p);
    return out;
}

/// Why a same-technique procedure is not in Comp(t).
inline std::string exclusion_reason(const Procedure& p, const Transition& t,
                                    const std::map<SecretId, SecretType>& resolved)
{
    if (precondition_typings(p, t, {}).empty())
        return "secret count precondition does not fit the transition";
    std::string held;
    for (const auto& id : t.pre)
        if (auto it = resolved.find(id); it != resolved.end())
            held += (held.empty() ? "" : ", ") + id + ":" + std::string(to_string(it->second));
    for (const auto& id : t.post)
        if (auto it = resolved.find(id); it != resolved.end())
            held += (held.empty() ? "" : ", ") + id + ":" + std::string(to_string(it->second));
    return "secret type precondition does not fit already generated secrets (" + held + ")";
}

/// What a role constraint is bound to when a procedure refines a transition.
struct RoleBinding {
    UserId user;
    std::vector<SecretId> required;
    std::vector<SecretId> rewarded;
};

namespace detail {

inline std::string bind_user(std::string s, const UserId& user)
{
    if (s.rfind("~/", 0) == 0)
        s = "~" + user + s.substr(1);
    for (auto at = s.find(kUserMarker); at != std::string::npos; at = s.find(kUserMarker, at + user.size()))
        s.replace(at, kUserMarker.size(), user);
    return s;
}

inline std::vector<SecretId> bind_slot(const std::vector<SecretId>& ids, const RoleBinding& b)
{
    std::vector<SecretId> out;
    for (const auto& id : ids) {
        if (id == kRequiredSlot)
            out.insert(out.end(), b.required.begin(), b.required.end());
        else if (id == kRewardedSlot)
            out.insert(out.end(), b.rewarded.begin(), b.rewarded.end());
        else
            out.push_back(id);
    }
    return out;
}

} // namespace detail

/// Instantiates a procedure's role constraint for one transition: wildcard
/// account names become the role's user, `~/` paths that user's home, and
/// secret slots the transition's secrets.
inline MachineConstraint bind_role(const MachineConstraint& role, const RoleBinding& b, const Procedure& p)
{
    MachineConstraint out = role;
    for (auto& acc : out.accounts) {
        if (acc.name == "*")
            acc.name = b.user;
        acc.name = detail::bind_user(acc.name, b.user);
        if (auto* sc = std::get_if<SecretCredential>(&acc.credentials)) {
            auto ids = detail::bind_slot({sc->secret}, b);
            if (!ids.empty())
                sc->secret = ids.front();
        }
    }
    for (auto& f : out.files) {
        f.path = detail::bind_user(f.path, b.user);
        if (f.owner)
            f.owner = detail::bind_user(*f.owner, b.user);
        if (f.group)
            f.group = detail::bind_user(*f.group, b.user);
        for (auto& frag : f.content) {
            frag.secrets = detail::bind_slot(frag.secrets, b);
            frag.user = b.user;
            frag.order = p.order;
            frag.procedure = p.id;
        }
    }
    return out;
}

inline RoleBinding entry_binding(const Transition& t)
{
    return {t.src.user, {t.pre.begin(), t.pre.end()}, {t.post.begin(), t.post.end()}};
}

inline RoleBinding exit_binding(const Transition& t)
{
    return {t.dst.user, {t.pre.begin(), t.pre.end()}, {t.post.begin(), t.post.end()}};
}

namespace detail {

class CatalogReader {
    IssueSink& sink_;
    const OsTaxonomy& tax_;

public:
    CatalogReader(IssueSink& sink, const OsTaxonomy& tax) : sink_(sink), tax_(tax) {}

    std::optional<VersionSet> versions(const json& v, const std::string& path)
    {
        if (!v.is_string()) {
            sink_.schema(path, "expected a version expression string");
            return std::nullopt;
        }
        try {
            return VersionSet::parse(v.get<std::string>());
        } catch (const VersionParseError& e) {
            sink_.add(LoadErrorKind::InvalidVersion, path, e.what());
            return std::nullopt;
        }
    }

    std::optional<std::string> wild_string(const json& obj, const std::string& path, const char* key)
    {
        auto s = sink_.string_at(obj, path, key, false);
        if (!s || *s == "*")
            return std::nullopt;
        return s;
    }

    OsConstraint os(const json& j, const std::string& path)
    {
        OsConstraint out;
        if (auto p = sink_.string_at(j, path, "platform", false)) {
            if (*p != "*" && !tax_.contains(*p))
                sink_.add(LoadErrorKind::UnknownPlatform, path + "/platform", "platform '" + *p + "' not in taxonomy");
            else
                out.platform = tax_.canonical(*p);
        }
        if (j.is_object() && j.contains("versions"))
            if (auto v = versions(j["versions"], path + "/versions"))
                out.versions = *v;
        return out;
    }

    CredentialSpec credentials(const json& j, const std::string& path)
    {
        if (j.is_string()) {
            const auto s = j.get<std::string>();
            if (s == "*")
                return AnyCredential{};
            if (s == "weak")
                return WeakCredential{};
            if (s == "random_hash")
                return RandomHashCredential{};
        } else if (j.is_object() && j.size() == 1) {
            if (j.contains("from_secret") && j["from_secret"].is_string())
                return SecretCredential{j["from_secret"].get<std::string>()};
            if (j.contains("literal") && j["literal"].is_string())
                return LiteralCredential{j["literal"].get<std::string>()};
        }
        sink_.schema(path, "credentials must be \"*\", \"weak\", \"random_hash\", {\"from_secret\": ...} or "
                           "{\"literal\": ...}");
        return AnyCredential{};
    }

    AccountConstraint account(const json& j, const std::string& path)
    {
        AccountConstraint a;
        if (auto n = sink_.string_at(j, path, "name", false))
            a.name = *n;
        a.group = wild_string(j, path, "group");
        if (auto p = wild_string(j, path, "privilege")) {
            if (auto priv = parse_privilege(*p))
                a.privilege = *priv;
            else
                sink_.schema(path + "/privilege", "expected \"User\", \"SuperUser\" or \"*\"");
        }
        if (j.is_object() && j.contains("credentials"))
            a.credentials = credentials(j["credentials"], path + "/credentials");
        return a;
    }

    SoftwareConstraint software(const json& j, const std::string& path)
    {
        SoftwareConstraint s;
        if (auto p = sink_.string_at(j, path, "product")) {
            s.product = *p;
            if (!is_cpe_product(*p))
                sink_.add(LoadErrorKind::InvalidCpe, path + "/product", "'" + *p + "' is not vendor:product");
        }
        if (j.is_object() && j.contains("versions"))
            if (auto v = versions(j["versions"], path + "/versions"))
                s.versions = *v;
        if (j.is_object() && j.contains("port")) {
            const auto& pj = j["port"];
            if (pj.is_number_integer() && pj.get<long long>() >= 1 && pj.get<long long>() <= 65535)
                s.port = static_cast<std::uint16_t>(pj.get<long long>());
            else if (!(pj.is_string() && pj.get<std::string>() == "*"))
                sink_.schema(path + "/port", "port must be 1-65535 or \"*\"");
        }
        return s;
    }

    FileConstraint file(const json& j, const std::string& path)
    {
        FileConstraint f;
        if (auto p = sink_.string_at(j, path, "path")) {
            if (p->empty())
                sink_.schema(path + "/path", "empty path");
            f.path = *p;
        }
        if (auto perms = wild_string(j, path, "permissions")) {
            if (auto norm = normalize_permissions(*perms))
                f.permissions = *norm;
            else
                sink_.add(LoadErrorKind::InvalidPermissions, path + "/permissions",
                          "'" + *perms + "' is not an octal permission string");
        }
        if (auto m = sink_.string_at(j, path, "mode")) {
            if (auto mode = parse_file_mode(*m))
                f.mode = *mode;
            else
                sink_.schema(path + "/mode", "mode must be CREATE, WRITE, APPEND or MODIFY_PERMISSIONS");
        }
        f.owner = wild_string(j, path, "owner");
        f.group = wild_string(j, path, "group");
        if (auto tmpl = sink_.string_at(j, path, "template", false)) {
            ContentFragment frag;
            frag.template_name = *tmpl;
            if (j.contains("secrets")) {
                const auto& sj = j["secrets"];
                if (sj.is_string())
                    frag.secrets.push_back(sj.get<std::string>());
                else if (sj.is_array() && std::all_of(sj.begin(), sj.end(), [](auto& x) { return x.is_string(); }))
                    frag.secrets = sj.get<std::vector<std::string>>();
                else
                    sink_.schema(path + "/secrets", "expected a slot name or an array of secret ids");
            }
            f.content.push_back(std::move(frag));
        } else if (f.mode != FileMode::ModifyPermissions) {
            sink_.schema(path, "files other than MODIFY_PERMISSIONS need a 'template'");
        }
        return f;
    }

    MachineConstraint role(const json& j, const std::string& path)
    {
        MachineConstraint m;
        if (!j.is_object()) {
            sink_.schema(path, "expected an object");
            return m;
        }
        if (j.contains("os"))
            m.os = os(j["os"], path + "/os");
        if (const auto* a = sink_.array_at(j, path, "accounts", false))
            for (std::size_t i = 0; i < a->size(); ++i)
                m.accounts.push_back(account((*a)[i], path + "/accounts/" + std::to_string(i)));
        if (const auto* a = sink_.array_at(j, path, "software", false))
            for (std::size_t i = 0; i < a->size(); ++i)
                m.software.push_back(software((*a)[i], path + "/software/" + std::to_string(i)));
        if (const auto* a = sink_.array_at(j, path, "files", false))
            for (std::size_t i = 0; i < a->size(); ++i)
                m.files.push_back(file((*a)[i], path + "/files/" + std::to_string(i)));
        return m;
    }

    std::vector<SecretRequirement> requirements(const json& obj, const std::string& path, const char* key)
    {
        std::vector<SecretRequirement> out;
        const auto* arr = sink_.array_at(obj, path, key, false);
        if (!arr)
            return out;
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const auto at = path + "/" + key + "/" + std::to_string(i);
            const auto& r = (*arr)[i];
            auto type_name = sink_.string_at(r, at, "type");
            auto type = type_name ? parse_secret_type(*type_name) : std::nullopt;
            if (type_name && !type)
                sink_.schema(at + "/type", "unknown secret type '" + *type_name + "'");
            std::optional<std::size_t> count = 1;
            if (r.is_object() && r.contains("count")) {
                const auto& c = r["count"];
                if (c.is_string() && c.get<std::string>() == "*")
                    count.reset();
                else if (c.is_number_integer() && c.get<long long>() >= 1)
                    count = static_cast<std::size_t>(c.get<long long>());
                else
                    sink_.schema(at + "/count", "count must be a positive integer or \"*\"");
            }
            if (type)
                out.push_back({*type, count});
        }
        return out;
    }
};

inline void check_role_templates(const MachineConstraint& m, const std::filesystem::path& dir,
                                 const std::string& path, IssueSink& sink)
{
    for (std::size_t i = 0; i < m.files.size(); ++i)
        for (const auto& frag : m.files[i].content)
            if (!std::filesystem::exists(dir / (frag.template_name + ".txt")))
                sink.add(LoadErrorKind::UnknownTemplate, path + "/files/" + std::to_string(i) + "/template",
                         "no bundled template '" + frag.template_name + "'");
}

} // namespace detail

/// Validates and builds a catalog. Relative `taxonomy` and `templates_dir`
/// references resolve against `base_dir`. Throws LoadError with every issue.
inline Catalog catalog_from_json(const json& doc, const std::filesystem::path& base_dir = {})
{
    detail::IssueSink sink;
    Catalog c;
    if (!doc.is_object()) {
        sink.schema("", "catalog document must be an object");
        sink.throw_if_any();
    }

    if (const auto* t = sink.member(doc, "", "taxonomy")) {
        try {
            if (t->is_string())
                c.taxonomy = OsTaxonomy::from_json(parse_json_text(read_text_file((base_dir / t->get<std::string>()).string())));
            else
                c.taxonomy = OsTaxonomy::from_json(*t);
        } catch (const TaxonomyError& e) {
            sink.schema("/taxonomy", e.what());
        } catch (const LoadError& e) {
            for (const auto& issue : e.issues())
                sink.add(issue.kind, "/taxonomy " + issue.location, issue.message);
        }
    }
    if (auto dir = sink.string_at(doc, "", "templates_dir", false))
        c.templates_dir = base_dir / *dir;
    if (const auto* notes = sink.array_at(doc, "", "notes", false))
        for (const auto& n : *notes)
            if (n.is_string())
                c.notes.push_back(n.get<std::string>());

    detail::CatalogReader reader(sink, c.taxonomy);

    if (const auto* pool = sink.array_at(doc, "", "os_pool")) {
        if (pool->empty())
            sink.add(LoadErrorKind::EmptyOsPool, "/os_pool", "no deployable OS image");
        for (std::size_t i = 0; i < pool->size(); ++i) {
            const auto path = "/os_pool/" + std::to_string(i);
            auto platform = sink.string_at((*pool)[i], path, "platform");
            auto version = sink.string_at((*pool)[i], path, "version");
            if (!platform || !version)
                continue;
            if (!c.taxonomy.contains(*platform) || c.taxonomy.cpe(*platform).empty()) {
                sink.add(LoadErrorKind::UnknownPlatform, path + "/platform",
                         "'" + *platform + "' is not a concrete taxonomy platform with a CPE name");
                continue;
            }
            try {
                c.os_pool.push_back({*platform, Version::parse(*version)});
            } catch (const VersionParseError& e) {
                sink.add(LoadErrorKind::InvalidVersion, path + "/version", e.what());
            }
        }
    }

    if (const auto* procs = sink.array_at(doc, "", "procedures")) {
        if (procs->empty())
            sink.add(LoadErrorKind::EmptyCatalog, "/procedures", "catalog has no procedures");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < procs->size(); ++i) {
            const auto path = "/procedures/" + std::to_string(i);
            const auto& j = (*procs)[i];
            Procedure p;
            p.order = i;
            if (auto id = sink.string_at(j, path, "id")) {
                p.id = *id;
                if (!ids.insert(*id).second)
                    sink.add(LoadErrorKind::DuplicateProcedure, path + "/id", "procedure id '" + *id + "' repeated");
            }
            p.name = sink.string_at(j, path, "name", false).value_or(p.id);
            p.description = sink.string_at(j, path, "description", false).value_or("");
            if (auto tech = sink.string_at(j, path, "technique")) {
                if (auto t = TechniqueId::parse(*tech))
                    p.technique = *t;
                else
                    sink.add(LoadErrorKind::InvalidTechnique, path + "/technique", "'" + *tech + "' is not a technique id");
            }
            if (j.is_object() && j.contains("corpus"))
                p.corpus = j["corpus"].is_boolean() && j["corpus"].get<bool>();
            if (j.is_object() && j.contains("entry"))
                p.entry = reader.role(j["entry"], path + "/entry");
            if (j.is_object() && j.contains("exit"))
                p.exit = reader.role(j["exit"], path + "/exit");
            p.preconditions.required = reader.requirements(j, path, "requires");
            p.preconditions.rewarded = reader.requirements(j, path, "rewards");

            for (const auto* role : {&p.entry, &p.exit}) {
                const auto role_path = path + (role == &p.entry ? "/entry" : "/exit");
                if (auto n = normalize(*role, c.taxonomy); !n)
                    sink.add(LoadErrorKind::UnsatisfiableProcedure, role_path, n.unsat().reason);
                if (!c.templates_dir.empty())
                    detail::check_role_templates(*role, c.templates_dir, role_path, sink);
            }
            c.procedures.push_back(std::move(p));
        }
    }

    sink.throw_if_any();
    return c;
}

inline Catalog load_catalog_file(const std::string& path)
{
    const auto base = std::filesystem::path(path).parent_path();
    return catalog_from_json(parse_json_text(read_text_file(path)), base);
}

} // namespace decoyforge
