#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "refine.hpp"
#include "secrets.hpp"

namespace decoyforge {

struct OsSpec {
    std::string type; // CPE vendor:product
    std::string version;
    friend bool operator==(const OsSpec&, const OsSpec&) = default;
};

struct SoftwareSpec {
    std::string type;
    std::string version;
    friend bool operator==(const SoftwareSpec&, const SoftwareSpec&) = default;
};

struct CredentialValue {
    std::string type;
    std::string value;
    friend bool operator==(const CredentialValue&, const CredentialValue&) = default;
};

struct UserConfig {
    std::string name;
    std::string group;
    std::string privilege;
    CredentialValue credentials;
    friend bool operator==(const UserConfig&, const UserConfig&) = default;
};

struct FileConfig {
    std::string source;
    std::string destination;
    std::string permissions;
    std::string modification;
    std::string owner;
    std::string group;
    friend bool operator==(const FileConfig&, const FileConfig&) = default;
};

struct MachineConfig {
    std::string name;
    OsSpec os;
    std::vector<SoftwareSpec> software;
    std::vector<UserConfig> users;
    std::vector<FileConfig> files;
    friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

using ArchitectureConfig = std::vector<MachineConfig>;

/// Body of a file referenced by a config `Source`, relative to the output
/// directory.
struct GeneratedFile {
    std::string path;
    std::string content;
    friend bool operator==(const GeneratedFile&, const GeneratedFile&) = default;
};

struct Deployment {
    ArchitectureConfig config;
    std::vector<GeneratedFile> files;
};

class NoDeployableOs : public std::runtime_error {
public:
    explicit NoDeployableOs(const MachineId& m, const OsConstraint& os)
        : std::runtime_error("machine " + m + ": no pool image satisfies os " + os.platform + " " + os.versions.str())
    {}
};

class UnresolvedSecret : public std::runtime_error {
public:
    explicit UnresolvedSecret(const SecretId& id) : std::runtime_error("secret '" + id + "' has no generated value") {}
};

namespace detail {

// Accounts that exist on a stock image of the family.
inline bool builtin_account(const std::string& family, const std::string& name)
{
    if (family == "Linux")
        return name == "root";
    if (family == "Windows")
        return name == "Administrator" || name == "SYSTEM";
    return false;
}

inline std::string default_owner(const std::string& family) { return family == "Windows" ? "SYSTEM" : "root"; }

inline std::string pick_version(const VersionSet& v)
{
    switch (v.kind()) {
    case VersionSet::Kind::Any: return "latest";
    case VersionSet::Kind::Finite: return v.elements().front().str();
    case VersionSet::Kind::Range:
        if (v.lower())
            return v.lower()->value.str();
        return v.upper()->value.str();
    }
    return "latest";
}

/// "~bob/x" -> {"bob", "x"}.
inline std::optional<std::pair<std::string, std::string>> split_home(const std::string& path)
{
    if (path.size() < 2 || path[0] != '~')
        return std::nullopt;
    const auto slash = path.find('/');
    if (slash == std::string::npos || slash == 1)
        return std::nullopt;
    return std::make_pair(path.substr(1, slash - 1), path.substr(slash + 1));
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to)
{
    for (auto at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size()))
        s.replace(at, from.size(), to);
    return s;
}

inline std::string load_template(const Catalog& c, const std::string& name)
{
    if (!c.templates_dir.empty()) {
        std::ifstream in(c.templates_dir / (name + ".txt"), std::ios::binary);
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }
    }
    return "# " + name + "\n{{secret}}\n";
}

/// Fills `{{user}}` and `{{secret:<id>}}`; lines holding `{{secret}}`,
/// `{{secret_id}}`, `{{secret_public}}` or `{{secret_sha256}}` are repeated
/// once per bound secret.
inline std::string render(const std::string& body, const ContentFragment& frag, const SecretStore& store)
{
    auto value = [&](const SecretId& id) -> const StoredSecret& {
        if (!store.contains(id))
            throw UnresolvedSecret(id);
        return store.at(id);
    };
    std::string out;
    std::istringstream lines(body);
    for (std::string line; std::getline(lines, line);) {
        line = replace_all(line, "{{user}}", frag.user);
        for (auto at = line.find("{{secret:"); at != std::string::npos; at = line.find("{{secret:", at)) {
            const auto end = line.find("}}", at);
            if (end == std::string::npos)
                break;
            const auto id = line.substr(at + 9, end - at - 9);
            const auto& v = value(id).value;
            line.replace(at, end + 2 - at, v);
            at += v.size();
        }
        const bool per_secret = line.find("{{secret}}") != std::string::npos ||
                                line.find("{{secret_id}}") != std::string::npos ||
                                line.find("{{secret_public}}") != std::string::npos ||
                                line.find("{{secret_sha256}}") != std::string::npos;
        if (!per_secret) {
            out += line + "\n";
            continue;
        }
        for (const auto& id : frag.secrets) {
            const auto& sec = value(id);
            auto l = replace_all(line, "{{secret_id}}", id);
            l = replace_all(l, "{{secret_public}}", sec.public_part.empty() ? sec.value : sec.public_part);
            if (l.find("{{secret_sha256}}") != std::string::npos)
                l = replace_all(l, "{{secret_sha256}}", sha256_hex(sec.value));
            l = replace_all(l, "{{secret}}", sec.value);
            out += l + "\n";
        }
    }
    return out;
}

inline CredentialValue resolve_credentials(const CredentialSpec& spec, const SecretStore& store, std::uint64_t seed,
                                           const MachineId& m, const std::string& user)
{
    if (const auto* lit = std::get_if<LiteralCredential>(&spec))
        return {std::string(to_string(SecretType::PlaintextPassword)), lit->value};
    if (const auto* sec = std::get_if<SecretCredential>(&spec)) {
        if (!store.contains(sec->secret))
            throw UnresolvedSecret(sec->secret);
        const auto& v = store.at(sec->secret);
        return {std::string(to_string(v.type)), v.type == SecretType::SshKeyPair ? v.public_part : v.value};
    }
    if (std::holds_alternative<WeakCredential>(spec)) {
        auto rng = keyed_rng(seed, {"weak", m, user});
        return {std::string(to_string(SecretType::WeakPassword)),
                std::string(kWeakWords[uniform_below(rng, kWeakWords.size())])};
    }
    auto rng = keyed_rng(seed, {"hash", m, user});
    return {std::string(to_string(SecretType::HashedPassword)), sha256_hex(random_alnum(rng, 32))};
}

} // namespace detail

/// Concretizes a satisfiable dictionary: picks a pool image per machine,
/// fills every wildcard with its default and renders file bodies.
inline Deployment apply_defaults(const ConstraintDictionary& d, const SecretStore& store, const Catalog& c,
                                 std::uint64_t seed)
{
    Deployment out;
    for (const auto& [m, entry] : d.entries()) {
        if (!entry)
            throw std::invalid_argument("machine " + m + " has an unsatisfiable constraint: " + entry.unsat().reason);
        const auto& mc = *entry;
        MachineConfig cfg;
        cfg.name = m;

        std::vector<const OsImage*> images;
        for (const auto& img : c.os_pool)
            if (c.taxonomy.subsumes(mc.os.platform, img.platform) && mc.os.versions.contains(img.version))
                images.push_back(&img);
        if (images.empty())
            throw NoDeployableOs(m, mc.os);
        auto rng = detail::keyed_rng(seed, {"os", m});
        const auto* img = images[detail::uniform_below(rng, images.size())];
        cfg.os = {c.taxonomy.cpe(img->platform), img->version.str()};
        const auto family = c.taxonomy.family(img->platform);

        for (const auto& sw : mc.software)
            cfg.software.push_back({sw.product, detail::pick_version(sw.versions)});

        for (const auto& acc : mc.accounts) {
            if (detail::builtin_account(family, acc.name) && is_wildcard(acc.credentials))
                continue;
            cfg.users.push_back({acc.name, acc.group.value_or(acc.name),
                                 std::string(to_string(acc.privilege.value_or(Privilege::User))),
                                 detail::resolve_credentials(acc.credentials, store, seed, m, acc.name)});
        }

        std::set<std::string> used_names;
        for (const auto& f : mc.files) {
            FileConfig fc;
            const auto home = detail::split_home(f.path);
            fc.owner = f.owner.value_or(home ? home->first : detail::default_owner(family));
            fc.group = f.group.value_or(fc.owner);
            fc.destination = home && home->first == fc.owner ? "~/" + home->second : f.path;
            fc.permissions = f.permissions.value_or("0644");
            fc.modification = std::string(to_string(f.mode));
            if (!f.content.empty()) {
                auto name = f.content.front().template_name;
                for (int n = 2; !used_names.insert(name).second; ++n)
                    name = f.content.front().template_name + "_" + std::to_string(n);
                const auto rel = "generated_files/" + m + "/" + name;
                fc.source = "./" + rel;
                std::string body;
                for (const auto& frag : f.content)
                    body += detail::render(detail::load_template(c, frag.template_name), frag, store);
                out.files.push_back({rel, std::move(body)});
            }
            cfg.files.push_back(std::move(fc));
        }
        out.config.push_back(std::move(cfg));
    }
    return out;
}

} // namespace decoyforge
