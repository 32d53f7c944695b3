#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "core.hpp"
#include "taxonomy.hpp"
#include "version.hpp"

namespace decoyforge {

/// The unsatisfiable constraint. Absorbing under fusion.
struct Unsat {
    std::string reason;
};

/// Result of a meet/fusion: a valid combination or Unsat.
template <class T>
class Fused {
    std::variant<T, Unsat> v_;

public:
    Fused(T value) : v_(std::move(value)) {}
    Fused(Unsat u) : v_(std::move(u)) {}

    bool ok() const noexcept { return v_.index() == 0; }
    explicit operator bool() const noexcept { return ok(); }

    const T& value() const& { return std::get<0>(v_); }
    T& value() & { return std::get<0>(v_); }
    T&& value() && { return std::get<0>(std::move(v_)); }
    const T& operator*() const& { return value(); }
    const T* operator->() const { return &value(); }

    const Unsat& unsat() const { return std::get<1>(v_); }
};

// Wildcards: an empty optional, `*` for platform/name strings, VersionSet::any().

struct OsConstraint {
    std::string platform = "*";
    VersionSet versions;

    friend bool operator==(const OsConstraint&, const OsConstraint&) = default;
};

struct AnyCredential {
    friend bool operator==(const AnyCredential&, const AnyCredential&) = default;
};
struct LiteralCredential {
    std::string value;
    friend bool operator==(const LiteralCredential&, const LiteralCredential&) = default;
};
struct SecretCredential {
    SecretId secret;
    friend bool operator==(const SecretCredential&, const SecretCredential&) = default;
};
struct WeakCredential {
    friend bool operator==(const WeakCredential&, const WeakCredential&) = default;
};
struct RandomHashCredential {
    friend bool operator==(const RandomHashCredential&, const RandomHashCredential&) = default;
};

using CredentialSpec =
    std::variant<AnyCredential, LiteralCredential, SecretCredential, WeakCredential, RandomHashCredential>;

inline std::string describe(const CredentialSpec& c)
{
    struct V {
        std::string operator()(const AnyCredential&) const { return "*"; }
        std::string operator()(const LiteralCredential&) const { return "literal"; }
        std::string operator()(const SecretCredential& s) const { return "FromSecret(" + s.secret + ")"; }
        std::string operator()(const WeakCredential&) const { return "WeakBruteforceable"; }
        std::string operator()(const RandomHashCredential&) const { return "RandomHash"; }
    };
    return std::visit(V{}, c);
}

inline bool is_wildcard(const CredentialSpec& c) { return std::holds_alternative<AnyCredential>(c); }

struct AccountConstraint {
    std::string name = "*";
    std::optional<std::string> group;
    std::optional<Privilege> privilege;
    CredentialSpec credentials;

    friend bool operator==(const AccountConstraint&, const AccountConstraint&) = default;
};

struct SoftwareConstraint {
    std::string product; // CPE vendor:product
    VersionSet versions;
    std::optional<std::uint16_t> port;

    friend bool operator==(const SoftwareConstraint&, const SoftwareConstraint&) = default;
};

enum class FileMode { Create, Write, Append, ModifyPermissions };

inline std::string_view to_string(FileMode m)
{
    switch (m) {
    case FileMode::Create: return "CREATE";
    case FileMode::Write: return "WRITE";
    case FileMode::Append: return "APPEND";
    case FileMode::ModifyPermissions: return "MODIFY_PERMISSIONS";
    }
    return "?";
}

inline std::optional<FileMode> parse_file_mode(std::string_view s)
{
    for (auto m : {FileMode::Create, FileMode::Write, FileMode::Append, FileMode::ModifyPermissions})
        if (to_string(m) == s)
            return m;
    return std::nullopt;
}

/// One piece of file content: a bundled template instantiated with secrets.
/// `order` is the contributing procedure's catalog position; together with
/// `procedure` it fixes the concatenation order of same-path appends.
struct ContentFragment {
    std::string template_name;
    std::vector<SecretId> secrets;
    std::string user;
    std::size_t order = 0;
    std::string procedure;

    auto key() const { return std::tie(order, procedure, template_name, secrets, user); }
    bool same_content(const ContentFragment& o) const
    {
        return template_name == o.template_name && secrets == o.secrets && user == o.user;
    }
    friend bool operator==(const ContentFragment&, const ContentFragment&) = default;
};

struct FileConstraint {
    std::string path;
    std::optional<std::string> permissions; // 4-digit octal
    FileMode mode = FileMode::Create;
    std::vector<ContentFragment> content;
    std::optional<std::string> owner;
    std::optional<std::string> group;

    friend bool operator==(const FileConstraint&, const FileConstraint&) = default;
};

struct MachineConstraint {
    OsConstraint os;
    std::vector<AccountConstraint> accounts;
    std::vector<SoftwareConstraint> software;
    std::vector<FileConstraint> files;

    bool empty() const
    {
        return os.platform == "*" && os.versions.is_any() && accounts.empty() && software.empty() && files.empty();
    }

    friend bool operator==(const MachineConstraint&, const MachineConstraint&) = default;
};

/// "644" -> "0644"; nullopt when not 3-4 octal digits.
inline std::optional<std::string> normalize_permissions(std::string_view s)
{
    if (s.size() < 3 || s.size() > 4)
        return std::nullopt;
    for (char c : s)
        if (c < '0' || c > '7')
            return std::nullopt;
    return std::string(4 - s.size(), '0') + std::string(s);
}

/// `vendor:product` with CPE-legal characters on both sides.
inline bool is_cpe_product(std::string_view s)
{
    const auto colon = s.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size())
        return false;
    if (s.find(':', colon + 1) != std::string_view::npos)
        return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.' ||
                        c == '~' || c == '%' || c == ':';
        if (!ok)
            return false;
    }
    return true;
}

namespace detail {

inline std::string show(const std::string& s) { return s; }
inline std::string show(Privilege p) { return std::string(to_string(p)); }
inline std::string show(std::uint16_t p) { return std::to_string(p); }

// Equal-or-wildcard meet for unordered fields.
template <class T>
Fused<std::optional<T>> meet_exact(const std::optional<T>& a, const std::optional<T>& b, const std::string& what)
{
    if (!a)
        return b;
    if (!b || *a == *b)
        return a;
    return Unsat{what + ": " + show(*a) + " vs " + show(*b)};
}

} // namespace detail

inline Fused<VersionSet> meet_versions(const VersionSet& a, const VersionSet& b)
{
    if (auto r = intersect(a, b))
        return *r;
    return Unsat{"version conflict: " + a.str() + " vs " + b.str()};
}

inline Fused<OsConstraint> meet_os(const OsConstraint& a, const OsConstraint& b, const OsTaxonomy& tax)
{
    OsConstraint out;
    if (tax.subsumes(a.platform, b.platform))
        out.platform = tax.canonical(b.platform);
    else if (tax.subsumes(b.platform, a.platform))
        out.platform = tax.canonical(a.platform);
    else
        return Unsat{"os platform conflict: " + a.platform + " vs " + b.platform};
    auto v = meet_versions(a.versions, b.versions);
    if (!v)
        return Unsat{"os " + v.unsat().reason};
    out.versions = std::move(v).value();
    return out;
}

inline Fused<CredentialSpec> meet_credentials(const CredentialSpec& a, const CredentialSpec& b)
{
    if (is_wildcard(a))
        return b;
    if (is_wildcard(b) || a == b)
        return a;
    return Unsat{"credentials conflict: " + describe(a) + " vs " + describe(b)};
}

inline Fused<AccountConstraint> meet_account(const AccountConstraint& a, const AccountConstraint& b)
{
    const auto where = "account " + a.name;
    auto group = detail::meet_exact(a.group, b.group, where + " group");
    if (!group)
        return group.unsat();
    auto priv = detail::meet_exact(a.privilege, b.privilege, where + " privilege");
    if (!priv)
        return priv.unsat();
    auto cred = meet_credentials(a.credentials, b.credentials);
    if (!cred)
        return Unsat{where + " " + cred.unsat().reason};
    return AccountConstraint{a.name, *group, *priv, *cred};
}

/// Distinct names are kept side by side, equal names are met fieldwise.
/// Result sorted by name.
inline Fused<std::vector<AccountConstraint>> fuse_accounts(const std::vector<AccountConstraint>& xs,
                                                           const std::vector<AccountConstraint>& ys)
{
    std::vector<AccountConstraint> out;
    for (const auto* list : {&xs, &ys}) {
        for (const auto& acc : *list) {
            auto it = std::find_if(out.begin(), out.end(), [&](const auto& o) { return o.name == acc.name; });
            if (it == out.end()) {
                out.push_back(acc);
                continue;
            }
            auto m = meet_account(*it, acc);
            if (!m)
                return m.unsat();
            *it = std::move(m).value();
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

inline Fused<SoftwareConstraint> meet_software(const SoftwareConstraint& a, const SoftwareConstraint& b)
{
    auto v = meet_versions(a.versions, b.versions);
    if (!v)
        return Unsat{"software " + a.product + " " + v.unsat().reason};
    auto port = detail::meet_exact(a.port, b.port, "software " + a.product + " port");
    if (!port)
        return port.unsat();
    return SoftwareConstraint{a.product, std::move(v).value(), *port};
}

/// Same product: versions and ports are met. Different products coexist
/// unless they claim the same concrete port.
inline Fused<std::vector<SoftwareConstraint>> fuse_software(const std::vector<SoftwareConstraint>& xs,
                                                            const std::vector<SoftwareConstraint>& ys)
{
    std::vector<SoftwareConstraint> out;
    for (const auto* list : {&xs, &ys}) {
        for (const auto& sw : *list) {
            auto it = std::find_if(out.begin(), out.end(), [&](const auto& o) { return o.product == sw.product; });
            if (it == out.end()) {
                out.push_back(sw);
                continue;
            }
            auto m = meet_software(*it, sw);
            if (!m)
                return m.unsat();
            *it = std::move(m).value();
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.product < b.product; });
    // Checked after merging: a port meet can turn a wildcard into a collision.
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i].port && out[j].port && *out[i].port == *out[j].port)
                return Unsat{"port " + std::to_string(*out[i].port) + " claimed by both " + out[i].product +
                             " and " + out[j].product};
    return out;
}

inline Fused<FileConstraint> meet_file(const FileConstraint& a, const FileConstraint& b)
{
    const auto where = "file " + a.path;
    auto perms = detail::meet_exact(a.permissions, b.permissions, where + " permissions");
    if (!perms)
        return perms.unsat();
    auto owner = detail::meet_exact(a.owner, b.owner, where + " owner");
    if (!owner)
        return owner.unsat();
    auto group = detail::meet_exact(a.group, b.group, where + " group");
    if (!group)
        return group.unsat();

    FileConstraint out{a.path, *perms, a.mode, {}, *owner, *group};
    if (a.mode == FileMode::ModifyPermissions) {
        out.mode = b.mode;
        out.content = b.content;
    } else if (b.mode == FileMode::ModifyPermissions) {
        out.content = a.content;
    } else if (a.mode == FileMode::Append && b.mode == FileMode::Append) {
        out.content = a.content;
        out.content.insert(out.content.end(), b.content.begin(), b.content.end());
        std::stable_sort(out.content.begin(), out.content.end(),
                         [](const auto& x, const auto& y) { return x.key() < y.key(); });
    } else if (a.mode == b.mode && a.content.size() == b.content.size() &&
               std::equal(a.content.begin(), a.content.end(), b.content.begin(),
                          [](const auto& x, const auto& y) { return x.same_content(y); })) {
        // identical specs; keep the earliest contributor's bookkeeping
        out.content = a.content;
        for (std::size_t i = 0; i < out.content.size(); ++i)
            if (b.content[i].key() < out.content[i].key())
                out.content[i] = b.content[i];
    } else {
        return Unsat{where + ": conflicting content " + std::string(to_string(a.mode)) + " vs " +
                     std::string(to_string(b.mode))};
    }
    return out;
}

/// Distinct paths are kept side by side; equal paths are merged.
inline Fused<std::vector<FileConstraint>> fuse_files(const std::vector<FileConstraint>& xs,
                                                     const std::vector<FileConstraint>& ys)
{
    std::vector<FileConstraint> out;
    for (const auto* list : {&xs, &ys}) {
        for (const auto& f : *list) {
            auto it = std::find_if(out.begin(), out.end(), [&](const auto& o) { return o.path == f.path; });
            if (it == out.end()) {
                out.push_back(f);
                continue;
            }
            auto m = meet_file(*it, f);
            if (!m)
                return m.unsat();
            *it = std::move(m).value();
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

inline Fused<MachineConstraint> fuse_machine(const MachineConstraint& a, const MachineConstraint& b,
                                             const OsTaxonomy& tax)
{
    auto os = meet_os(a.os, b.os, tax);
    if (!os)
        return os.unsat();
    auto accounts = fuse_accounts(a.accounts, b.accounts);
    if (!accounts)
        return accounts.unsat();
    auto software = fuse_software(a.software, b.software);
    if (!software)
        return software.unsat();
    auto files = fuse_files(a.files, b.files);
    if (!files)
        return files.unsat();
    return MachineConstraint{std::move(os).value(), std::move(accounts).value(), std::move(software).value(),
                             std::move(files).value()};
}

inline Fused<MachineConstraint> fuse_machine(const Fused<MachineConstraint>& a, const Fused<MachineConstraint>& b,
                                             const OsTaxonomy& tax)
{
    if (!a)
        return a;
    if (!b)
        return b;
    return fuse_machine(*a, *b, tax);
}

/// Canonical form: duplicates merged, lists sorted.
inline Fused<MachineConstraint> normalize(const MachineConstraint& c, const OsTaxonomy& tax)
{
    return fuse_machine(MachineConstraint{}, c, tax);
}

} // namespace decoyforge
