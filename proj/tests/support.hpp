#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "decoyforge/decoyforge.hpp"

namespace support {

using namespace decoyforge;

inline std::string data(const std::string& rel) { return std::string(DECOYFORGE_DATA_DIR) + "/" + rel; }

inline Scenario apt29() { return load_scenario_file(data("scenarios/apt29.json")); }
inline Catalog apt29_catalog() { return load_catalog_file(data("catalogs/apt29_catalog.json")); }
inline Scenario worked_example() { return load_scenario_file(data("scenarios/worked_example.json")); }
inline Catalog appendix_six() { return load_catalog_file(data("catalogs/appendix_six.json")); }

/// Small hand-rolled generator helpers over a fixed-seed engine.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng() % n); }
    bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }
    template <class T>
    const T& pick(const std::vector<T>& xs)
    {
        return xs[below(xs.size())];
    }
};

inline double elapsed_s(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------- versions

inline Version random_version(Gen& g)
{
    const std::size_t n = 1 + g.below(3);
    std::string s;
    for (std::size_t i = 0; i < n; ++i)
        s += (i ? "." : "") + std::to_string(g.below(4));
    if (g.chance(0.1))
        s += ".0"; // alternate spelling of the same version
    return Version::parse(s);
}

inline VersionSet random_version_set(Gen& g)
{
    switch (g.below(4)) {
    case 0: return VersionSet::any();
    case 1: {
        std::vector<Version> vs;
        for (std::size_t i = 0, n = 1 + g.below(3); i < n; ++i)
            vs.push_back(random_version(g));
        return *VersionSet::of(vs);
    }
    default: {
        for (;;) {
            std::optional<VersionBound> lo, hi;
            if (g.chance(0.8))
                lo = VersionBound{random_version(g), g.chance(0.7)};
            if (g.chance(0.8))
                hi = VersionBound{random_version(g), g.chance(0.7)};
            if (auto r = VersionSet::range(lo, hi))
                return *r;
        }
    }
    }
}

/// Probe grid for pointwise set comparisons.
inline std::vector<Version> version_grid()
{
    std::vector<Version> out;
    for (int a = 0; a < 5; ++a) {
        out.push_back(Version::parse(std::to_string(a)));
        for (int b = 0; b < 5; ++b) {
            out.push_back(Version::parse(std::to_string(a) + "." + std::to_string(b)));
            for (int c = 0; c < 5; ++c)
                out.push_back(Version::parse(std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(c)));
        }
    }
    return out;
}

// ------------------------------------------------------------- constraints

inline MachineConstraint random_machine_constraint(Gen& g)
{
    static const std::vector<std::string> platforms{"*", "*", "*", "Linux", "Debian", "Ubuntu", "Windows",
                                                    "Windows10"};
    static const std::vector<std::string> names{"Alice", "Bob", "root"};
    static const std::vector<std::string> groups{"staff", "wheel"};
    static const std::vector<std::string> products{"ssh:ssh", "sudo_project:sudo", "microsoft:remote_desktop"};
    static const std::vector<std::string> paths{"/etc/sudoers", "~Bob/x", "/etc/crontab"};
    static const std::vector<std::string> templates{"a", "b"};

    MachineConstraint m;
    if (g.chance(0.5))
        m.os.platform = g.pick(platforms);
    if (g.chance(0.3))
        m.os.versions = random_version_set(g);
    for (std::size_t i = 0, n = g.below(3); i < n; ++i) {
        AccountConstraint a;
        a.name = g.pick(names);
        if (g.chance(0.3))
            a.group = g.pick(groups);
        if (g.chance(0.3))
            a.privilege = g.chance(0.5) ? Privilege::User : Privilege::SuperUser;
        switch (g.below(7)) {
        case 0: a.credentials = LiteralCredential{g.chance(0.5) ? "a" : "b"}; break;
        case 1: a.credentials = SecretCredential{g.chance(0.5) ? "s1" : "s2"}; break;
        case 2: a.credentials = WeakCredential{}; break;
        case 3: a.credentials = RandomHashCredential{}; break;
        default: break;
        }
        m.accounts.push_back(a);
    }
    for (std::size_t i = 0, n = g.below(3); i < n; ++i) {
        SoftwareConstraint s;
        s.product = g.pick(products);
        if (g.chance(0.3))
            s.versions = random_version_set(g);
        if (g.chance(0.4))
            s.port = g.chance(0.5) ? 22 : 3389;
        m.software.push_back(s);
    }
    for (std::size_t i = 0, n = g.below(3); i < n; ++i) {
        FileConstraint f;
        f.path = g.pick(paths);
        const auto mode = g.below(5);
        f.mode = mode == 0 ? FileMode::Create
                 : mode == 1 ? FileMode::Write
                 : mode == 2 ? FileMode::ModifyPermissions
                             : FileMode::Append;
        if (g.chance(0.3))
            f.permissions = g.chance(0.5) ? "0600" : "0644";
        if (g.chance(0.2))
            f.owner = "root";
        if (f.mode != FileMode::ModifyPermissions) {
            ContentFragment frag;
            frag.template_name = g.pick(templates);
            frag.order = g.below(3);
            frag.procedure = "p" + std::to_string(frag.order);
            frag.user = "Bob";
            if (g.chance(0.3))
                frag.secrets = {"s1"};
            f.content.push_back(frag);
        }
        m.files.push_back(f);
    }
    return m;
}

/// Role constraints of every fixture procedure, bound to one user.
inline std::vector<MachineConstraint> catalog_roles(const Catalog& c)
{
    std::vector<MachineConstraint> out;
    for (const auto& p : c.procedures) {
        RoleBinding b{"u", {"req"}, {"rew"}};
        out.push_back(bind_role(p.entry, b, p));
        out.push_back(bind_role(p.exit, b, p));
    }
    return out;
}

/// Equality up to normalization, including Unsat-ness.
inline bool same(const Fused<MachineConstraint>& a, const Fused<MachineConstraint>& b, const OsTaxonomy& tax)
{
    if (a.ok() != b.ok())
        return false;
    if (!a.ok())
        return true;
    auto na = normalize(*a, tax);
    auto nb = normalize(*b, tax);
    return na.ok() && nb.ok() && *na == *nb;
}

inline bool append_free(const MachineConstraint& m)
{
    return std::none_of(m.files.begin(), m.files.end(), [](const auto& f) { return f.mode == FileMode::Append; });
}

struct PropertyResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::size_t nontrivial = 0; // cases where the fused value is satisfiable
};

/// The algebraic laws of fusion and version meet, `n` cases each.
inline std::vector<PropertyResult> check_algebra_laws(std::size_t n, std::uint64_t seed)
{
    const auto tax = OsTaxonomy::builtin();
    const auto roles = catalog_roles(apt29_catalog());
    Gen g(seed);
    std::vector<PropertyResult> out;

    auto draw = [&](bool from_catalog) { return from_catalog ? g.pick(roles) : random_machine_constraint(g); };

    PropertyResult comm{"fusion commutativity"};
    PropertyResult assoc{"fusion associativity"};
    PropertyResult ident{"fusion identity"};
    PropertyResult absorb{"unsat absorption"};
    PropertyResult idem{"fusion idempotence (append-free)"};
    PropertyResult subset{"version meet subset"};
    const MachineConstraint empty;
    const Fused<MachineConstraint> bottom = Unsat{"test"};
    const auto grid = version_grid();

    for (std::size_t i = 0; i < n; ++i) {
        const bool cat = i % 2 == 1;
        const auto a = draw(cat), b = draw(cat), c = draw(cat);

        auto ab = fuse_machine(a, b, tax);
        auto ba = fuse_machine(b, a, tax);
        ++comm.cases;
        comm.nontrivial += ab.ok();
        comm.failures += !same(ab, ba, tax);

        auto left = fuse_machine(ab, Fused<MachineConstraint>(c), tax);
        auto right = fuse_machine(Fused<MachineConstraint>(a), fuse_machine(b, c, tax), tax);
        ++assoc.cases;
        assoc.nontrivial += left.ok();
        assoc.failures += !same(left, right, tax);

        ++ident.cases;
        const auto na = normalize(a, tax);
        ident.nontrivial += na.ok();
        ident.failures += !same(fuse_machine(a, empty, tax), na, tax) || !same(fuse_machine(empty, a, tax), na, tax);

        ++absorb.cases;
        absorb.failures += fuse_machine(bottom, Fused<MachineConstraint>(a), tax).ok() ||
                           fuse_machine(Fused<MachineConstraint>(a), bottom, tax).ok();

        if (append_free(a)) {
            ++idem.cases;
            idem.nontrivial += na.ok();
            idem.failures += !same(fuse_machine(a, a, tax), na, tax);
        }

        const auto va = random_version_set(g), vb = random_version_set(g);
        ++subset.cases;
        if (auto m = intersect(va, vb)) {
            ++subset.nontrivial;
            for (const auto& v : grid)
                if (m->contains(v) != (va.contains(v) && vb.contains(v))) {
                    ++subset.failures;
                    break;
                }
        } else {
            for (const auto& v : grid)
                if (va.contains(v) && vb.contains(v)) {
                    ++subset.failures;
                    break;
                }
        }
    }
    return {comm, assoc, ident, absorb, idem, subset};
}

// ---------------------------------------------------------------- scenarios

/// Random scenario over <= max_pos positions and <= max_tr transitions.
inline Scenario random_scenario(Gen& g, std::size_t max_pos, std::size_t max_tr, bool with_secrets = true)
{
    Scenario s;
    const std::size_t np = 1 + g.below(max_pos);
    for (std::size_t i = 0; i < np; ++i)
        s.positions.push_back({"m" + std::to_string(i % 3), "u" + std::to_string(i)});
    s.starting.insert(s.positions[0]);
    if (g.chance(0.2) && np > 1)
        s.starting.insert(s.positions[1]);
    s.winning.insert(g.pick(s.positions));
    const std::size_t nt = g.below(max_tr + 1);
    for (std::size_t i = 0; i < nt; ++i) {
        Transition t;
        t.src = g.pick(s.positions);
        t.dst = g.pick(s.positions);
        t.technique = "T" + std::to_string(1 + g.below(3));
        if (with_secrets) {
            if (g.chance(0.3))
                t.post.insert("s" + std::to_string(g.below(3)));
            if (g.chance(0.3)) {
                auto id = "s" + std::to_string(g.below(3));
                if (!t.post.count(id))
                    t.pre.insert(id);
            }
        }
        s.transitions.push_back(t);
    }
    std::set<SecretId> ids;
    for (const auto& t : s.transitions) {
        ids.insert(t.pre.begin(), t.pre.end());
        ids.insert(t.post.begin(), t.post.end());
    }
    s.secrets.assign(ids.begin(), ids.end());
    return s;
}

/// Breadth-first search over explicit attacker states.
inline bool bfs_winnable(const Scenario& s)
{
    using State = std::pair<std::set<Position>, std::set<SecretId>>;
    std::set<State> seen;
    std::vector<State> queue{{s.starting, {}}};
    seen.insert(queue.front());
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto cur = queue[head];
        for (const auto& w : s.winning)
            if (cur.first.count(w))
                return true;
        for (const auto& t : s.transitions) {
            if (!cur.first.count(t.src))
                continue;
            if (!std::all_of(t.pre.begin(), t.pre.end(), [&](const auto& x) { return cur.second.count(x) > 0; }))
                continue;
            State next = cur;
            next.first.insert(t.dst);
            next.second.insert(t.post.begin(), t.post.end());
            if (seen.insert(next).second)
                queue.push_back(next);
        }
    }
    return false;
}

/// Minimal winning sequences by exhaustive search over sequences of
/// distinct transitions and all their subsequences.
inline std::set<std::vector<std::size_t>> brute_minimal_paths(const Scenario& s, std::size_t max_len)
{
    auto run = [&](const std::vector<std::size_t>& seq) -> std::optional<AttackerState> {
        AttackerState a{s.starting, {}};
        for (auto i : seq) {
            const auto& t = s.transitions[i];
            if (!a.held.count(t.src) ||
                !std::includes(a.knowledge.begin(), a.knowledge.end(), t.pre.begin(), t.pre.end()))
                return std::nullopt;
            a.held.insert(t.dst);
            a.knowledge.insert(t.post.begin(), t.post.end());
        }
        return a;
    };
    auto wins = [&](const std::vector<std::size_t>& seq) {
        auto a = run(seq);
        return a && std::any_of(s.winning.begin(), s.winning.end(), [&](const auto& w) { return a->held.count(w); });
    };
    std::set<std::vector<std::size_t>> out;
    std::vector<std::size_t> seq;
    std::vector<bool> used(s.transitions.size());
    std::function<void()> rec = [&] {
        if (wins(seq)) {
            bool minimal = true;
            const std::size_t n = seq.size();
            for (std::uint32_t mask = 0; mask + 1 < (1u << n) && minimal; ++mask) {
                std::vector<std::size_t> sub;
                for (std::size_t k = 0; k < n; ++k)
                    if (mask & (1u << k))
                        sub.push_back(seq[k]);
                if (wins(sub))
                    minimal = false;
            }
            if (minimal)
                out.insert(seq);
        }
        if (seq.size() == max_len)
            return;
        for (std::size_t i = 0; i < s.transitions.size(); ++i) {
            if (used[i])
                continue;
            used[i] = true;
            seq.push_back(i);
            rec();
            seq.pop_back();
            used[i] = false;
        }
    };
    rec();
    return out;
}

/// Shuffled-order fixpoint: same state for any processing order.
inline AttackerState fixpoint_in_order(const Scenario& s, const std::vector<std::size_t>& order)
{
    AttackerState a{s.starting, {}};
    for (bool changed = true; changed;) {
        changed = false;
        for (auto i : order) {
            if (auto next = step(a, s.transitions[i]); next && *next != a) {
                a = *next;
                changed = true;
            }
        }
    }
    return a;
}

// ------------------------------------------------------- refinement oracle

inline OsTaxonomy toy_taxonomy() { return OsTaxonomy::builtin(); }

inline std::vector<OsImage> toy_pool()
{
    return {{"Debian", Version::parse("9.0")},
            {"Ubuntu", Version::parse("16.04")},
            {"Windows10", Version::parse("10")},
            {"Windows7", Version::parse("7")}};
}

inline MachineConstraint random_role(Gen& g, bool may_use_required)
{
    static const std::vector<std::string> platforms{"Linux", "Windows", "Debian", "Ubuntu", "Windows10"};
    MachineConstraint m;
    if (g.chance(0.4))
        return m;
    if (g.chance(0.7))
        m.os.platform = g.pick(platforms);
    if (g.chance(0.15))
        m.os.versions = VersionSet::parse(g.chance(0.5) ? "{9.0,10}" : "[8,17]");
    if (g.chance(0.4)) {
        SoftwareConstraint s{g.chance(0.5) ? "ssh:ssh" : "microsoft:remote_desktop", VersionSet::any(), std::nullopt};
        if (g.chance(0.5))
            s.port = g.chance(0.5) ? 22 : 3389;
        m.software.push_back(s);
    }
    if (g.chance(0.4)) {
        AccountConstraint a;
        switch (g.below(3)) {
        case 0: a.credentials = WeakCredential{}; break;
        case 1:
            if (may_use_required)
                a.credentials = SecretCredential{std::string(kRequiredSlot)};
            break;
        default: break;
        }
        if (g.chance(0.3))
            a.privilege = Privilege::SuperUser;
        m.accounts.push_back(a);
    }
    if (g.chance(0.4)) {
        FileConstraint f;
        f.path = g.chance(0.5) ? "/etc/sudoers" : "~/notes.txt";
        f.mode = g.chance(0.5) ? FileMode::Append : FileMode::Write;
        f.content.push_back({g.chance(0.5) ? "a" : "b", {}, {}, 0, {}});
        m.files.push_back(f);
    }
    return m;
}

inline std::vector<SecretRequirement> random_requirements(Gen& g)
{
    std::vector<SecretRequirement> out;
    if (g.chance(0.7))
        return out;
    const auto type = g.chance(0.5) ? SecretType::PlaintextPassword : SecretType::SshKeyPair;
    out.push_back({type, g.chance(0.6) ? std::optional<std::size_t>(1) : std::nullopt});
    if (g.chance(0.2))
        out.push_back({type == SecretType::SshKeyPair ? SecretType::PlaintextPassword : SecretType::SshKeyPair, 1});
    return out;
}

/// Toy catalog: 1..max_per procedures for each of T1..T3.
inline Catalog random_catalog(Gen& g, std::size_t max_per)
{
    Catalog c;
    c.taxonomy = toy_taxonomy();
    c.os_pool = toy_pool();
    for (int tech = 1; tech <= 3; ++tech) {
        for (std::size_t i = 0, n = 1 + g.below(max_per); i < n; ++i) {
            Procedure p;
            p.id = "T" + std::to_string(tech) + "_p" + std::to_string(i);
            p.name = p.id;
            p.technique = TechniqueId::of("T" + std::to_string(tech));
            p.preconditions.required = random_requirements(g);
            p.preconditions.rewarded = random_requirements(g);
            const bool req = !p.preconditions.required.empty();
            p.entry = g.chance(0.3) ? random_role(g, req) : MachineConstraint{};
            p.exit = random_role(g, req);
            p.order = c.procedures.size();
            if (!normalize(p.entry, c.taxonomy) || !normalize(p.exit, c.taxonomy))
                continue;
            c.procedures.push_back(p);
        }
    }
    return c;
}

/// Winnable random scenario shaped for refinement: each transition leaves
/// an already reachable position, and secrets are required only after being
/// rewarded.
inline Scenario random_refinable_scenario(Gen& g, std::size_t max_tr)
{
    Scenario s;
    for (int m = 0; m < 3; ++m)
        for (int u = 0; u < 2; ++u)
            s.positions.push_back({"M" + std::to_string(m), "U" + std::to_string(u)});
    if (g.chance(0.3))
        s.privileges[s.positions[1]] = Privilege::SuperUser;
    s.starting.insert(s.positions[0]);
    std::vector<Position> reached{s.positions[0]};
    std::vector<SecretId> rewarded;
    const std::size_t nt = 1 + g.below(max_tr);
    for (std::size_t i = 0; i < nt; ++i) {
        Transition t;
        t.src = g.pick(reached);
        t.dst = g.pick(s.positions);
        t.technique = "T" + std::to_string(1 + g.below(3));
        if (!rewarded.empty() && g.chance(0.35))
            t.pre.insert(g.pick(rewarded));
        if (g.chance(0.35)) {
            auto id = "s" + std::to_string(rewarded.size());
            t.post.insert(id);
            rewarded.push_back(id);
        }
        reached.push_back(t.dst);
        s.transitions.push_back(t);
    }
    s.winning.insert(s.transitions.back().dst);
    s.secrets = rewarded;
    if (g.chance(0.2))
        s.external_machines.insert(s.positions[0].machine);
    return s;
}

namespace detail_oracle {

// Exact/at-least count matching of typed secrets against one requirement list.
inline bool side_fits(const std::vector<SecretRequirement>& reqs, const std::set<SecretId>& ids,
                      const std::map<SecretId, SecretType>& typing)
{
    std::map<SecretType, std::size_t> have;
    for (const auto& id : ids)
        ++have[typing.at(id)];
    std::map<SecretType, std::pair<std::size_t, std::size_t>> need; // exact sum, star entries
    for (const auto& r : reqs) {
        auto& n = need[r.type];
        if (r.count)
            n.first += *r.count;
        else
            ++n.second;
    }
    for (const auto& [type, k] : have) {
        auto it = need.find(type);
        if (it == need.end())
            return false;
    }
    for (const auto& [type, n] : need) {
        const auto k = have.count(type) ? have[type] : 0;
        if (n.second == 0 ? k != n.first : k < n.first + n.second)
            return false;
    }
    return true;
}

} // namespace detail_oracle

/// All valid procedure assignments, by exhaustive product over candidate
/// procedures and global secret typings, fusing in transition order.
inline std::set<std::vector<std::string>> brute_force_assignments(const Scenario& s, const Catalog& c)
{
    std::set<std::vector<std::string>> out;
    if (!bfs_winnable(s))
        return out;
    std::vector<std::vector<const Procedure*>> cands;
    for (const auto& t : s.transitions) {
        cands.emplace_back();
        for (const auto& p : c.procedures)
            if (p.technique.str() == t.technique)
                cands.back().push_back(&p);
    }
    std::vector<SecretId> secrets;
    {
        std::set<SecretId> ids;
        for (const auto& t : s.transitions) {
            ids.insert(t.pre.begin(), t.pre.end());
            ids.insert(t.post.begin(), t.post.end());
        }
        secrets.assign(ids.begin(), ids.end());
    }
    const std::vector<SecretType> types{SecretType::PlaintextPassword, SecretType::HashedPassword,
                                        SecretType::CrackableHashedPassword, SecretType::SshKeyPair,
                                        SecretType::WeakPassword};
    std::vector<std::map<SecretId, SecretType>> typings{{}};
    for (const auto& id : secrets) {
        std::vector<std::map<SecretId, SecretType>> next;
        for (const auto& base : typings)
            for (auto ty : types) {
                auto m = base;
                m[id] = ty;
                next.push_back(std::move(m));
            }
        typings = std::move(next);
    }

    std::vector<const Procedure*> pick(s.transitions.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == s.transitions.size()) {
            bool typed = false;
            for (const auto& typing : typings) {
                bool ok = true;
                for (std::size_t k = 0; k < s.transitions.size() && ok; ++k) {
                    const auto& t = s.transitions[k];
                    ok = detail_oracle::side_fits(pick[k]->preconditions.required, t.pre, typing) &&
                         detail_oracle::side_fits(pick[k]->preconditions.rewarded, t.post, typing);
                }
                if (ok) {
                    typed = true;
                    break;
                }
            }
            if (!typed)
                return;
            std::map<MachineId, Fused<MachineConstraint>> dict;
            for (const auto& p : s.positions) {
                if (s.external_machines.count(p.machine))
                    continue;
                AccountConstraint a;
                a.name = p.user;
                if (auto it = s.privileges.find(p); it != s.privileges.end())
                    a.privilege = it->second;
                MachineConstraint mc;
                mc.accounts.push_back(a);
                auto it = dict.find(p.machine);
                if (it == dict.end())
                    dict.emplace(p.machine, normalize(mc, c.taxonomy));
                else
                    it->second = fuse_machine(it->second, Fused<MachineConstraint>(mc), c.taxonomy);
            }
            for (std::size_t k = 0; k < s.transitions.size(); ++k) {
                const auto& t = s.transitions[k];
                const auto entry = bind_role(pick[k]->entry, entry_binding(t), *pick[k]);
                const auto exit = bind_role(pick[k]->exit, exit_binding(t), *pick[k]);
                for (const auto& [m, role] : {std::pair{t.src.machine, entry}, std::pair{t.dst.machine, exit}}) {
                    auto it = dict.find(m);
                    if (it == dict.end()) {
                        if (!role.empty())
                            return;
                        continue;
                    }
                    it->second = fuse_machine(it->second, Fused<MachineConstraint>(role), c.taxonomy);
                }
            }
            for (const auto& [m, fc] : dict) {
                if (!fc)
                    return;
                bool deployable = false;
                for (const auto& img : c.os_pool)
                    deployable |= c.taxonomy.subsumes(fc->os.platform, img.platform) &&
                                  fc->os.versions.contains(img.version);
                if (!deployable)
                    return;
            }
            std::vector<std::string> ids;
            for (const auto* p : pick)
                ids.push_back(p->id);
            out.insert(ids);
            return;
        }
        for (const auto* p : cands[i]) {
            pick[i] = p;
            rec(i + 1);
        }
    };
    rec(0);
    return out;
}

inline std::vector<std::string> assignment_of(const Refinement& r)
{
    std::vector<std::string> out;
    for (const auto& t : r.procedural.transitions)
        out.push_back(t.procedure.value_or(""));
    return out;
}

struct OracleRun {
    std::size_t problems = 0;
    std::size_t feasible = 0;
    std::size_t mismatches = 0;
    std::vector<std::string> notes;
};

/// refine vs brute force on `n` random small problems.
inline OracleRun check_refine_against_oracle(std::size_t n, std::uint64_t seed)
{
    Gen g(seed);
    OracleRun run;
    while (run.problems < n) {
        const auto s = random_refinable_scenario(g, 4);
        const auto c = random_catalog(g, 3);
        ++run.problems;
        const auto oracle = brute_force_assignments(s, c);
        const auto result = refine(s, c, RefineOptions{g.rng(), true, ProcedureOrder::Seeded});
        if (const auto* r = std::get_if<Refinement>(&result)) {
            ++run.feasible;
            if (!oracle.count(assignment_of(*r))) {
                ++run.mismatches;
                run.notes.push_back("problem " + std::to_string(run.problems) + ": refine result not in oracle set");
            }
        } else if (!oracle.empty()) {
            ++run.mismatches;
            run.notes.push_back("problem " + std::to_string(run.problems) + ": Infeasible but oracle has " +
                                std::to_string(oracle.size()) + " assignments");
        }
    }
    return run;
}

// ------------------------------------------------------------ golden config

/// The Raccoon entry of the published configuration excerpt, key order and
/// nesting as printed.
inline constexpr const char* kFigureRaccoon = R"([{
  "Name": "Raccoon",
  "OS": {"Type": "debian:debian_linux", "Version": "9.0"},
  "Software": [{"Type": "sudo_project:sudo", "Version": "1.8.2"}],
  "Users": [{"Name": "Bob","Group": "Bob","Privilege": "User",
    "Credentials": {"Type": "UnixUserAccount", "Value": "rainbow"}}],
  "Files": [{
    "Source": "./generated_files/Raccoon/bashrc_password_leak",
    "Destination": "~/bash_history",
    "Permissions": "0600", "Modification": "WRITE",
    "Owner": "root", "Group": "root"
  },
  {
    "Source": "./generated_files/Raccoon/sudo_1.8.2_exploit",
    "Destination": "/etc/sudoers",
    "Permissions": "4111", "Modification": "APPEND",
    "Owner": "root", "Group": "root"}]
}])";

/// Raccoon's dictionary entry for the refinement (vulnerable sudo, bash
/// history bound to root, weak password for Bob), pinned to Debian 9.0.
inline Deployment raccoon_deployment(std::uint64_t seed)
{
    const auto c = apt29_catalog();
    MachineConstraint base;
    base.os = {"Debian", VersionSet::parse("9.0")};
    base.accounts.push_back({"Bob", std::nullopt, std::nullopt, AnyCredential{}});
    Fused<MachineConstraint> m = normalize(base, c.taxonomy);

    Transition t7{{"Raccoon", "Bob"}, {"Raccoon", "root"}, "T1068", {}, {}, {}};
    Transition t9{{"Raccoon", "root"}, {"Raccoon", "root"}, "T1552", {}, {}, {"skunk_root_secret"}};
    Transition t10{{"Bear", "SuperUser"}, {"Raccoon", "Bob"}, "T1078", {}, {}, {}};
    const std::pair<const Transition*, const char*> picks[] = {
        {&t7, "vulnerable_sudo"}, {&t9, "bash_history"}, {&t10, "weak_password"}};
    for (const auto& [t, id] : picks) {
        const auto* p = c.find(id);
        m = fuse_machine(m, Fused<MachineConstraint>(bind_role(p->exit, exit_binding(*t), *p)), c.taxonomy);
    }
    ConstraintDictionary d;
    d.set("Raccoon", m);
    SecretStore store;
    store.generate("skunk_root_secret", SecretType::PlaintextPassword, seed);
    return apply_defaults(d, store, c, seed);
}

/// Key names and nesting of `a` and `b` agree (arrays compared elementwise
/// against the first element's shape).
inline bool same_shape(const ordered_json& a, const ordered_json& b, std::string& where)
{
    if (a.type() != b.type()) {
        where += " type";
        return false;
    }
    if (a.is_object()) {
        std::vector<std::string> ka, kb;
        for (auto it = a.begin(); it != a.end(); ++it)
            ka.push_back(it.key());
        for (auto it = b.begin(); it != b.end(); ++it)
            kb.push_back(it.key());
        if (ka != kb) {
            where += " keys";
            return false;
        }
        for (const auto& k : ka) {
            auto w = where + "/" + k;
            if (!same_shape(a[k], b[k], w)) {
                where = w;
                return false;
            }
        }
        return true;
    }
    if (a.is_array()) {
        if (a.empty() || b.empty())
            return a.empty() == b.empty();
        for (const auto& x : a)
            for (const auto& y : b) {
                auto w = where + "[]";
                if (!same_shape(x, y, w)) {
                    where = w;
                    return false;
                }
            }
        return true;
    }
    return true;
}

/// Secret values blanked: user credential values.
inline ordered_json mask_secrets(ordered_json doc)
{
    for (auto& m : doc)
        for (auto& u : m["Users"])
            u["Credentials"]["Value"] = "<secret>";
    return doc;
}

} // namespace support
