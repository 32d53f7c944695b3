#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "refine.hpp"

namespace decoyforge {

/// One complete satisfiable procedure assignment.
struct EnumeratedRefinement {
    std::vector<const Procedure*> procedures; // by transition index
    ConstraintDictionary dictionary;
    std::map<SecretId, SecretType> secret_types;

    std::vector<std::string> ids() const
    {
        std::vector<std::string> out;
        for (const auto* p : procedures)
            out.push_back(p->id);
        return out;
    }
};

namespace detail {

struct Enumerator {
    const Scenario& s;
    const Catalog& c;
    std::vector<std::size_t> order;
    std::vector<const Procedure*> chosen;
    std::set<std::vector<const Procedure*>> seen;
    const std::function<void(const EnumeratedRefinement&)>& sink;

    void walk(std::size_t depth, const ConstraintDictionary& d, const std::map<SecretId, SecretType>& types)
    {
        if (depth == order.size()) {
            if (seen.insert(chosen).second)
                sink(EnumeratedRefinement{chosen, d, types});
            return;
        }
        const auto ti = order[depth];
        const auto& t = s.transitions[ti];
        for (const auto* p : compatible(t, types, c)) {
            auto next = d;
            if (apply_procedure(next, t, *p, c))
                continue;
            chosen[ti] = p;
            for (const auto& typing : precondition_typings(*p, t, types)) {
                auto next_types = types;
                next_types.insert(typing.begin(), typing.end());
                walk(depth + 1, next, next_types);
            }
        }
    }
};

} // namespace detail

/// Every complete satisfiable assignment, each reported once (first secret
/// typing found). Order is deterministic.
inline void for_each_refinement(const Scenario& s, const Catalog& c,
                                const std::function<void(const EnumeratedRefinement&)>& f)
{
    if (!is_winnable(s))
        return;
    detail::Enumerator e{s, c, sort_transitions(s.transitions), std::vector<const Procedure*>(s.transitions.size()),
                         {}, f};
    e.walk(0, initial_dictionary(s, c), {});
}

inline std::vector<EnumeratedRefinement> enumerate_refinements(const Scenario& s, const Catalog& c)
{
    std::vector<EnumeratedRefinement> out;
    for_each_refinement(s, c, [&](const EnumeratedRefinement& r) { out.push_back(r); });
    return out;
}

/// Pool images admissible for an OS constraint, as a membership mask.
using PoolMask = std::vector<bool>;

class PoolMatcher {
    const Catalog& c_;
    std::map<std::string, PoolMask> memo_;

public:
    explicit PoolMatcher(const Catalog& c) : c_(c) {}

    const PoolMask& mask(const OsConstraint& os)
    {
        const auto key = os.platform + "|" + os.versions.str();
        auto it = memo_.find(key);
        if (it != memo_.end())
            return it->second;
        PoolMask m(c_.os_pool.size());
        for (std::size_t i = 0; i < c_.os_pool.size(); ++i)
            m[i] = c_.taxonomy.subsumes(os.platform, c_.os_pool[i].platform) &&
                   os.versions.contains(c_.os_pool[i].version);
        return memo_.emplace(key, std::move(m)).first->second;
    }
};

/// A fully concrete architecture: an assignment plus one pool image per
/// deployed machine.
struct EnumeratedArchitecture {
    const EnumeratedRefinement* refinement;
    std::vector<std::size_t> images; // pool index per deployed machine
};

inline void for_each_architecture(const Scenario& s, const Catalog& c,
                                  const std::function<void(const EnumeratedArchitecture&)>& f)
{
    PoolMatcher matcher(c);
    const auto machines = s.deployed_machines();
    for_each_refinement(s, c, [&](const EnumeratedRefinement& r) {
        std::vector<std::vector<std::size_t>> choices;
        for (const auto& m : machines) {
            const auto& mask = matcher.mask(r.dictionary.at(m)->os);
            choices.emplace_back();
            for (std::size_t i = 0; i < mask.size(); ++i)
                if (mask[i])
                    choices.back().push_back(i);
        }
        std::vector<std::size_t> pick(machines.size());
        std::function<void(std::size_t)> rec = [&](std::size_t k) {
            if (k == machines.size()) {
                f(EnumeratedArchitecture{&r, pick});
                return;
            }
            for (auto i : choices[k]) {
                pick[k] = i;
                rec(k + 1);
            }
        };
        rec(0);
    });
}

struct CountRow {
    std::vector<std::string> families; // per deployed machine
    std::uint64_t n = 0;
    std::uint64_t n_os = 0;
    std::uint64_t n_os_f = 0;
};

struct CountTable {
    std::vector<MachineId> machines;
    std::vector<CountRow> rows;
    std::uint64_t total = 0;
    std::size_t refinements = 0;
    std::vector<std::string> assumptions;
};

namespace detail {

inline std::uint64_t product_size(const std::vector<PoolMask>& masks)
{
    std::uint64_t out = 1;
    for (const auto& m : masks)
        out *= static_cast<std::uint64_t>(std::count(m.begin(), m.end(), true));
    return out;
}

inline void collect_tuples(const std::vector<PoolMask>& masks, std::size_t k, std::vector<std::size_t>& cur,
                           std::set<std::vector<std::size_t>>& out)
{
    if (k == masks.size()) {
        out.insert(cur);
        return;
    }
    for (std::size_t i = 0; i < masks[k].size(); ++i) {
        if (!masks[k][i])
            continue;
        cur.push_back(i);
        collect_tuples(masks, k + 1, cur, out);
        cur.pop_back();
    }
}

} // namespace detail

/// Counts per OS-family row. N_OS,F counts assignments times pool images;
/// N_OS merges assignments that differ only in corpus procedures; N further
/// ignores the concrete image.
inline CountTable count_architectures(const Scenario& s, const Catalog& c)
{
    CountTable table;
    table.machines = s.deployed_machines();
    const auto machines = table.machines.size();

    std::vector<std::string> families;
    std::vector<PoolMask> family_mask;
    for (const auto& fam : c.taxonomy.families()) {
        PoolMask m(c.os_pool.size());
        bool any = false;
        for (std::size_t i = 0; i < c.os_pool.size(); ++i)
            any |= (m[i] = c.taxonomy.subsumes(fam, c.os_pool[i].platform));
        if (any) {
            families.push_back(fam);
            family_mask.push_back(std::move(m));
        }
    }

    // corpus-free assignment key -> per-member machine masks
    std::map<std::vector<std::string>, std::vector<std::vector<PoolMask>>> groups;
    PoolMatcher matcher(c);
    for_each_refinement(s, c, [&](const EnumeratedRefinement& r) {
        ++table.refinements;
        std::vector<std::string> key;
        for (const auto* p : r.procedures)
            key.push_back(p->corpus ? "*" : p->id);
        std::vector<PoolMask> masks;
        for (const auto& m : table.machines)
            masks.push_back(matcher.mask(r.dictionary.at(m)->os));
        groups[key].push_back(std::move(masks));
    });

    std::size_t row_count = 1;
    for (std::size_t k = 0; k < machines; ++k)
        row_count *= families.size();
    for (std::size_t row = 0; row < row_count; ++row) {
        CountRow out;
        std::vector<std::size_t> fam(machines);
        for (std::size_t k = machines, r = row; k-- > 0; r /= families.size())
            fam[k] = r % families.size();
        for (auto f : fam)
            out.families.push_back(families[f]);

        for (const auto& [key, members] : groups) {
            std::vector<std::vector<PoolMask>> restricted;
            for (const auto& masks : members) {
                std::vector<PoolMask> rm(machines);
                for (std::size_t k = 0; k < machines; ++k) {
                    rm[k] = masks[k];
                    for (std::size_t i = 0; i < rm[k].size(); ++i)
                        rm[k][i] = rm[k][i] && family_mask[fam[k]][i];
                }
                out.n_os_f += detail::product_size(rm);
                restricted.push_back(std::move(rm));
            }
            const bool uniform = std::all_of(restricted.begin(), restricted.end(),
                                             [&](const auto& rm) { return rm == restricted.front(); });
            std::uint64_t distinct = 0;
            if (uniform) {
                distinct = detail::product_size(restricted.front());
            } else {
                std::set<std::vector<std::size_t>> tuples;
                std::vector<std::size_t> cur;
                for (const auto& rm : restricted)
                    detail::collect_tuples(rm, 0, cur, tuples);
                distinct = tuples.size();
            }
            if (distinct > 0) {
                ++out.n;
                out.n_os += distinct;
            }
        }
        table.total += out.n_os_f;
        table.rows.push_back(std::move(out));
    }

    std::string pool;
    for (const auto& img : c.os_pool)
        pool += (pool.empty() ? "" : ", ") + img.platform + " " + img.version.str();
    std::string corpus;
    for (const auto& p : c.procedures)
        if (p.corpus)
            corpus += (corpus.empty() ? "" : ", ") + p.id;
    table.assumptions = {
        "os pool (" + std::to_string(c.os_pool.size()) + " images): " + pool,
        "corpus procedures (collapsed in N and N_OS): " + (corpus.empty() ? std::string("none") : corpus),
        "N_OS,F = sum over procedure assignments of the product of admissible pool images per deployed machine",
        "N_OS = distinct (assignment modulo corpus procedures, image per machine) pairs",
        "N = distinct assignments modulo corpus procedures with at least one admissible image tuple",
        "row families: top-level taxonomy nodes with at least one pool image, in taxonomy order",
        "secret typings: an assignment admitting several typings is counted once",
    };
    for (const auto& n : c.notes)
        table.assumptions.push_back(n);
    return table;
}

} // namespace decoyforge
