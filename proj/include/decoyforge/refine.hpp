#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "catalog.hpp"
#include "constraint.hpp"
#include "scenario.hpp"
#include "secrets.hpp"

namespace decoyforge {

/// Machine -> accumulated constraint, in scenario machine order. External
/// machines have no entry.
class ConstraintDictionary {
    std::vector<std::pair<MachineId, Fused<MachineConstraint>>> entries_;

public:
    const auto& entries() const { return entries_; }

    bool contains(const MachineId& m) const { return find(m) != nullptr; }

    const Fused<MachineConstraint>* find(const MachineId& m) const
    {
        for (const auto& [name, c] : entries_)
            if (name == m)
                return &c;
        return nullptr;
    }

    Fused<MachineConstraint>* find(const MachineId& m)
    {
        for (auto& [name, c] : entries_)
            if (name == m)
                return &c;
        return nullptr;
    }

    const Fused<MachineConstraint>& at(const MachineId& m) const
    {
        if (const auto* c = find(m))
            return *c;
        throw std::out_of_range("no constraint entry for machine '" + m + "'");
    }

    void set(const MachineId& m, Fused<MachineConstraint> c)
    {
        if (auto* cur = find(m))
            *cur = std::move(c);
        else
            entries_.emplace_back(m, std::move(c));
    }

    bool satisfiable() const
    {
        return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.second.ok(); });
    }

    friend bool operator==(const ConstraintDictionary& a, const ConstraintDictionary& b)
    {
        if (a.entries_.size() != b.entries_.size())
            return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i) {
            const auto& [an, ac] = a.entries_[i];
            const auto& [bn, bc] = b.entries_[i];
            if (an != bn || ac.ok() != bc.ok() || (ac.ok() && *ac != *bc))
                return false;
        }
        return true;
    }
};

/// One entry per deployed machine, holding the accounts of its declared
/// positions (with their declared privilege).
inline ConstraintDictionary initial_dictionary(const Scenario& s, const Catalog& c)
{
    ConstraintDictionary d;
    for (const auto& m : s.deployed_machines()) {
        MachineConstraint mc;
        for (const auto& p : s.positions) {
            if (p.machine != m)
                continue;
            AccountConstraint acc;
            acc.name = p.user;
            if (auto it = s.privileges.find(p); it != s.privileges.end())
                acc.privilege = it->second;
            mc.accounts.push_back(std::move(acc));
        }
        d.set(m, normalize(mc, c.taxonomy));
    }
    return d;
}

/// Stable partition: transitions touching secrets first.
inline std::vector<std::size_t> sort_transitions(const std::vector<Transition>& ts)
{
    std::vector<std::size_t> order(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        order[i] = i;
    std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return ts[i].handles_secrets(); });
    return order;
}

enum class ProcedureOrder { Seeded, Catalog };

struct RefineOptions {
    std::uint64_t seed = 0;
    bool prioritize_secrets = true;
    ProcedureOrder order = ProcedureOrder::Seeded;
};

struct TraceEvent {
    enum class Kind { Chose, Rejected, Excluded, Backtracked };
    Kind kind;
    std::size_t transition;
    std::string procedure; // empty for Backtracked
    std::string detail;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline std::string_view to_string(TraceEvent::Kind k)
{
    switch (k) {
    case TraceEvent::Kind::Chose: return "chose";
    case TraceEvent::Kind::Rejected: return "rejected";
    case TraceEvent::Kind::Excluded: return "excluded";
    case TraceEvent::Kind::Backtracked: return "backtracked";
    }
    return "?";
}

/// A successful refinement. `procedural` is the input scenario with every
/// transition's `procedure` set.
struct Refinement {
    Scenario procedural;
    ConstraintDictionary dictionary;
    SecretStore secrets;
    std::vector<std::size_t> order;
    std::vector<TraceEvent> trace;
};

/// Search exhausted. `transition` is the deepest transition (in refinement
/// order) at which every candidate failed.
struct Infeasible {
    std::optional<std::size_t> transition;
    std::vector<std::string> reasons;
    std::vector<TraceEvent> trace;
};

using RefineResult = std::variant<Refinement, Infeasible>;

/// Fuses a procedure's bound entry and exit constraints into `d` for
/// transition `t`. Returns the conflict when the result is unusable:
/// Unsat, not deployable from the pool, or constraints on an external machine.
inline std::optional<std::string> apply_procedure(ConstraintDictionary& d, const Transition& t, const Procedure& p,
                                                  const Catalog& c)
{
    const std::pair<const Position*, MachineConstraint> roles[] = {
        {&t.src, bind_role(p.entry, entry_binding(t), p)},
        {&t.dst, bind_role(p.exit, exit_binding(t), p)},
    };
    for (const auto& [pos, role] : roles) {
        auto* cur = d.find(pos->machine);
        if (!cur) {
            if (!role.empty())
                return "machine " + pos->machine + " is not deployed but " + p.name + " constrains it";
            continue;
        }
        auto fused = fuse_machine(*cur, Fused<MachineConstraint>(role), c.taxonomy);
        if (!fused) {
            const auto reason = "machine " + pos->machine + ": " + fused.unsat().reason;
            *cur = std::move(fused);
            return reason;
        }
        if (!c.deployable(fused->os)) {
            const auto reason = "machine " + pos->machine + ": no pool image satisfies os " + fused->os.platform +
                                " " + fused->os.versions.str();
            *cur = Unsat{reason};
            return reason;
        }
        *cur = std::move(fused);
    }
    return std::nullopt;
}

namespace detail {

class Refiner {
    const Scenario& s_;
    const Catalog& c_;
    const RefineOptions& opt_;
    std::vector<std::size_t> order_;
    std::vector<std::string> assignment_;
    std::vector<TraceEvent> trace_;
    std::optional<std::size_t> deepest_depth_;
    std::optional<std::size_t> deepest_transition_;
    std::vector<std::string> deepest_reasons_;

    std::vector<const Procedure*> candidates(std::size_t ti, const SecretStore& store)
    {
        const auto& t = s_.transitions[ti];
        const auto resolved = store.types();
        auto comp = compatible(t, resolved, c_);
        for (const auto* p : c_.for_technique(t.technique))
            if (std::find(comp.begin(), comp.end(), p) == comp.end())
                trace_.push_back({TraceEvent::Kind::Excluded, ti, p->name, exclusion_reason(*p, t, resolved)});
        if (opt_.order == ProcedureOrder::Seeded) {
            auto rng = keyed_rng(opt_.seed, {"comp", std::to_string(ti)});
            seeded_shuffle(comp, rng);
        }
        return comp;
    }

    void note_failure(std::size_t depth, std::size_t ti, std::vector<std::string> reasons)
    {
        if (deepest_depth_ && *deepest_depth_ >= depth)
            return;
        deepest_depth_ = depth;
        deepest_transition_ = ti;
        deepest_reasons_ = std::move(reasons);
    }

public:
    Refiner(const Scenario& s, const Catalog& c, const RefineOptions& opt)
        : s_(s), c_(c), opt_(opt), assignment_(s.transitions.size())
    {
        if (opt.prioritize_secrets) {
            order_ = sort_transitions(s.transitions);
        } else {
            for (std::size_t i = 0; i < s.transitions.size(); ++i)
                order_.push_back(i);
        }
    }

    std::optional<std::pair<ConstraintDictionary, SecretStore>> search(std::size_t depth, const ConstraintDictionary& d,
                                                                       const SecretStore& store)
    {
        if (depth == order_.size())
            return std::make_pair(d, store);
        const auto ti = order_[depth];
        const auto& t = s_.transitions[ti];
        std::vector<std::string> reasons;
        const auto comp = candidates(ti, store);
        if (comp.empty())
            reasons.push_back("no compatible procedure for " + t.technique);
        for (const auto* p : comp) {
            for (const auto& typing : precondition_typings(*p, t, store.types())) {
                auto next = d; // branch copies
                if (auto conflict = apply_procedure(next, t, *p, c_)) {
                    trace_.push_back({TraceEvent::Kind::Rejected, ti, p->name, *conflict});
                    reasons.push_back(p->name + ": " + *conflict);
                    break; // the conflict does not depend on the typing
                }
                auto next_store = store;
                for (const auto& [id, type] : typing)
                    if (!next_store.contains(id))
                        next_store.generate(id, type, opt_.seed);
                std::string typed;
                for (const auto& [id, type] : typing)
                    typed += (typed.empty() ? "" : ", ") + id + ":" + std::string(to_string(type));
                trace_.push_back({TraceEvent::Kind::Chose, ti, p->name, typed});
                assignment_[ti] = p->id;
                if (auto done = search(depth + 1, next, next_store))
                    return done;
                trace_.push_back({TraceEvent::Kind::Backtracked, ti, p->name, "later transitions failed"});
                reasons.push_back(p->name + ": later transitions failed");
            }
        }
        note_failure(depth, ti, std::move(reasons));
        return std::nullopt;
    }

    RefineResult run()
    {
        if (!is_winnable(s_))
            return Infeasible{std::nullopt, {"scenario is not winnable"}, {}};
        auto found = search(0, initial_dictionary(s_, c_), SecretStore{});
        if (!found)
            return Infeasible{deepest_transition_, deepest_reasons_, std::move(trace_)};
        Refinement r{s_, std::move(found->first), std::move(found->second), order_, std::move(trace_)};
        for (std::size_t i = 0; i < r.procedural.transitions.size(); ++i)
            r.procedural.transitions[i].procedure = assignment_[i];
        return r;
    }
};

} // namespace detail

/// Backtracking refinement: depth-first over the (secret-first) transition
/// order, trying Comp(t) in seeded or catalog order, first full assignment
/// wins.
inline RefineResult refine(const Scenario& s, const Catalog& c, const RefineOptions& opt = {})
{
    return detail::Refiner(s, c, opt).run();
}

} // namespace decoyforge
