#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core.hpp"

namespace decoyforge {

/// An attacker session: a user on a machine.
struct Position {
    MachineId machine;
    UserId user;

    std::string str() const { return machine + "/" + user; }
    friend auto operator<=>(const Position&, const Position&) = default;
};

/// Edge of the scenario graph. `technique` is always set; `procedure` is set
/// once the transition has been refined.
struct Transition {
    Position src;
    Position dst;
    std::string technique;
    std::optional<std::string> procedure;
    std::set<SecretId> pre;
    std::set<SecretId> post;

    bool handles_secrets() const { return !pre.empty() || !post.empty(); }
    std::string label() const { return procedure ? technique + "/" + *procedure : technique; }

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct Scenario {
    std::vector<Position> positions;
    std::vector<Transition> transitions;
    std::set<Position> starting;
    std::set<Position> winning;
    std::vector<SecretId> secrets;
    /// Machines that take part in the scenario but are not deployed.
    std::set<MachineId> external_machines;
    /// Privileges declared on positions; undeclared ones are unconstrained.
    std::map<Position, Privilege> privileges;

    /// Machines in order of first appearance in `positions`.
    std::vector<MachineId> machines() const
    {
        std::vector<MachineId> out;
        for (const auto& p : positions)
            if (std::find(out.begin(), out.end(), p.machine) == out.end())
                out.push_back(p.machine);
        return out;
    }

    std::vector<MachineId> deployed_machines() const
    {
        auto all = machines();
        std::erase_if(all, [&](const auto& m) { return external_machines.count(m) > 0; });
        return all;
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

enum class DiagnosticKind {
    EmptyStartingSet,
    EmptyWinningSet,
    EmptyIdentifier,
    DuplicatePosition,
    DuplicateSecret,
    UnknownPosition,
    UndeclaredSecret,
    UnproducibleSecret,
    PrePostOverlap,
    InvalidTechniqueId,
    UnknownExternalMachine,
};

inline std::string_view to_string(DiagnosticKind k)
{
    switch (k) {
    case DiagnosticKind::EmptyStartingSet: return "EmptyStartingSet";
    case DiagnosticKind::EmptyWinningSet: return "EmptyWinningSet";
    case DiagnosticKind::EmptyIdentifier: return "EmptyIdentifier";
    case DiagnosticKind::DuplicatePosition: return "DuplicatePosition";
    case DiagnosticKind::DuplicateSecret: return "DuplicateSecret";
    case DiagnosticKind::UnknownPosition: return "UnknownPosition";
    case DiagnosticKind::UndeclaredSecret: return "UndeclaredSecret";
    case DiagnosticKind::UnproducibleSecret: return "UnproducibleSecret";
    case DiagnosticKind::PrePostOverlap: return "PrePostOverlap";
    case DiagnosticKind::InvalidTechniqueId: return "InvalidTechniqueId";
    case DiagnosticKind::UnknownExternalMachine: return "UnknownExternalMachine";
    }
    return "?";
}

struct Diagnostic {
    DiagnosticKind kind;
    std::string subject; // offending element
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline std::vector<Diagnostic> validate_scenario(const Scenario& s)
{
    std::vector<Diagnostic> out;
    auto report = [&](DiagnosticKind k, std::string subject, std::string message) {
        out.push_back({k, std::move(subject), std::move(message)});
    };

    std::set<Position> declared;
    for (const auto& p : s.positions) {
        if (p.machine.empty() || p.user.empty())
            report(DiagnosticKind::EmptyIdentifier, p.str(), "position has an empty machine or user");
        if (!declared.insert(p).second)
            report(DiagnosticKind::DuplicatePosition, p.str(), "position declared twice");
    }
    auto check_known = [&](const Position& p, const std::string& where) {
        if (!declared.count(p))
            report(DiagnosticKind::UnknownPosition, p.str(), where + " references undeclared position");
    };

    if (s.starting.empty())
        report(DiagnosticKind::EmptyStartingSet, "starting", "no starting position");
    if (s.winning.empty())
        report(DiagnosticKind::EmptyWinningSet, "winning", "no winning position");
    for (const auto& p : s.starting)
        check_known(p, "starting set");
    for (const auto& p : s.winning)
        check_known(p, "winning set");

    std::set<SecretId> secrets;
    for (const auto& id : s.secrets) {
        if (id.empty())
            report(DiagnosticKind::EmptyIdentifier, "secrets", "empty secret id");
        else if (!secrets.insert(id).second)
            report(DiagnosticKind::DuplicateSecret, id, "secret declared twice");
    }

    const auto machines = s.machines();
    for (const auto& m : s.external_machines)
        if (std::find(machines.begin(), machines.end(), m) == machines.end())
            report(DiagnosticKind::UnknownExternalMachine, m, "external machine has no position");

    std::set<SecretId> produced;
    for (const auto& t : s.transitions)
        produced.insert(t.post.begin(), t.post.end());

    for (std::size_t i = 0; i < s.transitions.size(); ++i) {
        const auto& t = s.transitions[i];
        const auto where = "transition " + std::to_string(i);
        check_known(t.src, where + " src");
        check_known(t.dst, where + " dst");
        if (!TechniqueId::is_valid(t.technique))
            report(DiagnosticKind::InvalidTechniqueId, t.technique, where + " has a malformed technique id");
        for (const auto& id : t.pre) {
            if (!secrets.count(id))
                report(DiagnosticKind::UndeclaredSecret, id, where + " requires an undeclared secret");
            if (t.post.count(id))
                report(DiagnosticKind::PrePostOverlap, id, where + " both requires and rewards the secret");
        }
        for (const auto& id : t.post)
            if (!secrets.count(id))
                report(DiagnosticKind::UndeclaredSecret, id, where + " rewards an undeclared secret");
    }

    std::set<SecretId> reported;
    for (const auto& t : s.transitions)
        for (const auto& id : t.pre)
            if (!produced.count(id) && reported.insert(id).second)
                report(DiagnosticKind::UnproducibleSecret, id, "secret is required but never rewarded");
    return out;
}

/// Positions held and secrets known. Both only grow along a path.
struct AttackerState {
    std::set<Position> held;
    std::set<SecretId> knowledge;

    friend bool operator==(const AttackerState&, const AttackerState&) = default;
};

inline bool applicable(const AttackerState& a, const Transition& t)
{
    return a.held.count(t.src) > 0 &&
           std::includes(a.knowledge.begin(), a.knowledge.end(), t.pre.begin(), t.pre.end());
}

/// Applies `t`, or nullopt when `t` is not applicable in `a`.
inline std::optional<AttackerState> step(const AttackerState& a, const Transition& t)
{
    if (!applicable(a, t))
        return std::nullopt;
    AttackerState next = a;
    next.held.insert(t.dst);
    next.knowledge.insert(t.post.begin(), t.post.end());
    return next;
}

inline AttackerState initial_state(const Scenario& s) { return {s.starting, {}}; }

/// Least fixpoint of `step` from the starting positions.
inline AttackerState reachable_states(const Scenario& s)
{
    auto state = initial_state(s);
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& t : s.transitions) {
            if (auto next = step(state, t); next && *next != state) {
                state = std::move(*next);
                changed = true;
            }
        }
    }
    return state;
}

inline bool holds_winning(const Scenario& s, const AttackerState& a)
{
    return std::any_of(s.winning.begin(), s.winning.end(), [&](const auto& w) { return a.held.count(w) > 0; });
}

inline bool is_winnable(const Scenario& s) { return holds_winning(s, reachable_states(s)); }

/// Transition-index sequences that are executable, end in a state holding a
/// winning position, and from which no transition can be dropped.
struct WinningPaths {
    std::vector<std::vector<std::size_t>> sequences;
    bool truncated = false; // some branch was cut at max_len

    /// Sequences grouped by their set of transitions (orderings of the same
    /// transitions form one family), in order of first appearance.
    std::vector<std::vector<std::size_t>> families() const
    {
        std::vector<std::vector<std::size_t>> out;
        for (auto seq : sequences) {
            std::sort(seq.begin(), seq.end());
            if (std::find(out.begin(), out.end(), seq) == out.end())
                out.push_back(std::move(seq));
        }
        return out;
    }
};

namespace detail {

inline std::optional<AttackerState> run_path(const Scenario& s, const std::vector<std::size_t>& seq,
                                             std::size_t skip)
{
    auto state = initial_state(s);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i == skip)
            continue;
        auto next = step(state, s.transitions[seq[i]]);
        if (!next)
            return std::nullopt;
        state = std::move(*next);
    }
    return state;
}

// By monotonicity, a sequence has an executable winning proper subsequence
// iff dropping a single element keeps it executable and winning.
inline bool is_minimal(const Scenario& s, const std::vector<std::size_t>& seq)
{
    for (std::size_t i = 0; i < seq.size(); ++i) {
        auto st = run_path(s, seq, i);
        if (st && holds_winning(s, *st))
            return false;
    }
    return true;
}

inline void extend_paths(const Scenario& s, const AttackerState& state, std::vector<std::size_t>& seq,
                         std::size_t max_len, WinningPaths& out)
{
    if (holds_winning(s, state)) {
        if (is_minimal(s, seq))
            out.sequences.push_back(seq);
        return;
    }
    for (std::size_t i = 0; i < s.transitions.size(); ++i) {
        auto next = step(state, s.transitions[i]);
        if (!next || *next == state)
            continue; // a no-op step can always be dropped
        if (seq.size() == max_len) {
            out.truncated = true;
            return;
        }
        seq.push_back(i);
        extend_paths(s, *next, seq, max_len, out);
        seq.pop_back();
    }
}

} // namespace detail

/// Depth-first, transitions tried in index order, so sequences come out
/// lexicographically ordered by transition index.
inline WinningPaths enumerate_winning_paths(const Scenario& s, std::size_t max_len)
{
    WinningPaths out;
    std::vector<std::size_t> seq;
    detail::extend_paths(s, initial_state(s), seq, max_len, out);
    return out;
}

} // namespace decoyforge
