#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace decoyforge {

using MachineId = std::string;
using UserId = std::string;
using SecretId = std::string;

enum class Privilege { User, SuperUser };

inline std::string_view to_string(Privilege p)
{
    return p == Privilege::User ? "User" : "SuperUser";
}

inline std::optional<Privilege> parse_privilege(std::string_view s)
{
    if (s == "User")
        return Privilege::User;
    if (s == "SuperUser")
        return Privilege::SuperUser;
    return std::nullopt;
}

enum class SecretType { PlaintextPassword, HashedPassword, CrackableHashedPassword, SshKeyPair, WeakPassword };

inline std::string_view to_string(SecretType t)
{
    switch (t) {
    case SecretType::PlaintextPassword: return "PlaintextPassword";
    case SecretType::HashedPassword: return "HashedPassword";
    case SecretType::CrackableHashedPassword: return "CrackableHashedPassword";
    case SecretType::SshKeyPair: return "SshKeyPair";
    case SecretType::WeakPassword: return "WeakPassword";
    }
    return "?";
}

inline std::optional<SecretType> parse_secret_type(std::string_view s)
{
    for (auto t : {SecretType::PlaintextPassword, SecretType::HashedPassword, SecretType::CrackableHashedPassword,
                   SecretType::SshKeyPair, SecretType::WeakPassword})
        if (to_string(t) == s)
            return t;
    return std::nullopt;
}

/// MITRE ATT&CK technique code: `T` followed by digits, optionally `.` and
/// more digits (sub-technique).
class TechniqueId {
    std::string code_;

    explicit TechniqueId(std::string code) : code_(std::move(code)) {}

public:
    static bool is_valid(std::string_view s)
    {
        if (s.size() < 2 || s[0] != 'T')
            return false;
        std::size_t i = 1;
        auto digits = [&] {
            std::size_t start = i;
            while (i < s.size() && s[i] >= '0' && s[i] <= '9')
                ++i;
            return i > start;
        };
        if (!digits())
            return false;
        if (i == s.size())
            return true;
        if (s[i] != '.')
            return false;
        ++i;
        return digits() && i == s.size();
    }

    static std::optional<TechniqueId> parse(std::string_view s)
    {
        if (!is_valid(s))
            return std::nullopt;
        return TechniqueId(std::string(s));
    }

    // Throws std::invalid_argument on a malformed code.
    static TechniqueId of(std::string_view s)
    {
        auto t = parse(s);
        if (!t)
            throw std::invalid_argument("invalid technique id: " + std::string(s));
        return *t;
    }

    const std::string& str() const noexcept { return code_; }

    friend auto operator<=>(const TechniqueId&, const TechniqueId&) = default;
};

} // namespace decoyforge
