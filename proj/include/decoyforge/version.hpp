#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace decoyforge {

class VersionParseError : public std::runtime_error {
public:
    explicit VersionParseError(std::string_view s)
        : std::runtime_error("invalid version expression: '" + std::string(s) + "'")
    {}
};

/// Dotted-numeric version ("9.0", "1.8.2", "6.2.13723"). Comparison is
/// componentwise numeric with the shorter side padded by zeros, so "9" and
/// "9.0" compare equal; the original spelling is kept for output.
class Version {
    std::vector<std::uint64_t> parts_;
    std::string text_;

public:
    static Version parse(std::string_view s)
    {
        Version v;
        if (s.empty())
            throw VersionParseError(s);
        std::uint64_t cur = 0;
        bool have_digit = false;
        for (char c : s) {
            if (c >= '0' && c <= '9') {
                if (cur > (UINT64_MAX - 9) / 10)
                    throw VersionParseError(s);
                cur = cur * 10 + static_cast<std::uint64_t>(c - '0');
                have_digit = true;
            } else if (c == '.') {
                if (!have_digit)
                    throw VersionParseError(s);
                v.parts_.push_back(cur);
                cur = 0;
                have_digit = false;
            } else {
                throw VersionParseError(s);
            }
        }
        if (!have_digit)
            throw VersionParseError(s);
        v.parts_.push_back(cur);
        v.text_ = std::string(s);
        return v;
    }

    const std::string& str() const noexcept { return text_; }
    const std::vector<std::uint64_t>& parts() const noexcept { return parts_; }

    friend std::strong_ordering operator<=>(const Version& a, const Version& b)
    {
        const auto n = std::max(a.parts_.size(), b.parts_.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = i < a.parts_.size() ? a.parts_[i] : 0;
            const auto y = i < b.parts_.size() ? b.parts_[i] : 0;
            if (x != y)
                return x <=> y;
        }
        return std::strong_ordering::equal;
    }
    friend bool operator==(const Version& a, const Version& b) { return (a <=> b) == 0; }
};

namespace detail {
// Among equal versions, keep the lexicographically smallest spelling so that
// set operations do not depend on operand order.
inline const Version& canonical_of(const Version& a, const Version& b)
{
    return b.str() < a.str() ? b : a;
}
} // namespace detail

struct VersionBound {
    Version value;
    bool inclusive = true;

    friend bool operator==(const VersionBound& a, const VersionBound& b)
    {
        return a.value == b.value && a.inclusive == b.inclusive;
    }
};

/// A set of versions: the wildcard, a finite set, or an interval with
/// optional open/closed bounds. Construction normalizes degenerate forms:
/// an unbounded interval is the wildcard and a one-point closed interval is a
/// singleton. Empty sets are not representable; builders return nullopt.
class VersionSet {
public:
    enum class Kind { Any, Finite, Range };

private:
    Kind kind_ = Kind::Any;
    std::vector<Version> finite_; // sorted, unique
    std::optional<VersionBound> lo_, hi_;

public:
    VersionSet() = default;

    static VersionSet any() { return {}; }

    static std::optional<VersionSet> of(std::vector<Version> vs)
    {
        if (vs.empty())
            return std::nullopt;
        std::sort(vs.begin(), vs.end(), [](const Version& a, const Version& b) {
            if (auto c = a <=> b; c != 0)
                return c < 0;
            return a.str() < b.str();
        });
        VersionSet s;
        s.kind_ = Kind::Finite;
        for (auto& v : vs) {
            if (!s.finite_.empty() && s.finite_.back() == v)
                continue; // sort placed the smallest spelling first
            s.finite_.push_back(std::move(v));
        }
        return s;
    }

    static VersionSet exactly(Version v) { return *of({std::move(v)}); }

    static std::optional<VersionSet> range(std::optional<VersionBound> lo, std::optional<VersionBound> hi)
    {
        if (!lo && !hi)
            return any();
        if (lo && hi) {
            const auto c = lo->value <=> hi->value;
            if (c > 0)
                return std::nullopt;
            if (c == 0) {
                if (!lo->inclusive || !hi->inclusive)
                    return std::nullopt;
                return exactly(detail::canonical_of(lo->value, hi->value));
            }
        }
        VersionSet s;
        s.kind_ = Kind::Range;
        s.lo_ = std::move(lo);
        s.hi_ = std::move(hi);
        return s;
    }

    /// Grammar: `*` | `1.2.3` | `{1.2, 1.3}` | `[lo,hi]` with `[`/`(` and
    /// `]`/`)` choosing closed/open bounds and an empty side meaning unbounded.
    static VersionSet parse(std::string_view text)
    {
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
                s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
                s.remove_suffix(1);
            return s;
        };
        const auto s = trim(text);
        if (s.empty())
            throw VersionParseError(text);
        if (s == "*")
            return any();
        if (s.front() == '{') {
            if (s.back() != '}')
                throw VersionParseError(text);
            std::vector<Version> vs;
            auto body = s.substr(1, s.size() - 2);
            while (true) {
                const auto comma = body.find(',');
                vs.push_back(Version::parse(trim(body.substr(0, comma))));
                if (comma == std::string_view::npos)
                    break;
                body.remove_prefix(comma + 1);
            }
            return *of(std::move(vs));
        }
        if (s.front() == '[' || s.front() == '(') {
            const char close = s.back();
            if (close != ']' && close != ')')
                throw VersionParseError(text);
            const auto body = s.substr(1, s.size() - 2);
            const auto comma = body.find(',');
            if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos)
                throw VersionParseError(text);
            const auto lo_text = trim(body.substr(0, comma));
            const auto hi_text = trim(body.substr(comma + 1));
            std::optional<VersionBound> lo, hi;
            if (!lo_text.empty())
                lo = VersionBound{Version::parse(lo_text), s.front() == '['};
            if (!hi_text.empty())
                hi = VersionBound{Version::parse(hi_text), close == ']'};
            auto r = range(std::move(lo), std::move(hi));
            if (!r)
                throw VersionParseError(text);
            return *r;
        }
        return exactly(Version::parse(s));
    }

    Kind kind() const noexcept { return kind_; }
    bool is_any() const noexcept { return kind_ == Kind::Any; }
    const std::vector<Version>& elements() const noexcept { return finite_; }
    const std::optional<VersionBound>& lower() const noexcept { return lo_; }
    const std::optional<VersionBound>& upper() const noexcept { return hi_; }

    bool contains(const Version& v) const
    {
        switch (kind_) {
        case Kind::Any: return true;
        case Kind::Finite: return std::binary_search(finite_.begin(), finite_.end(), v);
        case Kind::Range:
            if (lo_ && (lo_->inclusive ? v < lo_->value : v <= lo_->value))
                return false;
            if (hi_ && (hi_->inclusive ? v > hi_->value : v >= hi_->value))
                return false;
            return true;
        }
        return false;
    }

    std::string str() const
    {
        switch (kind_) {
        case Kind::Any: return "*";
        case Kind::Finite: {
            if (finite_.size() == 1)
                return finite_.front().str();
            std::string out = "{";
            for (std::size_t i = 0; i < finite_.size(); ++i)
                out += (i ? "," : "") + finite_[i].str();
            return out + "}";
        }
        case Kind::Range: {
            std::string out = lo_ && lo_->inclusive ? "[" : "(";
            if (lo_)
                out += lo_->value.str();
            out += ",";
            if (hi_)
                out += hi_->value.str();
            return out + (hi_ && hi_->inclusive ? "]" : ")");
        }
        }
        return "?";
    }

    friend bool operator==(const VersionSet& a, const VersionSet& b)
    {
        if (a.kind_ != b.kind_)
            return false;
        if (a.kind_ == Kind::Finite) {
            if (a.finite_.size() != b.finite_.size())
                return false;
            for (std::size_t i = 0; i < a.finite_.size(); ++i)
                if (a.finite_[i] != b.finite_[i] || a.finite_[i].str() != b.finite_[i].str())
                    return false;
            return true;
        }
        return a.lo_ == b.lo_ && a.hi_ == b.hi_;
    }
};

namespace detail {

inline std::optional<VersionBound> tighter_lower(const std::optional<VersionBound>& a,
                                                 const std::optional<VersionBound>& b)
{
    if (!a)
        return b;
    if (!b)
        return a;
    const auto c = a->value <=> b->value;
    if (c > 0)
        return a;
    if (c < 0)
        return b;
    return VersionBound{canonical_of(a->value, b->value), a->inclusive && b->inclusive};
}

inline std::optional<VersionBound> tighter_upper(const std::optional<VersionBound>& a,
                                                 const std::optional<VersionBound>& b)
{
    if (!a)
        return b;
    if (!b)
        return a;
    const auto c = a->value <=> b->value;
    if (c < 0)
        return a;
    if (c > 0)
        return b;
    return VersionBound{canonical_of(a->value, b->value), a->inclusive && b->inclusive};
}

} // namespace detail

/// Set intersection; nullopt when empty.
inline std::optional<VersionSet> intersect(const VersionSet& a, const VersionSet& b)
{
    using Kind = VersionSet::Kind;
    if (a.is_any())
        return b;
    if (b.is_any())
        return a;
    if (a.kind() == Kind::Finite && b.kind() == Kind::Finite) {
        std::vector<Version> common;
        for (const auto& x : a.elements())
            for (const auto& y : b.elements())
                if (x == y)
                    common.push_back(detail::canonical_of(x, y));
        return VersionSet::of(std::move(common));
    }
    if (a.kind() == Kind::Finite || b.kind() == Kind::Finite) {
        const auto& fin = a.kind() == Kind::Finite ? a : b;
        const auto& rng = a.kind() == Kind::Finite ? b : a;
        std::vector<Version> kept;
        for (const auto& v : fin.elements())
            if (rng.contains(v))
                kept.push_back(v);
        return VersionSet::of(std::move(kept));
    }
    return VersionSet::range(detail::tighter_lower(a.lower(), b.lower()),
                             detail::tighter_upper(a.upper(), b.upper()));
}

} // namespace decoyforge
