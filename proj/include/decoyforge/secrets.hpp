#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>
#include <openssl/pem.h>

#include "core.hpp"

namespace decoyforge {

/// Bundled brute-force dictionary for weak and crackable passwords.
inline constexpr std::array<std::string_view, 100> kWeakWords = {
    "password", "123456",   "qwerty",   "letmein",  "monkey",   "dragon",   "baseball", "football", "iloveyou",
    "master",   "sunshine", "princess", "welcome",  "shadow",   "superman", "michael",  "jessica",  "charlie",
    "rainbow",  "trustno1", "starwars", "freedom",  "whatever", "qazwsx",   "ninja",    "mustang",  "access",
    "batman",   "hello",    "hunter",   "ranger",   "buster",   "thomas",   "tigger",   "robert",   "soccer",
    "killer",   "hockey",   "george",   "andrew",   "summer",   "winter",   "autumn",   "spring",   "orange",
    "banana",   "cookie",   "flower",   "pepper",   "ginger",   "silver",   "golden",   "diamond",  "matrix",
    "phoenix",  "thunder",  "cheese",   "coffee",   "pirate",   "secret",   "dolphin",  "tiger",    "yellow",
    "purple",   "bailey",   "maggie",   "cowboy",   "eagles",   "lakers",   "yankees",  "hannah",   "jordan",
    "taylor",   "daniel",   "nicole",   "joshua",   "ashley",   "amanda",   "admin",    "root",     "changeme",
    "abc123",   "111111",   "123123",   "654321",   "666666",   "121212",   "000000",   "zaq12wsx", "passw0rd",
    "computer", "internet", "samsung",  "chelsea",  "arsenal",  "liverpool", "london",  "paris",    "berlin",
    "toronto"};

class DoubleGeneration : public std::logic_error {
public:
    explicit DoubleGeneration(const SecretId& id) : std::logic_error("secret '" + id + "' is already generated") {}
};

class CryptoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// `value` is what the secret reveals to its holder (the password, the hash,
/// the private key). `public_part` is set for key pairs only.
struct StoredSecret {
    SecretType type;
    std::string value;
    std::string public_part;

    friend bool operator==(const StoredSecret&, const StoredSecret&) = default;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Stream keyed by the seed and a list of labels, so that each draw site has
/// its own sequence no matter how many other draws happen first.
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::initializer_list<std::string_view> labels)
{
    std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (auto l : labels) {
        const auto h = fnv1a(l);
        material.push_back(static_cast<std::uint32_t>(h));
        material.push_back(static_cast<std::uint32_t>(h >> 32));
    }
    std::seed_seq seq(material.begin(), material.end());
    return std::mt19937_64(seq);
}

// std::uniform_int_distribution is not portable across standard libraries.
inline std::size_t uniform_below(std::mt19937_64& rng, std::size_t n)
{
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        const auto x = rng();
        if (x < limit)
            return static_cast<std::size_t>(x % bound);
    }
}

template <class T>
void seeded_shuffle(std::vector<T>& xs, std::mt19937_64& rng)
{
    for (std::size_t i = xs.size(); i > 1; --i)
        std::swap(xs[i - 1], xs[uniform_below(rng, i)]);
}

inline std::string random_alnum(std::mt19937_64& rng, std::size_t n)
{
    static constexpr std::string_view alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    std::string out;
    for (std::size_t i = 0; i < n; ++i)
        out += alphabet[uniform_below(rng, alphabet.size())];
    return out;
}

inline std::string to_hex(const unsigned char* data, std::size_t n)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += digits[data[i] >> 4];
        out += digits[data[i] & 0xf];
    }
    return out;
}

inline std::string base64(const std::string& bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

inline void put_ssh_string(std::string& out, std::string_view s)
{
    const auto n = static_cast<std::uint32_t>(s.size());
    for (int shift = 24; shift >= 0; shift -= 8)
        out += static_cast<char>((n >> shift) & 0xff);
    out += s;
}

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct BioDeleter {
    void operator()(BIO* b) const { BIO_free(b); }
};

/// Ed25519 pair from 32 seeded bytes: PKCS#8 PEM private key and an
/// authorized_keys line.
inline std::pair<std::string, std::string> ed25519_pair(std::mt19937_64& rng, std::string_view comment)
{
    std::array<unsigned char, 32> seed{};
    for (std::size_t i = 0; i < seed.size(); i += 8) {
        const auto x = rng();
        for (std::size_t j = 0; j < 8; ++j)
            seed[i + j] = static_cast<unsigned char>(x >> (8 * j));
    }
    std::unique_ptr<EVP_PKEY, PkeyDeleter> key(
        EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
    if (!key)
        throw CryptoError("cannot build Ed25519 key");

    std::unique_ptr<BIO, BioDeleter> bio(BIO_new(BIO_s_mem()));
    if (!bio || PEM_write_bio_PrivateKey(bio.get(), key.get(), nullptr, nullptr, 0, nullptr, nullptr) != 1)
        throw CryptoError("cannot encode Ed25519 private key");
    char* data = nullptr;
    const long len = BIO_get_mem_data(bio.get(), &data);
    std::string pem(data, static_cast<std::size_t>(len));

    std::array<unsigned char, 32> pub{};
    std::size_t pub_len = pub.size();
    if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &pub_len) != 1)
        throw CryptoError("cannot extract Ed25519 public key");
    std::string blob;
    put_ssh_string(blob, "ssh-ed25519");
    put_ssh_string(blob, std::string_view(reinterpret_cast<const char*>(pub.data()), pub_len));
    return {pem, "ssh-ed25519 " + base64(blob) + " " + std::string(comment)};
}

} // namespace detail

inline std::string sha256_hex(std::string_view text)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw CryptoError("SHA-256 failed");
    return detail::to_hex(md.data(), len);
}

/// Deterministic in (seed, id, type); independent of generation order.
inline StoredSecret make_secret(const SecretId& id, SecretType type, std::uint64_t seed)
{
    auto rng = detail::keyed_rng(seed, {"secret", id, to_string(type)});
    switch (type) {
    case SecretType::PlaintextPassword:
        return {type, detail::random_alnum(rng, 16), {}};
    case SecretType::WeakPassword:
        return {type, std::string(kWeakWords[detail::uniform_below(rng, kWeakWords.size())]), {}};
    case SecretType::CrackableHashedPassword:
        return {type, sha256_hex(kWeakWords[detail::uniform_below(rng, kWeakWords.size())]), {}};
    case SecretType::HashedPassword:
        return {type, sha256_hex(detail::random_alnum(rng, 32)), {}};
    case SecretType::SshKeyPair: {
        auto [priv, pub] = detail::ed25519_pair(rng, id);
        return {type, std::move(priv), std::move(pub)};
    }
    }
    throw std::logic_error("unknown secret type");
}

/// Write-once map of generated secrets. Copied per search branch.
class SecretStore {
    std::map<SecretId, StoredSecret> entries_;

public:
    bool contains(const SecretId& id) const { return entries_.count(id) > 0; }

    const StoredSecret& at(const SecretId& id) const { return entries_.at(id); }

    const std::map<SecretId, StoredSecret>& entries() const { return entries_; }

    std::map<SecretId, SecretType> types() const
    {
        std::map<SecretId, SecretType> out;
        for (const auto& [id, s] : entries_)
            out.emplace(id, s.type);
        return out;
    }

    const StoredSecret& generate(const SecretId& id, SecretType type, std::uint64_t seed)
    {
        if (contains(id))
            throw DoubleGeneration(id);
        return entries_.emplace(id, make_secret(id, type, seed)).first->second;
    }

    friend bool operator==(const SecretStore&, const SecretStore&) = default;
};

/// generate_secret in store form: resolves `id` or throws DoubleGeneration.
inline const StoredSecret& generate_secret(SecretStore& store, const SecretId& id, SecretType type,
                                           std::uint64_t seed)
{
    return store.generate(id, type, seed);
}

} // namespace decoyforge
