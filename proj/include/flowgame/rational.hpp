#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <compare>
#include <limits>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flowgame {

/// Exact rational. All referee arithmetic goes through this type.
using Rat = mpq_class;
using BigInt = mpz_class;

/// p/q in lowest terms (gmp arithmetic requires canonical operands).
inline Rat make_rat(long p, long q) {
    Rat r(p, q);
    r.canonicalize();
    return r;
}

/// Parses "p/q" or "p". Rejects malformed input and zero denominators.
inline Rat parse_rat(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty rational");
    std::string s(text);
    auto slash = s.find('/');
    auto valid_int = [](std::string_view digits, bool allow_sign) {
        if (digits.empty()) return false;
        std::size_t start = 0;
        if (allow_sign && (digits[0] == '-' || digits[0] == '+')) start = 1;
        if (start == digits.size()) return false;
        for (std::size_t i = start; i < digits.size(); ++i)
            if (digits[i] < '0' || digits[i] > '9') return false;
        return true;
    };
    std::string_view sv(s);
    if (slash == std::string::npos) {
        if (!valid_int(sv, true)) throw std::invalid_argument("bad rational: " + s);
        return Rat(BigInt(s[0] == '+' ? s.substr(1) : s));
    }
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!valid_int(num, true) || !valid_int(den, false))
        throw std::invalid_argument("bad rational: " + s);
    BigInt d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: " + s);
    Rat r(BigInt(num[0] == '+' ? num.substr(1) : num), d);
    r.canonicalize();
    return r;
}

/// Canonical "p/q" form, always with a denominator ("0/1", "3/1").
inline std::string format_rat(const Rat& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline double to_double(const Rat& r) { return r.get_d(); }

/// Largest multiple of 2^-bits that is <= x (x >= 0).
inline Rat floor_dyadic(const Rat& x, unsigned bits) {
    BigInt scaled = (x.get_num() << bits) / x.get_den();  // floor for x >= 0
    Rat out(scaled, BigInt(1) << bits);
    out.canonicalize();
    return out;
}

/// Rounds x >= 0 down to a dyadic with about `bits` significant bits.
inline Rat floor_significant(const Rat& x, unsigned bits) {
    if (sgn(x) <= 0) return Rat(0);
    long mag = static_cast<long>(mpz_sizeinbase(x.get_num_mpz_t(), 2)) -
               static_cast<long>(mpz_sizeinbase(x.get_den_mpz_t(), 2));
    long shift = static_cast<long>(bits) - mag;
    return floor_dyadic(x, static_cast<unsigned>(std::max(shift, 0L)));
}

inline Rat pow2(long e) {
    if (e >= 0) return Rat(BigInt(1) << static_cast<unsigned long>(e));
    Rat r(BigInt(1), BigInt(1) << static_cast<unsigned long>(-e));
    return r;
}

/// Non-negative rational extended with +infinity.
class ExtRat {
public:
    ExtRat() = default;
    ExtRat(Rat v) : value_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

    static ExtRat infinity() {
        ExtRat e;
        e.infinite_ = true;
        return e;
    }

    bool is_infinite() const { return infinite_; }

    const Rat& value() const {
        if (infinite_) throw std::logic_error("value() of infinite ExtRat");
        return value_;
    }

    ExtRat& operator+=(const ExtRat& other) {
        if (infinite_) return *this;
        if (other.infinite_) {
            infinite_ = true;
            value_ = 0;
            return *this;
        }
        value_ += other.value_;
        return *this;
    }

    friend ExtRat operator+(ExtRat lhs, const ExtRat& rhs) { return lhs += rhs; }

    friend bool operator==(const ExtRat& x, const ExtRat& y) {
        if (x.infinite_ || y.infinite_) return x.infinite_ == y.infinite_;
        return x.value_ == y.value_;
    }

    friend std::strong_ordering operator<=>(const ExtRat& x, const ExtRat& y) {
        if (x.infinite_ || y.infinite_) {
            if (x.infinite_ == y.infinite_) return std::strong_ordering::equal;
            return x.infinite_ ? std::strong_ordering::greater : std::strong_ordering::less;
        }
        int c = cmp(x.value_, y.value_);
        if (c < 0) return std::strong_ordering::less;
        if (c > 0) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    double to_double() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_.get_d();
    }

    /// "p/q" or "inf".
    std::string str() const { return infinite_ ? "inf" : format_rat(value_); }

    static ExtRat parse(std::string_view text) {
        if (text == "inf") return infinity();
        return ExtRat(parse_rat(text));
    }

private:
    Rat value_{0};
    bool infinite_ = false;
};

/// m/a under the game's conventions: m/0 = +inf for m != 0, 0/0 = 0.
inline ExtRat ratio(const Rat& m, const Rat& a) {
    if (sgn(a) == 0) return sgn(m) == 0 ? ExtRat() : ExtRat::infinity();
    return ExtRat(Rat(m / a));
}

/// FNV-1a over bytes; used for content addressing and state digests.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_mpz(const BigInt& z, std::uint64_t h) {
    const int sign = mpz_sgn(z.get_mpz_t());
    h = fnv1a(&sign, sizeof sign, h);
    const std::size_t n = mpz_size(z.get_mpz_t());
    for (std::size_t i = 0; i < n; ++i) {
        mp_limb_t limb = mpz_getlimbn(z.get_mpz_t(), static_cast<mp_size_t>(i));
        h = fnv1a(&limb, sizeof limb, h);
    }
    return h;
}

inline std::uint64_t hash_rat(const Rat& r, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return hash_mpz(r.get_den(), hash_mpz(r.get_num(), h));
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return out;
}

}  // namespace flowgame
