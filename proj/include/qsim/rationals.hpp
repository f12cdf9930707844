#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsim {

using Rat = mpq_class;

// Parses "num", "num/den" or a decimal like "-0.25" into an exact rational.
inline Rat rat_parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        std::size_t frac_len = s.size() - dot - 1;
        mpz_class num(digits), den(1);
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        Rat q(num, den);
        q.canonicalize();
        return q;
    }
    Rat q(s);
    q.canonicalize();
    return q;
}

inline std::string rat_str(const Rat& q) { return q.get_str(); }

inline double rat_double(const Rat& q) { return q.get_d(); }

inline Rat rat_from_long(long n, long d = 1) {
    if (d == 0) throw std::invalid_argument("zero denominator");
    Rat q(n, d);
    q.canonicalize();
    return q;
}

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

inline Rat rat_pow(const Rat& q, unsigned e) {
    Rat r(1);
    for (unsigned i = 0; i < e; ++i) r *= q;
    return r;
}

inline std::vector<std::string> rat_strs(const std::vector<Rat>& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& q : v) out.push_back(rat_str(q));
    return out;
}

}  // namespace qsim
