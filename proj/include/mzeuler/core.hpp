// Basic scalar/vector types and wavenumber range masks shared by all modules.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mze {

using real = double;
using cplx = std::complex<double>;

constexpr cplx imag_unit{0.0, 1.0};

using Vec3i = std::array<int, 3>;

struct Vec3c {
    cplx v[3]{};

    cplx& operator[](int i) { return v[i]; }
    const cplx& operator[](int i) const { return v[i]; }

    Vec3c& operator+=(const Vec3c& o) {
        v[0] += o.v[0]; v[1] += o.v[1]; v[2] += o.v[2];
        return *this;
    }
    Vec3c operator+(const Vec3c& o) const { Vec3c r = *this; r += o; return r; }
    Vec3c operator-(const Vec3c& o) const {
        return Vec3c{{v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}};
    }
    Vec3c operator*(cplx s) const { return Vec3c{{v[0] * s, v[1] * s, v[2] * s}}; }
};

inline cplx dot(const Vec3i& k, const Vec3c& u) {
    return real(k[0]) * u[0] + real(k[1]) * u[1] + real(k[2]) * u[2];
}

// Subsets of the wavenumber cube that appear as summation ranges.  Encoded as
// bit flags so that intersection/union are bit operations and masks stay
// closed under them: F|G = FG, F&G = Empty.
enum class Mask : unsigned char {
    Empty = 0,
    F     = 1,  // resolved modes, [-N/2, N/2-1]^3
    G     = 2,  // unresolved complement
    FG    = 3,  // full cube [-M/2, M/2-1]^3
};

inline Mask operator&(Mask a, Mask b) {
    return Mask(static_cast<unsigned char>(a) & static_cast<unsigned char>(b));
}
inline Mask operator|(Mask a, Mask b) {
    return Mask(static_cast<unsigned char>(a) | static_cast<unsigned char>(b));
}
inline bool mask_empty(Mask m) { return m == Mask::Empty; }

inline const char* mask_name(Mask m) {
    switch (m) {
        case Mask::Empty: return "0";
        case Mask::F:     return "F";
        case Mask::G:     return "G";
        case Mask::FG:    return "FG";
    }
    return "?";
}

inline Mask mask_from_name(const std::string& s) {
    if (s == "F") return Mask::F;
    if (s == "G") return Mask::G;
    if (s == "FG") return Mask::FG;
    if (s == "0") return Mask::Empty;
    throw std::invalid_argument("unknown mask name: " + s);
}

// 64-bit mix used wherever we need a cheap, stable hash.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace mze
