#ifndef MAGSPHERE_RNG_HPP
#define MAGSPHERE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include "vec3.hpp"

namespace magsphere {

/// Deterministic random source. Doubles are produced from raw mt19937_64
/// bits so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    double uniform() {  // [0,1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double range(double a, double b) { return a + (b - a) * uniform(); }

    Vec3 unit_vec3() {
        for (;;) {
            const Vec3 v{range(-1, 1), range(-1, 1), range(-1, 1)};
            const double n2 = norm2(v);
            if (n2 > 1e-6 && n2 <= 1.0) return v / std::sqrt(n2);
        }
    }

    Mat3 rotation() { return rotation_about(unit_vec3(), range(0, 2 * M_PI)); }

private:
    std::mt19937_64 eng_;
};

/// Sobol sequence in up to 3 dimensions (first three standard direction
/// number sets), Gray-code ordering, used for quasi-uniform seeding.
class Sobol {
public:
    explicit Sobol(int dim) : dim_(dim) {
        for (int b = 0; b < kBits; ++b) v_[0][b] = 1ull << (63 - b);
        init_dim(1, 1, 0, {1});
        init_dim(2, 2, 1, {1, 3});
    }

    std::array<double, 3> next() {
        std::uint64_t i = index_++;
        int c = 0;
        while (i & 1) {
            i >>= 1;
            ++c;
        }
        std::array<double, 3> out{};
        for (int d = 0; d < dim_; ++d) {
            state_[d] ^= v_[d][c];
            out[d] = static_cast<double>(state_[d] >> 11) * 0x1.0p-53;
        }
        return out;
    }

private:
    static constexpr int kBits = 52;

    // Direction numbers from the primitive polynomial of degree s with
    // interior coefficient bits a, seeded by the odd initial values m.
    void init_dim(int d, int s, unsigned a, std::initializer_list<std::uint64_t> minit) {
        std::array<std::uint64_t, kBits> m{};
        int n = 0;
        for (std::uint64_t mi : minit) m[n++] = mi;
        for (int i = n; i < kBits; ++i) {
            std::uint64_t val = m[i - s] ^ (m[i - s] << s);
            for (int k = 1; k < s; ++k)
                if ((a >> (s - 1 - k)) & 1) val ^= m[i - k] << k;
            m[i] = val;
        }
        for (int b = 0; b < kBits; ++b) v_[d][b] = m[b] << (63 - b);
    }

    int dim_;
    std::uint64_t index_ = 0;
    std::array<std::uint64_t, 3> state_{0, 0, 0};
    std::array<std::array<std::uint64_t, kBits>, 3> v_{};
};

} // namespace magsphere

#endif
