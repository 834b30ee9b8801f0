#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace deepgraph {

// splitmix64; used to derive independent stream seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded generator with hand-rolled transforms so that a given seed produces
// the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
        return Rng(mix_seed(master_seed ^ mix_seed(stream_id)));
    }

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller with a cached spare
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // uniform integer in [0, n), n > 0
    int uniform_int(int n) {
        const std::uint64_t bound = std::uint64_t(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return int(x % bound);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = int(v.size()) - 1; i > 0; --i) {
            std::swap(v[i], v[std::size_t(uniform_int(i + 1))]);
        }
    }

    // k distinct values from [0, n), in random order
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(std::size_t(n), 0);
        std::iota(pool.begin(), pool.end(), 0);
        if (k > n) k = n;
        for (int i = 0; i < k; ++i) {
            std::swap(pool[std::size_t(i)], pool[std::size_t(i + uniform_int(n - i))]);
        }
        pool.resize(std::size_t(k));
        return pool;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace deepgraph
