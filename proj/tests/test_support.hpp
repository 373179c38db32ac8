#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "exptype/exp_core.hpp"
#include "exptype/types.hpp"

namespace testing_support {

using exptype::cplx;

inline double rel_err(cplx got, cplx want) {
    const double s = std::max(1.0, std::abs(want));
    return std::abs(got - want) / s;
}

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    cplx in_box(double half) { return {uniform(-half, half), uniform(-half, half)}; }
    cplx in_disk(double r) {
        const double rho = r * std::sqrt(uniform(0.0, 1.0));
        return std::polar(rho, uniform(-exptype::pi, exptype::pi));
    }
    cplx coeff() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

    // Random exponential polynomial with well-separated frequencies.
    exptype::ExpSum expsum(int max_terms, double freq_radius, int max_degree) {
        const int n = integer(1, max_terms);
        std::vector<exptype::ExpMonomial> terms;
        std::vector<cplx> used;
        while (static_cast<int>(terms.size()) < n) {
            const cplx a = in_disk(freq_radius);
            bool ok = true;
            for (cplx u : used) ok = ok && std::abs(u - a) > 0.1;
            if (!ok) continue;
            used.push_back(a);
            std::vector<cplx> p(integer(0, max_degree) + 1);
            for (auto& c : p) c = coeff();
            if (std::abs(p.back()) < 0.1) p.back() = 0.5;
            terms.push_back({a, p});
        }
        return exptype::ExpSum(terms);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace testing_support
