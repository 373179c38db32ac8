#pragma once

#include <cmath>
#include <vector>

#include "exptype/types.hpp"

namespace exptype {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

// Gauss-Legendre rule of the given order; cached per order, thread-safe.
const GaussRule& gauss_legendre(int order);

// Neumaier-compensated complex accumulator. Deterministic for a fixed
// insertion order.
class CompensatedSum {
public:
    void add(cplx x) {
        re_.add(x.real());
        im_.add(x.imag());
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    struct Real {
        double sum = 0.0;
        double comp = 0.0;
        void add(double x) {
            const double t = sum + x;
            if (std::abs(sum) >= std::abs(x))
                comp += (sum - t) + x;
            else
                comp += (x - t) + sum;
            sum = t;
        }
        double value() const { return sum + comp; }
    };
    Real re_;
    Real im_;
};

}  // namespace exptype
