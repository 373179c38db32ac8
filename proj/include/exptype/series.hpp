#pragma once

#include <vector>

#include "exptype/types.hpp"

namespace exptype {

// Truncated power series a_0 + a_1 t + ... ; every routine returns exactly n
// coefficients (missing inputs are treated as zero).
using Series = std::vector<cplx>;

Series series_truncate(Series a, std::size_t n);
Series series_add(const Series& a, const Series& b, std::size_t n);
Series series_mul(const Series& a, const Series& b, std::size_t n);
// Requires a_0 != 0.
Series series_reciprocal(const Series& a, std::size_t n);
// log a with the constant term fixed to log_a0 (any branch of log a_0).
Series series_log(const Series& a, std::size_t n, cplx log_a0);
Series series_pow(const Series& a, unsigned k, std::size_t n);
// outer(inner(t)) for inner_0 == 0.
Series series_compose(const Series& outer, const Series& inner, std::size_t n);
// Compositional inverse of a with a_0 == 0, a_1 != 0.
Series series_reversion(const Series& a, std::size_t n);
cplx series_eval(const Series& a, cplx t);

}  // namespace exptype
