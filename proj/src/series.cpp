#include "exptype/series.hpp"

#include <algorithm>

#include "exptype/error.hpp"

namespace exptype {

Series series_truncate(Series a, std::size_t n) {
    a.resize(n, 0.0);
    return a;
}

Series series_add(const Series& a, const Series& b, std::size_t n) {
    Series out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k < a.size()) out[k] += a[k];
        if (k < b.size()) out[k] += b[k];
    }
    return out;
}

Series series_mul(const Series& a, const Series& b, std::size_t n) {
    Series out(n, 0.0);
    const std::size_t na = std::min(a.size(), n);
    for (std::size_t i = 0; i < na; ++i) {
        if (a[i] == 0.0) continue;
        const std::size_t nb = std::min(b.size(), n - i);
        for (std::size_t j = 0; j < nb; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Series series_reciprocal(const Series& a, std::size_t n) {
    if (a.empty() || a[0] == 0.0)
        throw_domain("series.zero_constant", "reciprocal of a series with zero constant term");
    Series out(n, 0.0);
    if (n == 0) return out;
    out[0] = 1.0 / a[0];
    for (std::size_t k = 1; k < n; ++k) {
        cplx s = 0.0;
        for (std::size_t j = 1; j <= k && j < a.size(); ++j) s += a[j] * out[k - j];
        out[k] = -s * out[0];
    }
    return out;
}

Series series_log(const Series& a, std::size_t n, cplx log_a0) {
    if (a.empty() || a[0] == 0.0)
        throw_domain("series.zero_constant", "logarithm of a series with zero constant term");
    Series out(n, 0.0);
    if (n == 0) return out;
    out[0] = log_a0;
    // a * (log a)' = a'  =>  k a_0 g_k = k a_k - sum_{j=1}^{k-1} j g_j a_{k-j}
    for (std::size_t k = 1; k < n; ++k) {
        cplx s = k < a.size() ? static_cast<double>(k) * a[k] : 0.0;
        for (std::size_t j = 1; j < k; ++j)
            if (k - j < a.size()) s -= static_cast<double>(j) * out[j] * a[k - j];
        out[k] = s / (static_cast<double>(k) * a[0]);
    }
    return out;
}

Series series_pow(const Series& a, unsigned k, std::size_t n) {
    Series result(n, 0.0);
    if (n == 0) return result;
    result[0] = 1.0;
    Series base = series_truncate(a, n);
    while (k > 0) {
        if (k & 1u) result = series_mul(result, base, n);
        k >>= 1u;
        if (k > 0) base = series_mul(base, base, n);
    }
    return result;
}

Series series_compose(const Series& outer, const Series& inner, std::size_t n) {
    if (!inner.empty() && inner[0] != 0.0)
        throw_domain("series.nonzero_constant", "composition needs inner series with zero constant term");
    Series out(n, 0.0);
    if (n == 0) return out;
    // Horner in the series ring.
    for (std::size_t k = std::min(outer.size(), n); k-- > 0;) {
        out = series_mul(out, inner, n);
        out[0] += outer[k];
    }
    return out;
}

Series series_reversion(const Series& a, std::size_t n) {
    if (a.size() < 2 || a[0] != 0.0 || a[1] == 0.0)
        throw_domain("series.not_invertible", "reversion needs a_0 = 0 and a_1 != 0");
    Series b(n, 0.0);
    if (n < 2) return b;
    b[1] = 1.0 / a[1];
    // Fix coefficients one at a time: a(b(t)) must equal t up to order k.
    for (std::size_t k = 2; k < n; ++k) {
        const Series c = series_compose(a, b, k + 1);
        b[k] = -c[k] / a[1];
    }
    return b;
}

cplx series_eval(const Series& a, cplx t) {
    cplx acc = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * t + *it;
    return acc;
}

}  // namespace exptype
