#include "swq/kernels.hpp"

namespace swq::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* a, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::pair<double, double> minmax_scalar(const double* a, size_t n) {
    double lo = a[0], hi = a[0];
    for (size_t i = 1; i < n; ++i) {
        if (a[i] < lo) lo = a[i];
        if (a[i] > hi) hi = a[i];
    }
    return {lo, hi};
}

size_t wargmax_scalar(const double* q, const double* s, size_t n) {
    size_t best = 0;
    double best_v = q[0] * s[0];
    for (size_t i = 1; i < n; ++i) {
        double v = q[i] * s[i];
        if (v >= best_v) {  // >= so ties go to the largest index
            best_v = v;
            best = i;
        }
    }
    return best;
}

}  // namespace

const Backend scalar_backend = {dot_scalar, sum_scalar, axpy_scalar, minmax_scalar,
                                wargmax_scalar};

}  // namespace swq::simd::detail
