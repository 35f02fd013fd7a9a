#pragma once
// Small dense kernels behind a runtime-dispatched backend: scalar reference
// implementations always exist; an AVX2 variant is selected on CPUs that
// support it (override with set_backend() or the SWQ_SIMD env var, values
// "scalar" / "avx2" / "auto").
//
// Semantics are pinned so backends are interchangeable:
//   - wargmax ties resolve to the LARGEST index in both backends (the policy
//     layer depends on this being exact, not merely close),
//   - dot/sum/axpy may reassociate, so cross-backend comparisons are
//     tolerance-based; within one backend results are deterministic.

#include <cstddef>
#include <string>
#include <utility>

namespace swq::simd {

struct Backend {
    double (*dot)(const double*, const double*, size_t);
    double (*sum)(const double*, size_t);
    void (*axpy)(double, const double*, double*, size_t);  // y += a*x
    std::pair<double, double> (*minmax)(const double*, size_t);
    // index of max(q[i]*s[i]); ties -> largest index; n >= 1
    size_t (*wargmax)(const double*, const double*, size_t);
};

const Backend& active();
std::string active_name();
// name: "auto", "scalar", "avx2".  Throws std::invalid_argument on unknown
// names and std::runtime_error if avx2 is requested but unavailable.
void set_backend(const std::string& name);

inline double dot(const double* a, const double* b, size_t n) { return active().dot(a, b, n); }
inline double sum(const double* a, size_t n) { return active().sum(a, n); }
inline void axpy(double alpha, const double* x, double* y, size_t n) { active().axpy(alpha, x, y, n); }
inline std::pair<double, double> minmax(const double* a, size_t n) { return active().minmax(a, n); }
inline size_t wargmax(const double* q, const double* s, size_t n) { return active().wargmax(q, s, n); }

namespace detail {
extern const Backend scalar_backend;
bool avx2_available();
const Backend* avx2_backend();  // nullptr when not compiled in
}  // namespace detail

}  // namespace swq::simd
