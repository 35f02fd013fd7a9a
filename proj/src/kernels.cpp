#include "swq/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace swq::simd {

namespace detail {
bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

#if !SWQ_HAVE_AVX2_TU
const Backend* avx2_backend() { return nullptr; }
#endif
}  // namespace detail

namespace {

struct Dispatch {
    const Backend* backend;
    std::string name;

    Dispatch() { select("auto"); }

    void select(const std::string& req) {
        std::string want = req;
        if (want == "auto") {
            const char* env = std::getenv("SWQ_SIMD");
            if (env && *env) want = env;
        }
        if (want == "auto") {
            const Backend* a = detail::avx2_available() ? detail::avx2_backend() : nullptr;
            backend = a ? a : &detail::scalar_backend;
            name = a ? "avx2" : "scalar";
        } else if (want == "scalar") {
            backend = &detail::scalar_backend;
            name = "scalar";
        } else if (want == "avx2") {
            const Backend* a = detail::avx2_available() ? detail::avx2_backend() : nullptr;
            if (!a) throw std::runtime_error("avx2 backend unavailable on this CPU/build");
            backend = a;
            name = "avx2";
        } else {
            throw std::invalid_argument("unknown simd backend: " + want);
        }
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

const Backend& active() { return *dispatch().backend; }
std::string active_name() { return dispatch().name; }
void set_backend(const std::string& name) { dispatch().select(name); }

}  // namespace swq::simd
