#include "braintune/kernels.hpp"

#include <cstdlib>
#include <string>

namespace braintune::kernels {

#if !defined(BRAINTUNE_WITH_AVX2)
const Backend* avx2() { return nullptr; }
#endif

namespace {

const Backend* pick_default() {
    if (const char* env = std::getenv("BRAINTUNE_KERNELS")) {
        std::string want(env);
        if (want == "scalar") return &scalar();
        if (want == "avx2" && avx2() != nullptr) return avx2();
        // unknown or unavailable value falls through to auto selection
    }
    if (const Backend* v = avx2()) return v;
    return &scalar();
}

const Backend*& current() {
    static const Backend* selected = pick_default();
    return selected;
}

} // namespace

const Backend& active() { return *current(); }

bool select(std::string_view name) {
    if (name == "scalar") {
        current() = &scalar();
        return true;
    }
    if (name == "avx2") {
        if (const Backend* v = avx2()) {
            current() = v;
            return true;
        }
        return false;
    }
    if (name == "auto") {
        current() = avx2() != nullptr ? avx2() : &scalar();
        return true;
    }
    return false;
}

} // namespace braintune::kernels
