#include "umbra/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace umbra::kernels {
namespace {

const KernelSet& pick() {
    const char* force = std::getenv("UMBRA_KERNELS");
    if (force) {
        if (std::strcmp(force, "scalar") == 0) return scalar_set();
        if (std::strcmp(force, "avx2") == 0 && avx2_set()) return *avx2_set();
        // Unknown or unsupported request falls through to auto-detection.
    }
    if (const KernelSet* v = avx2_set()) return *v;
    return scalar_set();
}

}  // namespace

const KernelSet& active() {
    static const KernelSet& chosen = pick();
    return chosen;
}

std::string_view active_name() { return active().name; }

}  // namespace umbra::kernels
