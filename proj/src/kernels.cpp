#include "ptrhash/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ptrhash::kernels {

const Ops& active_ops() {
    static const Ops& selected = []() -> const Ops& {
        const char* env = std::getenv("PTRHASH_KERNELS");
        if (env && std::strcmp(env, "scalar") == 0) return scalar_ops();
#if defined(__x86_64__)
        if (cpu_has_avx2() && (!env || std::strcmp(env, "avx2") == 0)) return avx2_ops();
#endif
        return scalar_ops();
    }();
    return selected;
}

}  // namespace ptrhash::kernels
