#include "kernels_impl.hpp"

#include <cstdlib>
#include <string_view>

namespace fadefuse::kernels {

namespace {

constexpr KernelTable kScalar{
    "scalar",
    detail::information_sum_scalar,
    detail::equal_power_information_sum_scalar,
    detail::merits_scalar,
    detail::transmit_power_sum_scalar,
    detail::sandwich_sums_scalar,
};

#if defined(FADEFUSE_HAVE_AVX2)
constexpr KernelTable kVector{
    "avx2",
    detail::information_sum_avx2,
    detail::equal_power_information_sum_avx2,
    detail::merits_avx2,
    detail::transmit_power_sum_avx2,
    detail::sandwich_sums_avx2,
};

bool cpu_has_vector() noexcept {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#elif defined(FADEFUSE_HAVE_NEON)
constexpr KernelTable kVector{
    "neon",
    detail::information_sum_neon,
    detail::equal_power_information_sum_neon,
    detail::merits_neon,
    detail::transmit_power_sum_neon,
    detail::sandwich_sums_neon,
};

bool cpu_has_vector() noexcept { return true; }
#endif

const KernelTable& select() noexcept {
    if (const char* forced = std::getenv("FADEFUSE_KERNELS"); forced && std::string_view(forced) == "scalar") {
        return kScalar;
    }
    if (const KernelTable* v = vector_table()) return *v;
    return kScalar;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* vector_table() noexcept {
#if defined(FADEFUSE_HAVE_AVX2) || defined(FADEFUSE_HAVE_NEON)
    static const bool supported = cpu_has_vector();
    return supported ? &kVector : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

}  // namespace fadefuse::kernels
