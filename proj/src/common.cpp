#include "eiso/common.hpp"

#include <charconv>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eiso {

int resolve_threads(int requested) {
#ifdef _OPENMP
    if (requested <= 0) return omp_get_max_threads();
    return requested;
#else
    (void)requested;
    return 1;
#endif
}

std::string format_float(double value) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

}  // namespace eiso
