#include "focal/parallel.hpp"

#include <cstdlib>
#include <string>

namespace focal {

std::size_t thread_count() {
    if (const char* env = std::getenv("FOCAL_CALIB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
}

}  // namespace focal
