#include "dwh/parallel.hpp"

#include <cstdlib>
#include <string>

namespace dwh {

std::size_t max_workers() {
    std::size_t cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("DWH_THREADS")) {
        try {
            const long requested = std::stol(env);
            if (requested >= 1) cap = std::min(cap, static_cast<std::size_t>(requested));
        } catch (const std::exception&) {
            // unparsable value: keep the hardware default
        }
    }
    return cap;
}

}  // namespace dwh
