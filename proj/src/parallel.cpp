#include "nsrlab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace nsr {

namespace {
std::atomic<int> g_threads{0};

int default_threads() {
    if (const char* env = std::getenv("LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}
}  // namespace

int thread_count() {
    int n = g_threads.load();
    if (n <= 0) {
        n = default_threads();
        g_threads.store(n);
    }
    return n;
}

void set_thread_count(int n) {
    if (n < 1) throw std::invalid_argument("thread count must be >= 1");
    g_threads.store(n);
}

}  // namespace nsr
