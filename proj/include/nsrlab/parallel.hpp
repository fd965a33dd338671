#pragma once
// Worker-count control and a static-partition parallel loop.
// Each index writes its own output, so results do not depend on the worker count.

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nsr {

int thread_count();
void set_thread_count(int n);

template <class Fn>
void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace nsr
