#include "canlift/parallel.hpp"

#include <atomic>
#include <thread>

namespace canlift {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int hardware_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int effective_threads() {
    int n = g_threads.load();
    return n == 0 ? hardware_threads() : n;
}

} // namespace canlift
