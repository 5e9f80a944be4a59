#include <atomic>
#include <cstdlib>
#include <string>

#include "wavegraph/error.hpp"
#include "wavegraph/kernels.hpp"

namespace wavegraph::kernels {
namespace {

const KernelTable* pick_default() {
  if (const char* env = std::getenv("WAVEGRAPH_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar::table();
    if (want == "avx2" && cpu_has_avx2()) return avx2::table();
  }
  if (cpu_has_avx2()) return avx2::table();
  return &scalar::table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{pick_default()};
  return current;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return avx2::table() != nullptr && __builtin_cpu_supports("avx2") &&
         __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void select(Isa isa) {
  if (isa == Isa::scalar) {
    slot().store(&scalar::table());
    return;
  }
  if (!cpu_has_avx2()) throw InvalidInput("AVX2 kernels are not available on this CPU");
  slot().store(avx2::table());
}

std::string_view name(Isa isa) { return isa == Isa::scalar ? "scalar" : "avx2"; }

}  // namespace wavegraph::kernels
