#include "retrorank/numcore/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "retrorank/numcore/errors.hpp"

namespace retrorank::kernels {

const KernelTable* avx2_table_compiled();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const char* env = std::getenv("RETRORANK_SIMD");
  std::string_view want = env ? env : "auto";
  if (want == "scalar") return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_table() {
  static const KernelTable* table = cpu_has_avx2() ? avx2_table_compiled() : nullptr;
  return table;
}

bool available(Isa isa) { return isa == Isa::Scalar || avx2_table() != nullptr; }

const KernelTable& active() { return *active_slot().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

void select(Isa isa) {
  if (isa == Isa::Scalar) {
    active_slot().store(&scalar_table());
    return;
  }
  const KernelTable* t = avx2_table();
  if (!t) throw Error("AVX2 kernels are not available on this CPU/build");
  active_slot().store(t);
}

}  // namespace retrorank::kernels
