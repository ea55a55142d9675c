#include "fuplab/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

#include "fuplab/measure.hpp"

namespace fuplab {

namespace {
int g_max_threads = 0;
int64_t g_budget = -1;
}  // namespace

void set_max_threads(int n) { g_max_threads = n < 0 ? 0 : n; }

int max_threads() {
  if (g_max_threads > 0) return g_max_threads;
  return omp_get_max_threads();
}

int64_t matrix_budget() {
  if (g_budget < 0) {
    g_budget = int64_t(1) << 26;
    if (const char* env = std::getenv("FUP_LAB_BUDGET")) {
      char* end = nullptr;
      long long v = std::strtoll(env, &end, 10);
      if (end != env && v > 0) g_budget = v;
    }
  }
  return g_budget;
}

void set_matrix_budget(int64_t b) { g_budget = b; }

void require_budget(int64_t entries, const char* what) {
  if (entries > matrix_budget())
    throw BudgetError(std::string(what) + ": matrix budget exceeded (" +
                      std::to_string(entries) + " > " +
                      std::to_string(matrix_budget()) + ")");
}

}  // namespace fuplab
