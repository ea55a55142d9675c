#pragma once

#include <cstdint>

namespace fuplab {

/// Global worker cap shared by all OpenMP kernels. 0 = machine default.
/// Per-element outputs are written by index, so results are identical for
/// every thread count.
void set_max_threads(int n);
int max_threads();

/// Matrix-entry budget (complex entries). Reads FUP_LAB_BUDGET once.
int64_t matrix_budget();
void set_matrix_budget(int64_t b);

void require_budget(int64_t entries, const char* what);

}  // namespace fuplab
