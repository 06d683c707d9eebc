/* Test-side checker linked against a generated gemm_driver.c and kernel set.
 *
 *   probe rand|zero M N K [M N K ...]
 *
 * For each shape prints
 *   shape M N K max_rel_err mismatches
 * where max_rel_err compares against a double-precision reference
 * (denominator max(1, |ref|)) and mismatches counts elements that differ
 * bitwise from a float reference accumulating in k order with separate
 * multiply and add. Then prints one "calls MR NR COUNT" line per kernel
 * when built with -DGEMM_COUNT_KERNELS. */

#include <math.h>
#include <stddef.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void gemm_blocked(size_t m, size_t n, size_t k, const float* A, size_t ldA, const float* B,
                  size_t ldB, float* C, size_t ldC);
extern const int gemm_mr;
extern const int gemm_nr;
#ifdef GEMM_COUNT_KERNELS
unsigned long gemm_kernel_call_count(int mr, int nr);
#endif

static uint64_t state = 0x9E3779B97F4A7C15ull;

static float next_value(void) {
  state ^= state << 13;
  state ^= state >> 7;
  state ^= state << 17;
  return (float)((double)(state >> 11) / 9007199254740992.0 * 2.0 - 1.0);
}

static int check(size_t m, size_t n, size_t k, int zero) {
  float* A = malloc(m * k * sizeof(float));
  float* B = malloc(k * n * sizeof(float));
  float* C = malloc(m * n * sizeof(float));
  float* C0 = malloc(m * n * sizeof(float));
  if (!A || !B || !C || !C0) return 1;
  for (size_t i = 0; i < m * k; ++i) A[i] = zero ? 0.0f : next_value();
  for (size_t i = 0; i < k * n; ++i) B[i] = zero ? 0.0f : next_value();
  for (size_t i = 0; i < m * n; ++i) C[i] = zero ? 0.0f : next_value();
  memcpy(C0, C, m * n * sizeof(float));

  gemm_blocked(m, n, k, A, m, B, k, C, m);

  double max_err = 0.0;
  size_t mismatches = 0;
  for (size_t j = 0; j < n; ++j) {
    for (size_t i = 0; i < m; ++i) {
      float f = C0[i + j * m];
      double d = C0[i + j * m];
      for (size_t p = 0; p < k; ++p) {
        float prod = A[i + p * m] * B[p + j * k];
        f = f + prod;
        d += (double)A[i + p * m] * (double)B[p + j * k];
      }
      float got = C[i + j * m];
      double denom = fabs(d) > 1.0 ? fabs(d) : 1.0;
      double err = fabs((double)got - d) / denom;
      if (!(err <= max_err)) max_err = err;
      if (memcmp(&got, &f, sizeof f) != 0) ++mismatches;
    }
  }
  printf("shape %zu %zu %zu %.9g %zu\n", m, n, k, max_err, mismatches);
  free(A);
  free(B);
  free(C);
  free(C0);
  return 0;
}

int main(int argc, char** argv) {
  if (argc < 5 || (argc - 2) % 3 != 0) {
    fprintf(stderr, "usage: probe rand|zero M N K [M N K ...]\n");
    return 2;
  }
  int zero = strcmp(argv[1], "zero") == 0;
  for (int a = 2; a < argc; a += 3) {
    if (check((size_t)atol(argv[a]), (size_t)atol(argv[a + 1]), (size_t)atol(argv[a + 2]), zero))
      return 1;
  }
#ifdef GEMM_COUNT_KERNELS
  for (int i = 1; i <= gemm_mr; ++i)
    for (int j = 1; j <= gemm_nr; ++j)
      printf("calls %d %d %lu\n", i, j, gemm_kernel_call_count(i, j));
#endif
  return 0;
}
