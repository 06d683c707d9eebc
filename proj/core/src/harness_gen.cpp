#include "rvvgen/harness_gen.hpp"

#include <fmt/format.h>

#include <sstream>

#include "rvvgen/dialects.hpp"
#include "rvvgen/lowering.hpp"

namespace rvvgen::harness {

void BlockingParams::validate() const {
  if (mc < 1 || kc < 1 || nc < 1)
    throw ConfigError(fmt::format("blocking mc={} kc={} nc={} must all be >= 1", mc, kc, nc));
  if (mr < 1 || mr > 64 || nr < 1 || nr > 64)
    throw ConfigError(fmt::format("register tile {}x{} out of range", mr, nr));
}

std::vector<BenchCase> default_cases() {
  return {
      {"S1", {1000, 1000, 1000}, 1}, {"S2", {2000, 2000, 2000}, 1},
      {"S3", {3000, 3000, 3000}, 1}, {"S4", {4000, 4000, 4000}, 1},
      {"S5", {5000, 5000, 5000}, 1}, {"B1", {1024, 384, 1024}, 1},
      {"B2", {384, 384, 64}, 1},     {"B3", {64, 384, 384}, 1},
      {"B4", {4096, 384, 1024}, 1},  {"B5", {1024, 384, 4096}, 1},
  };
}

std::vector<BenchCase> parse_cases(const std::string& text, int repetitions) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (!text.empty() && text.back() == ',') throw ConfigError("trailing ',' in case list");
  std::vector<BenchCase> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    GemmShape s;
    char x1 = 0, x2 = 0;
    std::istringstream is(item);
    if (!(is >> s.m >> x1 >> s.n >> x2 >> s.k) || x1 != 'x' || x2 != 'x' || !is.eof())
      throw ConfigError(fmt::format("malformed case '{}', expected MxNxK", item));
    s.validate();
    out.push_back({fmt::format("c{}", out.size() + 1), s, repetitions});
  }
  if (out.empty()) throw ConfigError("no cases given");
  return out;
}

emit::CSourceUnit generate_driver(const BlockingParams& params) {
  params.validate();
  emit::CSourceUnit unit;
  unit.includes = {"#include <assert.h>", "#include <stddef.h>", "#include <stdlib.h>"};
  std::string& t = unit.text;
  for (const auto& inc : unit.includes) t += inc + "\n";

  t += fmt::format(R"(
#define GEMM_MR {mr}
#define GEMM_NR {nr}
#define GEMM_MC {mc}
#define GEMM_KC {kc}
#define GEMM_NC {nc}

typedef void (*ukernel_fn)(size_t, const float*, const float*, float*, size_t);
extern ukernel_fn const ukernels[GEMM_MR][GEMM_NR];

const int gemm_mr = GEMM_MR;
const int gemm_nr = GEMM_NR;

#ifdef GEMM_COUNT_KERNELS
static unsigned long gemm_kernel_calls[GEMM_MR][GEMM_NR];

unsigned long gemm_kernel_call_count(int mr, int nr) {{
  return gemm_kernel_calls[mr - 1][nr - 1];
}}
#endif

static size_t min_size(size_t a, size_t b) {{ return a < b ? a : b; }}

static float* alloc_panel(size_t count) {{
  size_t bytes = (count * sizeof(float) + 63) / 64 * 64;
  float* p = (float*)aligned_alloc(64, bytes);
  assert(p != NULL);
  return p;
}}

/* Bc <- B(0:kc-1, 0:nc-1) as panels of GEMM_NR columns. A panel of width w
 * starting at column jr lives at Bc + jr*kc with element (p, j) at p*w + j. */
static void pack_B(size_t kc, size_t nc, const float* B, size_t ldB, float* Bc) {{
  for (size_t jr = 0; jr < nc; jr += GEMM_NR) {{
    size_t w = min_size(GEMM_NR, nc - jr);
    float* panel = Bc + jr * kc;
    for (size_t p = 0; p < kc; ++p)
      for (size_t j = 0; j < w; ++j) panel[p * w + j] = B[p + (jr + j) * ldB];
  }}
}}

/* Ac <- A(0:mc-1, 0:kc-1) as panels of GEMM_MR rows. A panel of height h
 * starting at row ir lives at Ac + ir*kc with element (i, p) at p*h + i. */
static void pack_A(size_t mc, size_t kc, const float* A, size_t ldA, float* Ac) {{
  for (size_t ir = 0; ir < mc; ir += GEMM_MR) {{
    size_t h = min_size(GEMM_MR, mc - ir);
    float* panel = Ac + ir * kc;
    for (size_t p = 0; p < kc; ++p)
      for (size_t i = 0; i < h; ++i) panel[p * h + i] = A[(ir + i) + p * ldA];
  }}
}}

/* C += A * B, all column-major. Edge tiles call the exact-size kernel. */
void gemm_blocked(size_t m, size_t n, size_t k, const float* A, size_t ldA, const float* B,
                  size_t ldB, float* C, size_t ldC) {{
  assert(ldA >= m && ldB >= k && ldC >= m);
  if (m == 0 || n == 0 || k == 0) return;

  float* Ac = alloc_panel((size_t)GEMM_MC * GEMM_KC);
  float* Bc = alloc_panel((size_t)GEMM_KC * GEMM_NC);

  for (size_t jc = 0; jc < n; jc += GEMM_NC) {{ /* L1 */
    size_t nc = min_size(GEMM_NC, n - jc);
    for (size_t pc = 0; pc < k; pc += GEMM_KC) {{ /* L2 */
      size_t kc = min_size(GEMM_KC, k - pc);
      pack_B(kc, nc, B + pc + jc * ldB, ldB, Bc);
      for (size_t ic = 0; ic < m; ic += GEMM_MC) {{ /* L3 */
        size_t mc = min_size(GEMM_MC, m - ic);
        pack_A(mc, kc, A + ic + pc * ldA, ldA, Ac);
        for (size_t jr = 0; jr < nc; jr += GEMM_NR) {{ /* L4 */
          size_t nr = min_size(GEMM_NR, nc - jr);
          for (size_t ir = 0; ir < mc; ir += GEMM_MR) {{ /* L5 */
            size_t mr = min_size(GEMM_MR, mc - ir);
            float* Cr = C + (ic + ir) + (jc + jr) * ldC;
            const float* a = Ac + ir * kc;
            const float* b = Bc + jr * kc;
#ifdef GEMM_COUNT_KERNELS
            ++gemm_kernel_calls[mr - 1][nr - 1];
#endif
            if (mr == GEMM_MR && nr == GEMM_NR)
              ukernels[{mr_idx}][{nr_idx}](kc, a, b, Cr, ldC);
            else
              ukernels[mr - 1][nr - 1](kc, a, b, Cr, ldC);
          }}
        }}
      }}
    }}
  }}

  free(Ac);
  free(Bc);
}}
)",
                   fmt::arg("mr", params.mr), fmt::arg("nr", params.nr), fmt::arg("mc", params.mc),
                   fmt::arg("kc", params.kc), fmt::arg("nc", params.nc),
                   fmt::arg("mr_idx", params.mr - 1), fmt::arg("nr_idx", params.nr - 1));
  unit.functions.push_back("gemm_blocked");
  return unit;
}

emit::CSourceUnit generate_naive() {
  emit::CSourceUnit unit;
  unit.includes = {"#include <stddef.h>"};
  unit.text = R"(#include <stddef.h>

/* Reference C += A * B, column-major. Each C element accumulates its k
 * products in ascending order with a separate multiply and add. */
void naive_gemm(size_t m, size_t n, size_t k, const float* A, size_t ldA, const float* B,
                size_t ldB, float* C, size_t ldC) {
  for (size_t j = 0; j < n; ++j) {
    for (size_t p = 0; p < k; ++p) {
      float b = B[p + j * ldB];
      for (size_t i = 0; i < m; ++i) {
        float prod = A[i + p * ldA] * b;
        C[i + j * ldC] = C[i + j * ldC] + prod;
      }
    }
  }
}
)";
  unit.functions.push_back("naive_gemm");
  return unit;
}

emit::CSourceUnit generate_main(const std::vector<BenchCase>& cases) {
  emit::CSourceUnit unit;
  unit.includes = {"#include <stddef.h>", "#include <stdint.h>", "#include <stdio.h>",
                   "#include <stdlib.h>", "#include <string.h>", "#include <time.h>"};
  std::string& t = unit.text;
  for (const auto& inc : unit.includes) t += inc + "\n";

  std::string table;
  for (const auto& c : cases) {
    c.shape.validate();
    table += fmt::format("    {{\"{}\", {}, {}, {}, {}}},\n", c.id, c.shape.m, c.shape.n,
                         c.shape.k, c.repetitions);
  }

  t += fmt::format(R"(
#define BENCH_TOLERANCE {tol}
#define BENCH_SEED 0x{seed:08X}u

void gemm_blocked(size_t m, size_t n, size_t k, const float* A, size_t ldA, const float* B,
                  size_t ldB, float* C, size_t ldC);
void naive_gemm(size_t m, size_t n, size_t k, const float* A, size_t ldA, const float* B,
                size_t ldB, float* C, size_t ldC);

extern const int gemm_mr;
extern const int gemm_nr;

#ifdef GEMM_COUNT_KERNELS
unsigned long gemm_kernel_call_count(int mr, int nr);
#endif

typedef struct {{
  const char* id;
  size_t m, n, k;
  int repetitions;
}} bench_case;

static const bench_case cases[] = {{
{table}}};
static const size_t num_cases = sizeof cases / sizeof cases[0];

static uint32_t rng_state;

static uint32_t xorshift32(void) {{
  uint32_t x = rng_state;
  x ^= x << 13;
  x ^= x >> 17;
  x ^= x << 5;
  rng_state = x;
  return x;
}}

/* Uniform in [-1, 1]. */
static float next_value(void) {{
  return (float)((double)xorshift32() / 4294967295.0 * 2.0 - 1.0);
}}

static float* alloc_matrix(size_t count) {{
  float* p = (float*)malloc((count ? count : 1) * sizeof(float));
  if (p == NULL) {{
    fprintf(stderr, "out of memory\n");
    exit(1);
  }}
  return p;
}}

static double now_seconds(void) {{
  struct timespec ts;
  timespec_get(&ts, TIME_UTC);
  return (double)ts.tv_sec + (double)ts.tv_nsec * 1e-9;
}}

static double max_relative_error(const float* got, const float* want, size_t count) {{
  double worst = 0.0;
  for (size_t i = 0; i < count; ++i) {{
    double ref = want[i];
    double denom = ref < 0 ? -ref : ref;
    double diff = (double)got[i] - ref;
    if (diff < 0) diff = -diff;
    if (denom < 1.0) denom = 1.0;
    double e = diff / denom;
    if (e != e) return 1e30;
    if (e > worst) worst = e;
  }}
  return worst;
}}

static int run_case(const bench_case* c) {{
  size_t m = c->m, n = c->n, k = c->k;
  float* A = alloc_matrix(m * k);
  float* B = alloc_matrix(k * n);
  float* C = alloc_matrix(m * n);
  float* ref = alloc_matrix(m * n);

  rng_state = BENCH_SEED;
  for (size_t i = 0; i < m * k; ++i) A[i] = next_value();
  for (size_t i = 0; i < k * n; ++i) B[i] = next_value();
  for (size_t i = 0; i < m * n; ++i) C[i] = next_value();
  memcpy(ref, C, m * n * sizeof(float));

  gemm_blocked(m, n, k, A, m, B, k, C, m);
  naive_gemm(m, n, k, A, m, B, k, ref, m);
  double err = max_relative_error(C, ref, m * n);
  int pass = err <= BENCH_TOLERANCE;

  double start = now_seconds();
  for (int r = 0; r < c->repetitions; ++r) gemm_blocked(m, n, k, A, m, B, k, C, m);
  double elapsed = now_seconds() - start;
  double flops = 2.0 * (double)m * (double)n * (double)k * (double)c->repetitions;
  double gflops = elapsed > 0 ? flops / elapsed * 1e-9 : 0.0;

  printf("%s,%zu,%zu,%zu,%d,%d,%.3f,%.9g,%s\n", c->id, m, n, k, gemm_mr, gemm_nr, gflops, err,
         pass ? "PASS" : "FAIL");
  fflush(stdout);

  free(A);
  free(B);
  free(C);
  free(ref);
  return pass;
}}

/* Usage: bench [ID...]  runs every case, or only the listed ids. */
int main(int argc, char** argv) {{
  int failures = 0;
  for (int a = 1; a < argc; ++a) {{
    int known = 0;
    for (size_t i = 0; i < num_cases; ++i) known |= strcmp(argv[a], cases[i].id) == 0;
    if (!known) {{
      fprintf(stderr, "unknown case id '%s'\n", argv[a]);
      return 2;
    }}
  }}

  printf("id,m,n,k,mr,nr,gflops,max_rel_err,status\n");
  for (size_t i = 0; i < num_cases; ++i) {{
    int selected = argc == 1;
    for (int a = 1; a < argc; ++a) selected |= strcmp(argv[a], cases[i].id) == 0;
    if (selected && !run_case(&cases[i])) ++failures;
  }}

#ifdef GEMM_COUNT_KERNELS
  {{
    int used = 0;
    for (int i = 1; i <= gemm_mr; ++i)
      for (int j = 1; j <= gemm_nr; ++j) used += gemm_kernel_call_count(i, j) != 0;
    fprintf(stderr, "kernels_used=%d/%d\n", used, gemm_mr * gemm_nr);
    for (int i = 1; i <= gemm_mr; ++i)
      for (int j = 1; j <= gemm_nr; ++j)
        fprintf(stderr, "kernel_calls %dx%d %lu\n", i, j, gemm_kernel_call_count(i, j));
  }}
#endif
  return failures ? 1 : 0;
}}
)",
                   fmt::arg("tol", "1e-4"), fmt::arg("seed", kSeed), fmt::arg("table", table));
  unit.functions.push_back("main");
  return unit;
}

std::string generate_makefile(const ToolchainOptions& o) {
  return fmt::format(R"(# Generated by rvvgen.
#   make host       emulated build for the build machine (bench)
#   make native     RVV build for a RISC-V target (bench_native)
#   make run-host   build and run the emulated bench

CC ?= {host_cc}
RISCV_CC ?= {native_cc}
VLEN_BITS = {vlen}

COMMON_CFLAGS = -std=c11 -Wall -Wextra
HOST_CFLAGS = $(COMMON_CFLAGS) -O2 -DRVV_EMULATE -DVLEN_BITS={vlen} -ffp-contract=off $(EXTRA_CFLAGS)
NATIVE_CFLAGS = $(COMMON_CFLAGS) -O3 -march=rv64gcv -mabi=lp64d $(EXTRA_CFLAGS)

SRCS = {kernels} gemm_driver.c naive_ref.c bench_main.c

.PHONY: all host native run-host clean

all: host

host: bench

bench: $(SRCS) rvv_compat.h rvv_shim.h
	$(CC) $(HOST_CFLAGS) -o $@ $(SRCS)

native: bench_native

bench_native: $(SRCS) rvv_compat.h
	$(RISCV_CC) $(NATIVE_CFLAGS) -o $@ $(SRCS)

run-host: host
	./bench

clean:
	rm -f bench bench_native
)",
                     fmt::arg("host_cc", o.host_cc), fmt::arg("native_cc", o.native_cc),
                     fmt::arg("vlen", o.vlen_bits), fmt::arg("kernels", o.kernel_file));
}

std::string generate_run_script() {
  return R"sh(#!/bin/sh
# Builds the emulated bench and runs it; arguments select case ids.
set -e
cd "$(dirname "$0")"
make host
./bench "$@"
)sh";
}

Testbench generate_testbench(const KernelConfig& config, BlockingParams params,
                             const std::vector<BenchCase>& cases) {
  params.mr = config.mr;
  params.nr = config.nr;
  params.validate();

  auto family = build_family(config);
  std::vector<std::pair<KernelConfig, ir::Module>> lowered;
  lowered.reserve(family.size());
  for (auto& [cfg, module] : family) {
    ir::PassResult r = lowering::run_pipeline(std::move(module));
    if (!r.ok())
      throw PipelineError(fmt::format("lowering {} failed: {}", cfg.kernel_name(),
                                      r.diagnostics.front().str()));
    lowered.emplace_back(cfg, std::move(r.module));
  }

  Testbench tb;
  tb.kernel_count = lowered.size();
  std::string kernel_file = emit::kernel_set_filename(config);
  tb.files.push_back({kernel_file, emit::emit_kernel_set(lowered).text});
  tb.files.push_back({"gemm_driver.c", generate_driver(params).text});
  tb.files.push_back({"naive_ref.c", generate_naive().text});
  tb.files.push_back({"bench_main.c", generate_main(cases).text});
  tb.files.push_back({"rvv_compat.h", rvv_compat_header()});
  tb.files.push_back({"rvv_shim.h", rvv_shim_header()});
  ToolchainOptions tc;
  tc.vlen_bits = config.vlen_bits;
  tc.kernel_file = kernel_file;
  tb.files.push_back({"Makefile", generate_makefile(tc)});
  tb.files.push_back({"run_host.sh", generate_run_script(), true});
  return tb;
}

}  // namespace rvvgen::harness
