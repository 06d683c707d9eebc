#pragma once

// Generates the C test bench around a kernel family: a Goto-style blocked
// GEMM driver with packing, a naive reference, the benchmark main program
// and a Makefile with emulated-host and native RISC-V targets.

#include <stdexcept>
#include <string>
#include <vector>

#include "rvvgen/c_emitter.hpp"
#include "rvvgen/kernel_builder.hpp"

namespace rvvgen::harness {

// Relative error threshold the generated bench applies per element, with
// denominator max(1, |reference|).
inline constexpr double kTolerance = 1e-4;

// Seed of the xorshift32 generator filling A, B and C.
inline constexpr unsigned kSeed = 0x2545F491u;

struct BlockingParams {
  int mc = 120;
  int kc = 256;
  int nc = 512;
  int mr = 8;
  int nr = 4;

  void validate() const;
};

struct BenchCase {
  std::string id;
  GemmShape shape;
  int repetitions = 1;
};

// The ten layer shapes S1-S5 (square) and B1-B5 (BERT-Large).
std::vector<BenchCase> default_cases();

// Parses "MxNxK[,MxNxK...]"; ids are c1, c2, ... Throws ConfigError.
std::vector<BenchCase> parse_cases(const std::string& text, int repetitions = 1);

emit::CSourceUnit generate_driver(const BlockingParams& params);
emit::CSourceUnit generate_naive();
emit::CSourceUnit generate_main(const std::vector<BenchCase>& cases);

struct ToolchainOptions {
  int vlen_bits = 256;
  std::string kernel_file;  // ukernels_*.c
  std::string host_cc = "cc";
  std::string native_cc = "riscv64-linux-gnu-gcc";
};

std::string generate_makefile(const ToolchainOptions& options);
std::string generate_run_script();

// Contents of the checked-in runtime headers.
const std::string& rvv_compat_header();
const std::string& rvv_shim_header();

struct GeneratedFile {
  std::string name;
  std::string contents;
  bool executable = false;
};

// Lowering of some kernel reported diagnostics.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Testbench {
  std::vector<GeneratedFile> files;
  std::size_t kernel_count = 0;
};

// Builds, lowers and emits the family of `config`, then the bench around it.
// `params.mr` and `params.nr` are overridden from `config`.
Testbench generate_testbench(const KernelConfig& config, BlockingParams params,
                             const std::vector<BenchCase>& cases);

}  // namespace rvvgen::harness
