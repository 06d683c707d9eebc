#pragma once

// Builds GEMM micro-kernels in the mixed func/arith/scf/rvv dialects.
//
// A kernel ukernel_{mr}x{nr}_f32(kc, Ac, Bc, C, ldC) computes
// C[0:mr, 0:nr] += Ac * Bc over kc rank-1 updates, where
//   Ac[k*mr + i]   is A(i, k) of the packed mr-row micro-panel,
//   Bc[k*nr + j]   is B(k, j) of the packed nr-column micro-panel,
//   C[i + j*ldC]   is the column-major output tile.

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rvvgen/ir.hpp"

namespace rvvgen {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DType { F32, F16, F64 };

// Throws ConfigError for unknown spellings.
DType parse_dtype(std::string_view text);
std::string_view dtype_name(DType dtype);

struct KernelConfig {
  int mr = 8;
  int nr = 4;
  DType dtype = DType::F32;
  int vlen_bits = 256;

  // Checks 1 <= mr, nr <= 64 and vlen_bits in {128, 256, 512}.
  void validate() const;
  std::string kernel_name() const;

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

// C(m x n) += A(m x k) * B(k x n); every dimension >= 1.
struct GemmShape {
  int m = 1;
  int n = 1;
  int k = 1;

  void validate() const;
  friend bool operator==(const GemmShape&, const GemmShape&) = default;
};

struct RegisterPlan {
  int elems_per_vreg = 0;
  int num_a_regs = 0;
  std::vector<int> vl;  // active lanes of each A register; sums to mr
  int num_acc_regs = 0;
  int fmas_per_iter = 0;
};

RegisterPlan plan_registers(const KernelConfig& config);

ir::Module build_microkernel(const KernelConfig& config);

// Every kernel from 1x1 to mr x nr, ordered by mr then nr.
std::vector<std::pair<KernelConfig, ir::Module>> build_family(const KernelConfig& config);

}  // namespace rvvgen
