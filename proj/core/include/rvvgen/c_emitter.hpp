#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rvvgen/ir.hpp"
#include "rvvgen/kernel_builder.hpp"

namespace rvvgen::emit {

// The module contains something the C translation does not cover; this is
// always a lowering bug.
class EmitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CSourceUnit {
  std::vector<std::string> includes;   // include lines, in order
  std::vector<std::string> functions;  // one definition each
  std::string text;                    // complete file contents
};

struct EmitOptions {
  bool include_prologue = true;
  // Pointer parameters never used as a store base are emitted `const float*`.
  bool const_readonly_pointers = true;
  std::vector<std::string> store_callees = {"__riscv_vse32_v_f32m1"};
};

// Translates a func + emitc module into C11 source, one statement per op.
CSourceUnit emit_c(const ir::Module& module, const EmitOptions& options = {});

// One translation unit with every lowered kernel of a family and the
// dispatch table `ukernels[mr][nr]` indexed by (mr' - 1, nr' - 1).
CSourceUnit emit_kernel_set(const std::vector<std::pair<KernelConfig, ir::Module>>& lowered);

// `ukernels_{mr}x{nr}_vlen{V}.c`
std::string kernel_set_filename(const KernelConfig& config);

}  // namespace rvvgen::emit
