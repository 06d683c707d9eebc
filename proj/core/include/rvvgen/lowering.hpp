#pragma once

// Lowers a built micro-kernel module to func + emitc, one dialect per pass:
// memref -> arith -> scf -> rvv.

#include "rvvgen/ir.hpp"
#include "rvvgen/rewrite.hpp"

namespace rvvgen::lowering {

// Retypes memref<-1xf32> function parameters as !emitc.ptr<f32>.
ir::PassResult pass_memref_to_emitc(ir::Module module);

// arith.constant/addi/muli -> emitc.constant/add/mul.
ir::PassResult pass_arith_to_emitc(ir::Module module);

// scf.for with iter-args -> emitc.variable + emitc.for + emitc.assign.
ir::PassResult pass_scf_to_emitc(ir::Module module);

// rvv ops -> emitc.call_opaque on the RVV C intrinsics; vector values become
// !emitc.opaque<"vfloat32m1_t">.
ir::PassResult pass_rvv_to_emitc(ir::Module module);

// Runs the four passes in order, verifying after each. Stops at the first
// pass that reports diagnostics. PatternError propagates.
ir::PassResult run_pipeline(ir::Module module);

ir::PatternList arith_patterns();
ir::PatternList scf_patterns();
ir::PatternList rvv_patterns();

// Retypes every remaining !rvv.vfloat32m1 value as the opaque C vector type.
// Returns the number of values retyped.
std::size_t retype_vectors(ir::Module& module);

}  // namespace rvvgen::lowering
