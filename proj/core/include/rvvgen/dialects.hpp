#pragma once

// Operation signatures for the func, arith, scf, rvv and emitc dialects.
// memref exists only as a type (memref<-1xf32>), so it registers no ops.

#include <string>
#include <vector>

#include "rvvgen/ir.hpp"

namespace rvvgen::dialects {

// Opaque C spelling of one m1 vector register of f32.
inline constexpr const char* kVectorCType = "vfloat32m1_t";

ir::DialectRegistry register_all();

// Process-wide immutable registry built from register_all().
const ir::DialectRegistry& builtin_registry();

inline std::vector<ir::Diagnostic> verify(const ir::Module& module) {
  return ir::verify(module, builtin_registry());
}

// "(index, memref<-1xf32>, ...) -> ()" for the given argument list.
std::string function_type_string(const ir::Module& module, const std::vector<ir::ValueId>& args);

// Every dialect namespace used by at least one op in `module`.
std::vector<std::string> dialect_census(const ir::Module& module);

}  // namespace rvvgen::dialects
