#include "rvvgen/dialects.hpp"

#include <fmt/format.h>

#include <set>

namespace rvvgen::dialects {

using ir::AttrKind;
using ir::OpSignature;
using ir::Operation;
using ir::TypeKind;
using ir::TypePattern;
using ir::VerifyContext;

namespace {

using Reason = std::optional<std::string>;

const TypePattern kIndex = TypePattern::of({TypeKind::Index});
const TypePattern kF32 = TypePattern::of({TypeKind::F32});
const TypePattern kVec = TypePattern::of({TypeKind::RVVVecF32M1});
// rvv memory operands accept pointers once the memref pass has run.
const TypePattern kBuffer = TypePattern::of({TypeKind::MemRefF32Dyn, TypeKind::EmitCPtr});
const TypePattern kAny = TypePattern::any();

OpSignature sig(std::string dialect, std::string name) {
  OpSignature s;
  s.dialect = std::move(dialect);
  s.name = std::move(name);
  return s;
}

bool same_type(const VerifyContext& ctx, ir::ValueId a, ir::ValueId b) {
  return ctx.module.type(a) == ctx.module.type(b);
}

Reason verify_func(const Operation& op, const VerifyContext& ctx) {
  if (op.regions.size() != 1 || op.regions[0].blocks.size() != 1) return std::nullopt;
  const ir::Block& body = op.regions[0].body();
  std::string expected = function_type_string(ctx.module, body.arguments);
  if (op.str_attr("function_type") != expected)
    return fmt::format("function_type '{}' does not match arguments '{}'",
                       op.str_attr("function_type"), expected);
  if (body.ops.empty() || !body.ops.back().is("func", "return"))
    return "function body must end with func.return";
  return std::nullopt;
}

Reason verify_constant(const Operation& op, const VerifyContext& ctx) {
  const ir::Attribute* value = op.attr("value");
  const ir::Type& t = ctx.module.type(op.results[0]);
  if (t.is(TypeKind::Index) && !std::holds_alternative<std::int64_t>(*value))
    return "index constant requires an integer value";
  if (t.is(TypeKind::F32) && !std::holds_alternative<double>(*value))
    return "f32 constant requires a float value";
  return std::nullopt;
}

Reason verify_scf_for(const Operation& op, const VerifyContext& ctx) {
  std::size_t iter_args = op.operands.size() - 3;
  if (op.results.size() != iter_args)
    return fmt::format("scf.for declares {} iter-args but has {} results", iter_args,
                       op.results.size());
  if (op.regions.size() != 1 || op.regions[0].blocks.size() != 1) return std::nullopt;
  const ir::Block& body = op.regions[0].body();
  if (body.arguments.size() != iter_args + 1)
    return fmt::format("scf.for body has {} arguments, expected {}", body.arguments.size(),
                       iter_args + 1);
  if (!ctx.module.type(body.arguments[0]).is(TypeKind::Index))
    return "scf.for induction variable must be index";
  for (std::size_t i = 0; i < iter_args; ++i) {
    if (!same_type(ctx, body.arguments[i + 1], op.operands[i + 3]) ||
        !same_type(ctx, op.results[i], op.operands[i + 3]))
      return fmt::format("scf.for iter-arg #{} type mismatch", i);
  }
  if (body.ops.empty() || !body.ops.back().is("scf", "yield"))
    return "scf.for body must end with scf.yield";
  const Operation& yield = body.ops.back();
  if (yield.operands.size() != iter_args)
    return fmt::format("scf.for declares {} iter-args but yields {} values", iter_args,
                       yield.operands.size());
  for (std::size_t i = 0; i < iter_args; ++i) {
    if (ctx.module.has_value(yield.operands[i]) && !same_type(ctx, yield.operands[i], op.results[i]))
      return fmt::format("scf.yield operand #{} type differs from iter-arg", i);
  }
  return std::nullopt;
}

Reason verify_vfmacc(const Operation& op, const VerifyContext& ctx) {
  // (vd, memref, offset, vs, avl) -> vd type
  if (!same_type(ctx, op.results[0], op.operands[0]) || !same_type(ctx, op.operands[0], op.operands[3]))
    return "vfmacc requires result, vd and vs to share one type";
  return std::nullopt;
}

Reason verify_assign(const Operation& op, const VerifyContext& ctx) {
  auto it = ctx.producers.find(op.operands[0]);
  if (it == ctx.producers.end() || !it->second->is("emitc", "variable"))
    return "emitc.assign target must be the result of emitc.variable";
  if (!same_type(ctx, op.operands[0], op.operands[1]))
    return "emitc.assign value type differs from variable type";
  return std::nullopt;
}

Reason verify_add(const Operation& op, const VerifyContext& ctx) {
  if (!same_type(ctx, op.results[0], op.operands[0]))
    return "emitc.add result type must equal its first operand type";
  return std::nullopt;
}

Reason verify_emitc_for(const Operation& op, const VerifyContext& ctx) {
  if (op.regions.size() != 1 || op.regions[0].blocks.size() != 1) return std::nullopt;
  const ir::Block& body = op.regions[0].body();
  if (body.arguments.size() != 1 || !ctx.module.type(body.arguments[0]).is(TypeKind::Index))
    return "emitc.for body takes exactly one index induction variable";
  if (!body.ops.empty() && body.ops.back().is("scf", "yield"))
    return "emitc.for body must not end with a yield";
  return std::nullopt;
}

}  // namespace

ir::DialectRegistry register_all() {
  ir::DialectRegistry r;

  // func
  {
    auto s = sig("func", "func");
    s.region_count = 1;
    s.attributes = {{"sym_name", AttrKind::String}, {"function_type", AttrKind::String}};
    s.verifier = verify_func;
    r.add(std::move(s));
  }
  {
    auto s = sig("func", "return");
    s.is_terminator = true;
    r.add(std::move(s));
  }

  // arith
  {
    auto s = sig("arith", "constant");
    s.results = {TypePattern::of({TypeKind::Index, TypeKind::F32})};
    s.attributes = {{"value", AttrKind::IntOrFloat}};
    s.verifier = verify_constant;
    r.add(std::move(s));
  }
  for (const char* name : {"addi", "muli"}) {
    auto s = sig("arith", name);
    s.operands = {kIndex, kIndex};
    s.results = {kIndex};
    r.add(std::move(s));
  }

  // scf
  {
    auto s = sig("scf", "for");
    s.operands = {kIndex, kIndex, kIndex};
    s.variadic_operands = kAny;
    s.variadic_results = kAny;
    s.region_count = 1;
    s.verifier = verify_scf_for;
    r.add(std::move(s));
  }
  {
    auto s = sig("scf", "yield");
    s.variadic_operands = kAny;
    s.is_terminator = true;
    r.add(std::move(s));
  }

  // rvv
  {
    auto s = sig("rvv", "vle32_v_f32m1Op");
    s.operands = {kBuffer, kIndex, kIndex};  // memref, offset, avl
    s.results = {kVec};
    r.add(std::move(s));
  }
  {
    auto s = sig("rvv", "vse32_v_f32m1Op");
    s.operands = {kVec, kBuffer, kIndex, kIndex};  // vec, memref, offset, avl
    r.add(std::move(s));
  }
  {
    auto s = sig("rvv", "vfmacc_vf_f32m1Op");
    s.operands = {kVec, kBuffer, kIndex, kVec, kIndex};  // vd, memref, offset, vs, avl
    s.results = {kVec};
    s.verifier = verify_vfmacc;
    r.add(std::move(s));
  }

  // emitc
  {
    auto s = sig("emitc", "constant");
    s.results = {TypePattern::of({TypeKind::Index, TypeKind::F32})};
    s.attributes = {{"value", AttrKind::IntOrFloat}};
    s.verifier = verify_constant;
    r.add(std::move(s));
  }
  {
    auto s = sig("emitc", "variable");
    s.results = {kAny};
    s.attributes = {{"init", AttrKind::String}};
    r.add(std::move(s));
  }
  {
    auto s = sig("emitc", "assign");
    s.operands = {kAny, kAny};  // target, value
    s.verifier = verify_assign;
    r.add(std::move(s));
  }
  {
    auto s = sig("emitc", "for");
    s.operands = {kIndex, kIndex, kIndex};
    s.region_count = 1;
    s.verifier = verify_emitc_for;
    r.add(std::move(s));
  }
  {
    auto s = sig("emitc", "subscript");
    s.operands = {kBuffer, kIndex};
    s.results = {kF32};
    r.add(std::move(s));
  }
  {
    auto s = sig("emitc", "add");
    s.operands = {TypePattern::of({TypeKind::Index, TypeKind::EmitCPtr}), kIndex};
    s.results = {TypePattern::of({TypeKind::Index, TypeKind::EmitCPtr})};
    s.verifier = verify_add;
    r.add(std::move(s));
  }
  {
    auto s = sig("emitc", "mul");
    s.operands = {kIndex, kIndex};
    s.results = {kIndex};
    r.add(std::move(s));
  }
  {
    auto s = sig("emitc", "call_opaque");
    s.variadic_operands = kAny;
    s.variadic_results = kAny;
    s.max_variadic_results = 1;
    s.attributes = {{"callee", AttrKind::String}};
    r.add(std::move(s));
  }

  return r;
}

const ir::DialectRegistry& builtin_registry() {
  static const ir::DialectRegistry registry = register_all();
  return registry;
}

std::string function_type_string(const ir::Module& module, const std::vector<ir::ValueId>& args) {
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += module.type(args[i]).str();
  }
  return s + ") -> ()";
}

std::vector<std::string> dialect_census(const ir::Module& module) {
  std::set<std::string> seen;
  ir::walk(module, [&](const Operation& op) { seen.insert(op.dialect); });
  return {seen.begin(), seen.end()};
}

}  // namespace rvvgen::dialects
