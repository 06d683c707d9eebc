#include "rvvgen/lowering.hpp"

#include <fmt/format.h>

#include <set>

#include "rvvgen/dialects.hpp"

namespace rvvgen::lowering {

using ir::Module;
using ir::Operation;
using ir::PassResult;
using ir::PatternError;
using ir::Rewrite;
using ir::Type;
using ir::TypeKind;
using ir::ValueId;

namespace {

Type vector_ctype() { return Type::emitc_opaque(dialects::kVectorCType); }

const std::set<std::string>& emitc_only() {
  static const std::set<std::string> s = {"emitc"};
  return s;
}

//===----------------------------------------------------------------------===//
// arith
//===----------------------------------------------------------------------===//

// Maps one arith op onto one emitc op defining the same result values.
class ArithToEmitC : public ir::RewritePattern {
 public:
  ArithToEmitC(std::string from, std::string to) : from_(std::move(from)), to_(std::move(to)) {}

  std::string name() const override { return "arith." + from_ + "->emitc." + to_; }
  bool match(const Operation& op, const Module&) const override { return op.is("arith", from_); }
  std::set<std::string> output_dialects() const override { return emitc_only(); }

  Rewrite rewrite(const Operation& op, Module& module) const override {
    for (auto v : op.operands) {
      if (!module.type(v).is(TypeKind::Index))
        throw PatternError(fmt::format("{}: operand of type {} is not index", name(),
                                       module.type(v).str()));
    }
    Operation out;
    out.dialect = "emitc";
    out.name = to_;
    out.operands = op.operands;
    out.results = op.results;
    out.attributes = op.attributes;
    Rewrite rw;
    rw.replacement.push_back(std::move(out));
    return rw;
  }

 private:
  std::string from_;
  std::string to_;
};

//===----------------------------------------------------------------------===//
// scf
//===----------------------------------------------------------------------===//

class ScfForToEmitC : public ir::RewritePattern {
 public:
  std::string name() const override { return "scf.for->emitc.for"; }
  bool match(const Operation& op, const Module&) const override { return op.is("scf", "for"); }
  std::set<std::string> output_dialects() const override { return emitc_only(); }

  Rewrite rewrite(const Operation& op, Module& module) const override {
    if (op.operands.size() < 3 || op.regions.size() != 1 || op.regions[0].blocks.size() != 1)
      throw PatternError("scf.for: malformed loop");
    const ir::Block& body = op.regions[0].body();
    const std::size_t n_iter = op.operands.size() - 3;
    if (body.ops.empty() || !body.ops.back().is("scf", "yield") ||
        body.ops.back().operands.size() != n_iter || op.results.size() != n_iter ||
        body.arguments.size() != n_iter + 1)
      throw PatternError("scf.for: iter-arg, yield and result counts disagree");

    Rewrite rw;
    std::vector<ValueId> vars;
    for (std::size_t i = 0; i < n_iter; ++i) {
      ValueId init = op.operands[i + 3];
      Operation var = ir::make_op(module, "emitc", "variable", {}, {module.type(init)},
                                  {{"init", std::string()}});
      vars.push_back(var.results[0]);
      rw.replacement.push_back(std::move(var));
      rw.replacement.push_back(ir::make_op(module, "emitc", "assign", {vars.back(), init}, {}));
      rw.value_map.emplace(body.arguments[i + 1], vars.back());
      rw.value_map.emplace(op.results[i], vars.back());
    }

    Operation loop;
    loop.dialect = "emitc";
    loop.name = "for";
    loop.operands = {op.operands[0], op.operands[1], op.operands[2]};
    ir::Block& new_body = loop.regions.emplace_back().blocks.emplace_back();
    new_body.arguments.push_back(body.arguments[0]);
    new_body.ops.assign(body.ops.begin(), body.ops.end() - 1);

    // A yielded iter-arg reads a variable that an earlier assign in this
    // sequence may already have overwritten; snapshot those first.
    const Operation& yield = body.ops.back();
    std::set<ValueId> iter_args(body.arguments.begin() + 1, body.arguments.end());
    std::vector<ValueId> sources = yield.operands;
    for (auto& src : sources) {
      if (iter_args.count(src) == 0) continue;
      Operation tmp = ir::make_op(module, "emitc", "variable", {}, {module.type(src)},
                                  {{"init", std::string()}});
      ValueId t = tmp.results[0];
      new_body.ops.push_back(std::move(tmp));
      new_body.ops.push_back(ir::make_op(module, "emitc", "assign", {t, src}, {}));
      src = t;
    }
    for (std::size_t i = 0; i < n_iter; ++i)
      new_body.ops.push_back(ir::make_op(module, "emitc", "assign", {vars[i], sources[i]}, {}));

    rw.replacement.push_back(std::move(loop));
    return rw;
  }
};

//===----------------------------------------------------------------------===//
// rvv
//===----------------------------------------------------------------------===//

void expect_kind(const Module& module, ValueId v, std::initializer_list<TypeKind> kinds,
                 const std::string& pattern, const char* what) {
  const Type& t = module.type(v);
  for (auto k : kinds)
    if (t.is(k)) return;
  throw PatternError(fmt::format("{}: {} operand has unexpected type {}", pattern, what, t.str()));
}

void expect_vector(const Module& module, ValueId v, const std::string& pattern, const char* what) {
  const Type& t = module.type(v);
  if (t.is(TypeKind::RVVVecF32M1)) return;
  if (t.is(TypeKind::EmitCOpaque) && t.opaque_text() == dialects::kVectorCType) return;
  throw PatternError(fmt::format("{}: {} operand has unexpected type {}", pattern, what, t.str()));
}

// Displaces the buffer pointer by the element offset.
ValueId displace(Module& module, Rewrite& rw, ValueId ptr, ValueId offset) {
  Operation add = ir::make_op(module, "emitc", "add", {ptr, offset}, {module.type(ptr)});
  ValueId out = add.results[0];
  rw.replacement.push_back(std::move(add));
  return out;
}

Operation call(Module& module, const char* callee, std::vector<ValueId> args, bool has_result) {
  std::vector<Type> results;
  if (has_result) results.push_back(vector_ctype());
  return ir::make_op(module, "emitc", "call_opaque", std::move(args), results,
                     {{"callee", std::string(callee)}});
}

class VleToEmitC : public ir::RewritePattern {
 public:
  std::string name() const override { return "rvv.vle32->__riscv_vle32_v_f32m1"; }
  bool match(const Operation& op, const Module&) const override {
    return op.is("rvv", "vle32_v_f32m1Op");
  }
  std::set<std::string> output_dialects() const override { return emitc_only(); }

  Rewrite rewrite(const Operation& op, Module& module) const override {
    // (memref, offset, avl)
    expect_kind(module, op.operands[0], {TypeKind::EmitCPtr}, name(), "memref");
    expect_kind(module, op.operands[1], {TypeKind::Index}, name(), "offset");
    expect_kind(module, op.operands[2], {TypeKind::Index}, name(), "avl");
    Rewrite rw;
    ValueId ptr = displace(module, rw, op.operands[0], op.operands[1]);
    Operation c = call(module, "__riscv_vle32_v_f32m1", {ptr, op.operands[2]}, true);
    rw.value_map.emplace(op.results[0], c.results[0]);
    rw.replacement.push_back(std::move(c));
    return rw;
  }
};

class VseToEmitC : public ir::RewritePattern {
 public:
  std::string name() const override { return "rvv.vse32->__riscv_vse32_v_f32m1"; }
  bool match(const Operation& op, const Module&) const override {
    return op.is("rvv", "vse32_v_f32m1Op");
  }
  std::set<std::string> output_dialects() const override { return emitc_only(); }

  Rewrite rewrite(const Operation& op, Module& module) const override {
    // (vec, memref, offset, avl)
    expect_vector(module, op.operands[0], name(), "vec");
    expect_kind(module, op.operands[1], {TypeKind::EmitCPtr}, name(), "memref");
    expect_kind(module, op.operands[2], {TypeKind::Index}, name(), "offset");
    expect_kind(module, op.operands[3], {TypeKind::Index}, name(), "avl");
    Rewrite rw;
    ValueId ptr = displace(module, rw, op.operands[1], op.operands[2]);
    rw.replacement.push_back(
        call(module, "__riscv_vse32_v_f32m1", {ptr, op.operands[0], op.operands[3]}, false));
    return rw;
  }
};

class VfmaccToEmitC : public ir::RewritePattern {
 public:
  std::string name() const override { return "rvv.vfmacc->__riscv_vfmacc_vf_f32m1"; }
  bool match(const Operation& op, const Module&) const override {
    return op.is("rvv", "vfmacc_vf_f32m1Op");
  }
  std::set<std::string> output_dialects() const override { return emitc_only(); }

  Rewrite rewrite(const Operation& op, Module& module) const override {
    // (vd, memref, offset, vs, avl) -> (vd, memref[offset], vs, avl)
    expect_vector(module, op.operands[0], name(), "vd");
    expect_kind(module, op.operands[1], {TypeKind::EmitCPtr}, name(), "memref");
    expect_kind(module, op.operands[2], {TypeKind::Index}, name(), "offset");
    expect_vector(module, op.operands[3], name(), "vs");
    expect_kind(module, op.operands[4], {TypeKind::Index}, name(), "avl");
    Rewrite rw;
    Operation load =
        ir::make_op(module, "emitc", "subscript", {op.operands[1], op.operands[2]}, {Type::f32()});
    ValueId scalar = load.results[0];
    rw.replacement.push_back(std::move(load));
    Operation c = call(module, "__riscv_vfmacc_vf_f32m1",
                       {op.operands[0], scalar, op.operands[3], op.operands[4]}, true);
    rw.value_map.emplace(op.results[0], c.results[0]);
    rw.replacement.push_back(std::move(c));
    return rw;
  }
};

PassResult finish(Module module, std::size_t rewrites) {
  PassResult r{std::move(module), rewrites, {}};
  r.diagnostics = dialects::verify(r.module);
  return r;
}

}  // namespace

ir::PatternList arith_patterns() {
  return {std::make_shared<ArithToEmitC>("constant", "constant"),
          std::make_shared<ArithToEmitC>("addi", "add"),
          std::make_shared<ArithToEmitC>("muli", "mul")};
}

ir::PatternList scf_patterns() { return {std::make_shared<ScfForToEmitC>()}; }

ir::PatternList rvv_patterns() {
  return {std::make_shared<VleToEmitC>(), std::make_shared<VseToEmitC>(),
          std::make_shared<VfmaccToEmitC>()};
}

std::size_t retype_vectors(Module& module) {
  std::size_t n = 0;
  for (std::uint32_t id = 0; id < module.value_count(); ++id) {
    ValueId v{id};
    if (module.type(v).is(TypeKind::RVVVecF32M1)) {
      module.set_type(v, vector_ctype());
      ++n;
    }
  }
  return n;
}

PassResult pass_memref_to_emitc(Module module) {
  std::vector<ir::Diagnostic> diags;
  std::set<ValueId> params;
  for (auto& func : module.functions()) {
    if (func.regions.empty() || func.regions[0].blocks.empty()) continue;
    for (auto v : func.regions[0].body().arguments) params.insert(v);
  }

  // memref values may only enter a kernel through its parameters.
  ir::walk(module, [&](const Operation& op) {
    for (auto r : op.results)
      if (module.type(r).is(TypeKind::MemRefF32Dyn))
        diags.push_back({op.full_name(), "memref value produced by an operation"});
    for (const auto& region : op.regions)
      for (const auto& block : region.blocks)
        for (auto a : block.arguments)
          if (!params.count(a) && module.type(a).is(TypeKind::MemRefF32Dyn))
            diags.push_back({op.full_name(), "memref block argument is not a function parameter"});
  });
  if (!diags.empty()) return {std::move(module), 0, std::move(diags)};

  std::size_t rewrites = 0;
  const Type ptr = Type::emitc_ptr(Type::f32());
  for (auto& func : module.functions()) {
    if (func.regions.empty() || func.regions[0].blocks.empty()) continue;
    const auto& args = func.regions[0].body().arguments;
    bool changed = false;
    for (auto v : args) {
      if (module.type(v).is(TypeKind::MemRefF32Dyn)) {
        module.set_type(v, ptr);
        ++rewrites;
        changed = true;
      }
    }
    if (changed) func.attributes["function_type"] = dialects::function_type_string(module, args);
  }
  return finish(std::move(module), rewrites);
}

PassResult pass_arith_to_emitc(Module module) {
  auto r = ir::apply_patterns(std::move(module), arith_patterns());
  return finish(std::move(r.module), r.rewrites_applied);
}

PassResult pass_scf_to_emitc(Module module) {
  auto r = ir::apply_patterns(std::move(module), scf_patterns());
  return finish(std::move(r.module), r.rewrites_applied);
}

PassResult pass_rvv_to_emitc(Module module) {
  auto r = ir::apply_patterns(std::move(module), rvv_patterns());
  retype_vectors(r.module);
  return finish(std::move(r.module), r.rewrites_applied);
}

PassResult run_pipeline(Module module) {
  PassResult result{std::move(module), 0, {}};
  result.diagnostics = dialects::verify(result.module);
  if (!result.ok()) return result;

  using Pass = PassResult (*)(Module);
  for (Pass pass : {pass_memref_to_emitc, pass_arith_to_emitc, pass_scf_to_emitc,
                    pass_rvv_to_emitc}) {
    std::size_t total = result.rewrites_applied;
    result = pass(std::move(result.module));
    result.rewrites_applied += total;
    if (!result.ok()) return result;
  }
  return result;
}

}  // namespace rvvgen::lowering
