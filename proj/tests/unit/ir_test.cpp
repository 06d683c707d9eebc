#include <gtest/gtest.h>

#include <sstream>

#include "rvvgen/dialects.hpp"
#include "rvvgen/ir.hpp"
#include "rvvgen/kernel_builder.hpp"
#include "rvvgen/lowering.hpp"
#include "rvvgen/rewrite.hpp"

namespace rvvgen {
namespace {

using ir::Module;
using ir::Operation;
using ir::Type;
using ir::TypeKind;
using ir::ValueId;

// func @name(args...) with an empty body ended by func.return.
Operation make_func(Module& m, const std::string& name, const std::vector<Type>& params) {
  Operation f;
  f.dialect = "func";
  f.name = "func";
  ir::Block& b = f.regions.emplace_back().blocks.emplace_back();
  for (std::uint32_t i = 0; i < params.size(); ++i) b.arguments.push_back(m.new_argument(params[i], i));
  f.attributes["sym_name"] = name;
  f.attributes["function_type"] = dialects::function_type_string(m, b.arguments);
  return f;
}

ValueId push(std::vector<Operation>& ops, Operation op) {
  ValueId r = op.results.empty() ? ValueId{} : op.results[0];
  ops.push_back(std::move(op));
  return r;
}

// scf.for over index iter-args, with `yielded` of them returned by the yield.
Module loop_module(std::size_t iter_args, std::size_t yielded) {
  Module m;
  Operation f = make_func(m, "f", {Type::index()});
  auto& ops = f.regions[0].body().ops;
  ValueId zero = push(ops, ir::make_op(m, "arith", "constant", {}, {Type::index()}, {{"value", 0}}));
  ValueId one = push(ops, ir::make_op(m, "arith", "constant", {}, {Type::index()}, {{"value", 1}}));
  ValueId ub = f.regions[0].body().arguments[0];

  Operation loop;
  loop.dialect = "scf";
  loop.name = "for";
  loop.operands = {zero, ub, one};
  for (std::size_t i = 0; i < iter_args; ++i) {
    loop.operands.push_back(zero);
    loop.results.push_back(m.new_result(Type::index(), static_cast<std::uint32_t>(i)));
  }
  ir::Block& body = loop.regions.emplace_back().blocks.emplace_back();
  body.arguments.push_back(m.new_argument(Type::index(), 0));
  std::vector<ValueId> next;
  for (std::size_t i = 0; i < iter_args; ++i) {
    ValueId a = m.new_argument(Type::index(), static_cast<std::uint32_t>(i + 1));
    body.arguments.push_back(a);
    next.push_back(push(body.ops, ir::make_op(m, "arith", "addi", {a, one}, {Type::index()})));
  }
  next.resize(yielded);
  body.ops.push_back(ir::make_op(m, "scf", "yield", next, {}));
  ops.push_back(std::move(loop));
  ops.push_back(ir::make_op(m, "func", "return", {}, {}));
  m.functions().push_back(std::move(f));
  return m;
}

TEST(TypeTest, Spellings) {
  EXPECT_EQ(Type::f32().str(), "f32");
  EXPECT_EQ(Type::index().str(), "index");
  EXPECT_EQ(Type::memref_f32().str(), "memref<-1xf32>");
  EXPECT_EQ(Type::rvv_f32m1().str(), "!rvv.vfloat32m1");
  EXPECT_EQ(Type::emitc_ptr(Type::f32()).str(), "!emitc.ptr<f32>");
  EXPECT_EQ(Type::emitc_opaque("vfloat32m1_t").str(), "!emitc.opaque<\"vfloat32m1_t\">");
}

TEST(TypeTest, InvariantsRejected) {
  EXPECT_THROW(Type::emitc_ptr(Type::index()), std::invalid_argument);
  EXPECT_THROW(Type::emitc_opaque(""), std::invalid_argument);
}

TEST(ModuleTest, ValueIdsAreNeverReused) {
  Module m;
  ValueId a = m.new_result(Type::index(), 0);
  ValueId b = m.new_argument(Type::f32(), 0);
  EXPECT_NE(a, b);
  EXPECT_EQ(m.value_count(), 2u);
  m.set_type(a, Type::f32());
  EXPECT_TRUE(m.type(a).is(TypeKind::F32));
  EXPECT_EQ(m.info(b).def.kind, ir::DefSite::Kind::BlockArgument);
}

TEST(VerifyTest, EmptyModuleIsClean) {
  EXPECT_TRUE(dialects::verify(Module{}).empty());
}

TEST(VerifyTest, BuiltKernelIsClean) {
  auto m = build_microkernel({8, 4, DType::F32, 256});
  auto diags = dialects::verify(m);
  EXPECT_TRUE(diags.empty()) << (diags.empty() ? "" : diags[0].str());
}

TEST(VerifyTest, WellFormedLoopIsClean) {
  EXPECT_TRUE(dialects::verify(loop_module(4, 4)).empty());
}

TEST(VerifyTest, YieldCountMismatchNamesTheLoop) {
  auto diags = dialects::verify(loop_module(4, 3));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_NE(diags[0].path.find("scf.for"), std::string::npos) << diags[0].str();
  EXPECT_NE(diags[0].reason.find("yields 3"), std::string::npos) << diags[0].str();
}

TEST(VerifyTest, UseBeforeDefinition) {
  Module m;
  Operation f = make_func(m, "f", {});
  auto& ops = f.regions[0].body().ops;
  Operation c = ir::make_op(m, "arith", "constant", {}, {Type::index()}, {{"value", 2}});
  ValueId v = c.results[0];
  ops.push_back(ir::make_op(m, "arith", "addi", {v, v}, {Type::index()}));
  ops.push_back(std::move(c));
  ops.push_back(ir::make_op(m, "func", "return", {}, {}));
  m.functions().push_back(std::move(f));
  auto diags = dialects::verify(m);
  ASSERT_FALSE(diags.empty());
  EXPECT_NE(diags[0].path.find("arith.addi"), std::string::npos);
}

TEST(VerifyTest, DoubleDefinition) {
  Module m;
  Operation f = make_func(m, "f", {});
  auto& ops = f.regions[0].body().ops;
  Operation c = ir::make_op(m, "arith", "constant", {}, {Type::index()}, {{"value", 2}});
  Operation d = c;
  ops.push_back(std::move(c));
  ops.push_back(std::move(d));
  ops.push_back(ir::make_op(m, "func", "return", {}, {}));
  m.functions().push_back(std::move(f));
  EXPECT_FALSE(dialects::verify(m).empty());
}

TEST(VerifyTest, LoopValueInvisibleOutsideItsRegion) {
  Module m = loop_module(1, 1);
  auto& ops = m.functions()[0].regions[0].body().ops;
  ValueId inner = ops[2].regions[0].body().ops[0].results[0];
  ops.insert(ops.end() - 1, ir::make_op(m, "arith", "addi", {inner, inner}, {Type::index()}));
  EXPECT_FALSE(dialects::verify(m).empty());
}

TEST(VerifyTest, OperandTypeMismatch) {
  Module m;
  Operation f = make_func(m, "f", {Type::memref_f32()});
  auto& ops = f.regions[0].body().ops;
  ValueId buf = f.regions[0].body().arguments[0];
  ops.push_back(ir::make_op(m, "arith", "addi", {buf, buf}, {Type::index()}));
  ops.push_back(ir::make_op(m, "func", "return", {}, {}));
  m.functions().push_back(std::move(f));
  EXPECT_FALSE(dialects::verify(m).empty());
}

TEST(VerifyTest, UnregisteredOp) {
  Module m;
  Operation f = make_func(m, "f", {});
  f.regions[0].body().ops.push_back(ir::make_op(m, "emitc", "nonexistent", {}, {}));
  f.regions[0].body().ops.push_back(ir::make_op(m, "func", "return", {}, {}));
  m.functions().push_back(std::move(f));
  auto diags = dialects::verify(m);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_NE(diags[0].path.find("emitc.nonexistent"), std::string::npos);
}

TEST(VerifyTest, MultiBlockRegionRejected) {
  Module m = loop_module(0, 0);
  auto& loop = m.functions()[0].regions[0].body().ops[2];
  loop.regions[0].blocks.push_back(loop.regions[0].blocks[0]);
  EXPECT_FALSE(dialects::verify(m).empty());
}

TEST(PrintTest, EmptyModule) { EXPECT_EQ(ir::print_ir(Module{}), "module { }\n"); }

TEST(PrintTest, Deterministic) {
  KernelConfig c{8, 4, DType::F32, 256};
  auto a = build_microkernel(c);
  EXPECT_EQ(ir::print_ir(a), ir::print_ir(a));
  EXPECT_EQ(ir::print_ir(a), ir::print_ir(build_microkernel(c)));
}

TEST(PrintTest, FmaLineShape) {
  std::string text = ir::print_ir(build_microkernel({8, 4, DType::F32, 256}));
  bool found = false;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.find("rvv.vfmacc_vf_f32m1Op") != std::string::npos) {
      found = true;
      EXPECT_NE(line.find("-> !rvv.vfloat32m1"), std::string::npos) << line;
      EXPECT_EQ(line.rfind("      %", 0), 0u) << "loop body ops are indented one level: " << line;
    }
  }
  EXPECT_TRUE(found);
}

// Collects every %N in `text`.
std::vector<int> value_numbers(const std::string& text) {
  std::vector<int> out;
  for (std::size_t pos = text.find('%'); pos != std::string::npos; pos = text.find('%', pos + 1)) {
    std::size_t end = text.find_first_not_of("0123456789", pos + 1);
    out.push_back(std::stoi(text.substr(pos + 1, end - pos - 1)));
  }
  return out;
}

TEST(PrintTest, ValuesNumberedInTextOrder) {
  // Lowering interleaves fresh ids with old ones; the printer still numbers
  // definitions in order of appearance.
  auto r = lowering::run_pipeline(build_microkernel({2, 2, DType::F32, 128}));
  ASSERT_TRUE(r.ok());
  std::istringstream in(ir::print_ir(r.module));
  int next = 0;
  for (std::string line; std::getline(in, line);) {
    std::string defs, uses;
    auto first = line.find_first_not_of(' ');
    if (first != std::string::npos && line.compare(first, 5, "^bb0(") == 0) {
      defs = line;
    } else if (auto eq = line.find(" = "); eq != std::string::npos && eq < line.find('(')) {
      defs = line.substr(0, eq);
      uses = line.substr(eq);
    } else {
      uses = line;
    }
    for (int n : value_numbers(uses)) EXPECT_LT(n, next) << line;
    for (int n : value_numbers(defs)) EXPECT_EQ(n, next++) << line;
  }
  EXPECT_GT(next, 0);
}

// A pattern that emits rvv ops: must be rejected by the driver.
class BadDialectPattern : public ir::RewritePattern {
 public:
  std::string name() const override { return "bad"; }
  bool match(const Operation& op, const Module&) const override { return op.is("arith", "addi"); }
  std::set<std::string> output_dialects() const override { return {"rvv"}; }
  ir::Rewrite rewrite(const Operation& op, Module&) const override { return {{op}, {}}; }
};

// Replaces an op by itself: matched dialect count never decreases.
class StuckPattern : public ir::RewritePattern {
 public:
  std::string name() const override { return "stuck"; }
  bool match(const Operation& op, const Module&) const override { return op.is("arith", "addi"); }
  std::set<std::string> output_dialects() const override { return {"emitc"}; }
  ir::Rewrite rewrite(const Operation& op, Module&) const override { return {{op}, {}}; }
};

TEST(ApplyPatternsTest, SingleVfmacc) {
  Module m;
  Operation f = make_func(m, "f", {Type::emitc_ptr(Type::f32())});
  auto& ops = f.regions[0].body().ops;
  ValueId buf = f.regions[0].body().arguments[0];
  ValueId zero = push(ops, ir::make_op(m, "emitc", "constant", {}, {Type::index()}, {{"value", 0}}));
  ValueId four = push(ops, ir::make_op(m, "emitc", "constant", {}, {Type::index()}, {{"value", 4}}));
  ValueId v = push(ops, ir::make_op(m, "rvv", "vle32_v_f32m1Op", {buf, zero, four}, {Type::rvv_f32m1()}));
  // vle32 is present too, so only the vfmacc pattern is offered.
  push(ops, ir::make_op(m, "rvv", "vfmacc_vf_f32m1Op", {v, buf, zero, v, four}, {Type::rvv_f32m1()}));
  ops.push_back(ir::make_op(m, "func", "return", {}, {}));
  m.functions().push_back(std::move(f));
  ASSERT_TRUE(dialects::verify(m).empty());

  auto all = lowering::rvv_patterns();
  ir::PatternList only_fma;
  for (auto& p : all)
    if (p->name().find("vfmacc") != std::string::npos) only_fma.push_back(p);
  ASSERT_EQ(only_fma.size(), 1u);

  auto r = ir::apply_patterns(std::move(m), only_fma);
  EXPECT_EQ(r.rewrites_applied, 1u);
  EXPECT_EQ(ir::count_ops(r.module, "rvv", "vfmacc_vf_f32m1Op"), 0u);
  EXPECT_EQ(ir::count_ops(r.module, "rvv", "vle32_v_f32m1Op"), 1u);
  std::size_t calls = 0;
  ir::walk(r.module, [&](const Operation& op) {
    if (op.is("emitc", "call_opaque")) {
      ++calls;
      EXPECT_EQ(op.str_attr("callee"), "__riscv_vfmacc_vf_f32m1");
    }
  });
  EXPECT_EQ(calls, 1u);
}

TEST(ApplyPatternsTest, NothingToMatch) {
  Module m = loop_module(2, 2);
  std::string before = ir::print_ir(m);
  auto r = ir::apply_patterns(std::move(m), lowering::rvv_patterns());
  EXPECT_EQ(r.rewrites_applied, 0u);
  EXPECT_EQ(ir::print_ir(r.module), before);
}

TEST(ApplyPatternsTest, FullSetLeavesNoSourceDialect) {
  auto r = lowering::run_pipeline(build_microkernel({8, 4, DType::F32, 256}));
  ASSERT_TRUE(r.ok());
  for (const char* d : {"scf", "memref", "arith", "rvv"}) EXPECT_EQ(ir::count_ops(r.module, d), 0u) << d;
}

TEST(ApplyPatternsTest, RejectsForeignOutputDialect) {
  ir::PatternList p = {std::make_shared<BadDialectPattern>()};
  EXPECT_THROW(ir::apply_patterns(loop_module(1, 1), p), ir::PatternError);
}

TEST(ApplyPatternsTest, RejectsPatternWithoutProgress) {
  ir::PatternList p = {std::make_shared<StuckPattern>()};
  EXPECT_THROW(ir::apply_patterns(loop_module(1, 1), p), ir::PatternError);
}

}  // namespace
}  // namespace rvvgen
