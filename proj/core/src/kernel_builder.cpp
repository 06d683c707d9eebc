#include "rvvgen/kernel_builder.hpp"

#include <fmt/format.h>

#include <map>

#include "rvvgen/dialects.hpp"

namespace rvvgen {

using ir::Operation;
using ir::Type;
using ir::ValueId;

DType parse_dtype(std::string_view text) {
  if (text == "f32") return DType::F32;
  if (text == "f16") return DType::F16;
  if (text == "f64") return DType::F64;
  throw ConfigError(fmt::format("unknown dtype '{}'", text));
}

std::string_view dtype_name(DType dtype) {
  switch (dtype) {
    case DType::F32: return "f32";
    case DType::F16: return "f16";
    case DType::F64: return "f64";
  }
  return "?";
}

void KernelConfig::validate() const {
  if (mr < 1 || mr > 64) throw ConfigError(fmt::format("mr must be in [1, 64], got {}", mr));
  if (nr < 1 || nr > 64) throw ConfigError(fmt::format("nr must be in [1, 64], got {}", nr));
  if (vlen_bits != 128 && vlen_bits != 256 && vlen_bits != 512)
    throw ConfigError(fmt::format("vlen must be one of 128, 256, 512, got {}", vlen_bits));
}

std::string KernelConfig::kernel_name() const {
  return fmt::format("ukernel_{}x{}_{}", mr, nr, dtype_name(dtype));
}

void GemmShape::validate() const {
  if (m < 1 || n < 1 || k < 1)
    throw ConfigError(fmt::format("gemm shape {}x{}x{} has a dimension below 1", m, n, k));
}

RegisterPlan plan_registers(const KernelConfig& config) {
  config.validate();
  if (config.dtype != DType::F32)
    throw ConfigError(fmt::format("dtype {} is not supported; only f32 kernels can be generated",
                                  dtype_name(config.dtype)));
  RegisterPlan plan;
  plan.elems_per_vreg = config.vlen_bits / 32;
  plan.num_a_regs = (config.mr + plan.elems_per_vreg - 1) / plan.elems_per_vreg;
  for (int p = 0; p < plan.num_a_regs; ++p)
    plan.vl.push_back(std::min(plan.elems_per_vreg, config.mr - p * plan.elems_per_vreg));
  plan.num_acc_regs = config.nr * plan.num_a_regs;
  plan.fmas_per_iter = plan.num_acc_regs;
  return plan;
}

namespace {

class KernelBuilder {
 public:
  KernelBuilder(const KernelConfig& config, const RegisterPlan& plan)
      : config_(config), plan_(plan) {}

  ir::Module build() {
    Operation func;
    func.dialect = "func";
    func.name = "func";
    func.regions.emplace_back().blocks.emplace_back();
    ir::Block& entry = func.regions[0].body();

    // (kc, Ac, Bc, C, ldC)
    const std::vector<Type> params = {Type::index(), Type::memref_f32(), Type::memref_f32(),
                                      Type::memref_f32(), Type::index()};
    for (std::uint32_t i = 0; i < params.size(); ++i)
      entry.arguments.push_back(module_.new_argument(params[i], i));
    kc_ = entry.arguments[0];
    ac_ = entry.arguments[1];
    bc_ = entry.arguments[2];
    c_ = entry.arguments[3];
    ldc_ = entry.arguments[4];
    func_ops_ = &entry.ops;

    const int nr = config_.nr;
    const int na = plan_.num_a_regs;

    // Prologue: Cr[j][p] = vle32(C, p*elems + j*ldC, vl[p]).
    std::vector<ValueId> c_offsets;
    std::vector<ValueId> inits;
    for (int j = 0; j < nr; ++j) {
      ValueId col = emit(*func_ops_, "arith", "muli", {constant(j), ldc_}, Type::index());
      for (int p = 0; p < na; ++p) {
        ValueId off = emit(*func_ops_, "arith", "addi",
                           {constant(p * plan_.elems_per_vreg), col}, Type::index());
        c_offsets.push_back(off);
        inits.push_back(emit(*func_ops_, "rvv", "vle32_v_f32m1Op", {c_, off, constant(plan_.vl[p])},
                             Type::rvv_f32m1()));
      }
    }

    std::vector<ValueId> results = build_loop(inits);

    // Epilogue: vse32(Cr[j][p], C, p*elems + j*ldC, vl[p]).
    for (int j = 0; j < nr; ++j) {
      for (int p = 0; p < na; ++p) {
        std::size_t idx = static_cast<std::size_t>(j * na + p);
        func_ops_->push_back(ir::make_op(module_, "rvv", "vse32_v_f32m1Op",
                                         {results[idx], c_, c_offsets[idx], constant(plan_.vl[p])},
                                         {}));
      }
    }
    func_ops_->push_back(ir::make_op(module_, "func", "return", {}, {}));

    func.attributes["sym_name"] = config_.kernel_name();
    func.attributes["function_type"] = dialects::function_type_string(module_, entry.arguments);
    module_.functions().push_back(std::move(func));
    return std::move(module_);
  }

 private:
  // Index constants live in the function entry block so that every nested
  // region can see them.
  ValueId constant(std::int64_t v) {
    auto it = constants_.find(v);
    if (it != constants_.end()) return it->second;
    Operation op = ir::make_op(module_, "arith", "constant", {}, {Type::index()}, {{"value", v}});
    ValueId id = op.results[0];
    func_ops_->push_back(std::move(op));
    constants_.emplace(v, id);
    return id;
  }

  ValueId emit(std::vector<Operation>& ops, const char* dialect, const char* name,
               std::vector<ValueId> operands, Type result) {
    Operation op = ir::make_op(module_, dialect, name, std::move(operands), {std::move(result)});
    ValueId id = op.results[0];
    ops.push_back(std::move(op));
    return id;
  }

  // Loop L6 over k in [0, kc) carrying all accumulators as iter-args.
  std::vector<ValueId> build_loop(const std::vector<ValueId>& inits) {
    const int nr = config_.nr;
    const int na = plan_.num_a_regs;

    ValueId lb = constant(0);
    ValueId step = constant(1);
    // Constants needed inside the body are created up front in the entry block.
    ValueId mr_c = constant(config_.mr);
    ValueId nr_c = constant(nr);
    for (int p = 0; p < na; ++p) {
      constant(p * plan_.elems_per_vreg);
      constant(plan_.vl[p]);
    }
    for (int j = 0; j < nr; ++j) constant(j);

    Operation loop;
    loop.dialect = "scf";
    loop.name = "for";
    loop.operands = {lb, kc_, step};
    loop.operands.insert(loop.operands.end(), inits.begin(), inits.end());
    for (std::uint32_t i = 0; i < inits.size(); ++i)
      loop.results.push_back(module_.new_result(Type::rvv_f32m1(), i));

    ir::Block& body = loop.regions.emplace_back().blocks.emplace_back();
    ValueId k = module_.new_argument(Type::index(), 0);
    body.arguments.push_back(k);
    std::vector<ValueId> acc;
    for (std::uint32_t i = 0; i < inits.size(); ++i) {
      acc.push_back(module_.new_argument(Type::rvv_f32m1(), i + 1));
      body.arguments.push_back(acc.back());
    }

    // Ar[p] = vle32(Ac, k*mr + p*elems, vl[p])
    ValueId k_mul_mr = emit(body.ops, "arith", "muli", {k, mr_c}, Type::index());
    std::vector<ValueId> ar;
    for (int p = 0; p < na; ++p) {
      ValueId off = emit(body.ops, "arith", "addi",
                         {k_mul_mr, constant(p * plan_.elems_per_vreg)}, Type::index());
      ar.push_back(emit(body.ops, "rvv", "vle32_v_f32m1Op", {ac_, off, constant(plan_.vl[p])},
                        Type::rvv_f32m1()));
    }

    // Cr[j][p] = vfmacc(Cr[j][p], Bc, k*nr + j, Ar[p], vl[p])
    ValueId k_mul_nr = emit(body.ops, "arith", "muli", {k, nr_c}, Type::index());
    std::vector<ValueId> next;
    for (int j = 0; j < nr; ++j) {
      ValueId b_off = emit(body.ops, "arith", "addi", {k_mul_nr, constant(j)}, Type::index());
      for (int p = 0; p < na; ++p) {
        std::size_t idx = static_cast<std::size_t>(j * na + p);
        next.push_back(emit(body.ops, "rvv", "vfmacc_vf_f32m1Op",
                            {acc[idx], bc_, b_off, ar[static_cast<std::size_t>(p)],
                             constant(plan_.vl[p])},
                            Type::rvv_f32m1()));
      }
    }
    body.ops.push_back(ir::make_op(module_, "scf", "yield", next, {}));

    std::vector<ValueId> results = loop.results;
    func_ops_->push_back(std::move(loop));
    return results;
  }

  const KernelConfig& config_;
  const RegisterPlan& plan_;
  ir::Module module_;
  std::vector<Operation>* func_ops_ = nullptr;
  std::map<std::int64_t, ValueId> constants_;
  ValueId kc_, ac_, bc_, c_, ldc_;
};

}  // namespace

ir::Module build_microkernel(const KernelConfig& config) {
  RegisterPlan plan = plan_registers(config);
  return KernelBuilder(config, plan).build();
}

std::vector<std::pair<KernelConfig, ir::Module>> build_family(const KernelConfig& config) {
  plan_registers(config);
  std::vector<std::pair<KernelConfig, ir::Module>> family;
  family.reserve(static_cast<std::size_t>(config.mr * config.nr));
  for (int m = 1; m <= config.mr; ++m) {
    for (int n = 1; n <= config.nr; ++n) {
      KernelConfig sub = config;
      sub.mr = m;
      sub.nr = n;
      family.emplace_back(sub, build_microkernel(sub));
    }
  }
  return family;
}

}  // namespace rvvgen
