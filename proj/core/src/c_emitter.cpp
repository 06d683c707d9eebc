#include "rvvgen/c_emitter.hpp"

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <set>

#include "rvvgen/dialects.hpp"

namespace rvvgen::emit {

using ir::Operation;
using ir::Type;
using ir::TypeKind;
using ir::ValueId;

namespace {

const char* kCompatInclude = "#include \"rvv_compat.h\"";

std::string float_literal(double v) {
  if (!std::isfinite(v)) throw EmitError("non-finite float constant");
  std::string s = fmt::format("{:.9g}", v);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s + "f";
}

bool uses_value(const Operation& op, ValueId v) {
  for (auto o : op.operands)
    if (o == v) return true;
  for (const auto& region : op.regions)
    for (const auto& block : region.blocks)
      for (const auto& inner : block.ops)
        if (uses_value(inner, v)) return true;
  return false;
}

class FunctionEmitter {
 public:
  FunctionEmitter(const ir::Module& module, const EmitOptions& options)
      : module_(module), options_(options) {}

  std::string run(const Operation& func) {
    if (!func.is("func", "func")) throw EmitError("expected func.func, got " + func.full_name());
    if (func.regions.size() != 1 || func.regions[0].blocks.size() != 1)
      throw EmitError("function must have a single-block body");
    const ir::Block& body = func.regions[0].body();
    analyze_pointers(func);

    std::string out = "void " + func.str_attr("sym_name") + "(";
    if (body.arguments.empty()) out += "void";
    for (std::size_t i = 0; i < body.arguments.size(); ++i) {
      if (i) out += ", ";
      ValueId a = body.arguments[i];
      out += ctype(a) + " " + define(a, 'v');
    }
    out += ") {\n";
    emit_block(body, 1, out);
    out += "}\n";
    return out;
  }

 private:
  void analyze_pointers(const Operation& func) {
    for (auto a : func.regions[0].body().arguments)
      if (module_.type(a).is(TypeKind::EmitCPtr)) root_.emplace(a, a);
    ir::walk(func.regions[0].body(), [&](const Operation& op) {
      if (op.is("emitc", "add") && !op.results.empty() &&
          module_.type(op.results[0]).is(TypeKind::EmitCPtr)) {
        auto it = root_.find(op.operands[0]);
        root_.emplace(op.results[0], it == root_.end() ? op.operands[0] : it->second);
      }
    });
    ir::walk(func.regions[0].body(), [&](const Operation& op) {
      if (!op.is("emitc", "call_opaque") || op.operands.empty()) return;
      const std::string& callee = op.str_attr("callee");
      for (const auto& s : options_.store_callees) {
        if (callee == s) {
          auto it = root_.find(op.operands[0]);
          written_.insert(it == root_.end() ? op.operands[0] : it->second);
        }
      }
    });
  }

  std::string ctype(ValueId v) const {
    const Type& t = module_.type(v);
    switch (t.kind()) {
      case TypeKind::Index: return "size_t";
      case TypeKind::F32: return "float";
      case TypeKind::EmitCPtr: {
        auto it = root_.find(v);
        ValueId root = it == root_.end() ? v : it->second;
        bool readonly = options_.const_readonly_pointers && written_.count(root) == 0;
        return readonly ? "const float*" : "float*";
      }
      case TypeKind::EmitCOpaque: return t.opaque_text();
      case TypeKind::MemRefF32Dyn:
      case TypeKind::RVVVecF32M1: break;
    }
    throw EmitError("type " + t.str() + " has no C spelling; module is not fully lowered");
  }

  std::string define(ValueId v, char prefix) {
    std::string name = fmt::format("{}{}", prefix, next_++);
    names_.emplace(v, name);
    return name;
  }

  const std::string& use(ValueId v) const {
    auto it = names_.find(v);
    if (it == names_.end()) throw EmitError(fmt::format("value %{} used before definition", v.id));
    return it->second;
  }

  std::string args(const std::vector<ValueId>& vs) const {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i) s += ", ";
      s += use(vs[i]);
    }
    return s;
  }

  // Index of the assign that can serve as the declaration initializer of
  // the variable at ops[var_index], or npos.
  std::size_t initializer_of(const ir::Block& block, std::size_t var_index) const {
    ValueId var = block.ops[var_index].results[0];
    for (std::size_t i = var_index + 1; i < block.ops.size(); ++i) {
      const Operation& op = block.ops[i];
      if (op.is("emitc", "assign") && op.operands[0] == var) {
        ValueId value = op.operands[1];
        return names_.count(value) ? i : std::string::npos;
      }
      if (uses_value(op, var)) return std::string::npos;
    }
    return std::string::npos;
  }

  void emit_block(const ir::Block& block, int depth, std::string& out) {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    std::set<std::size_t> consumed;
    for (std::size_t i = 0; i < block.ops.size(); ++i) {
      const Operation& op = block.ops[i];
      if (consumed.count(i)) continue;

      if (op.is("func", "return")) {
        if (i + 1 != block.ops.size()) out += indent + "return;\n";
      } else if (op.is("emitc", "constant")) {
        ValueId r = op.results[0];
        const ir::Attribute& value = *op.attr("value");
        std::string lit = std::holds_alternative<std::int64_t>(value)
                              ? std::to_string(std::get<std::int64_t>(value))
                              : float_literal(std::get<double>(value));
        out += indent + ctype(r) + " " + define(r, 'v') + " = " + lit + ";\n";
      } else if (op.is("emitc", "variable")) {
        ValueId r = op.results[0];
        std::size_t init = initializer_of(block, i);
        std::string decl = ctype(r) + " " + define(r, 'v');
        if (init != std::string::npos) {
          consumed.insert(init);
          out += indent + decl + " = " + use(block.ops[init].operands[1]) + ";\n";
        } else {
          out += indent + decl + ";\n";
        }
      } else if (op.is("emitc", "assign")) {
        out += indent + use(op.operands[0]) + " = " + use(op.operands[1]) + ";\n";
      } else if (op.is("emitc", "add") || op.is("emitc", "mul")) {
        const char* sym = op.name == "add" ? " + " : " * ";
        std::string rhs = use(op.operands[0]) + sym + use(op.operands[1]);
        ValueId r = op.results[0];
        out += indent + ctype(r) + " " + define(r, 'v') + " = " + rhs + ";\n";
      } else if (op.is("emitc", "subscript")) {
        std::string rhs = use(op.operands[0]) + "[" + use(op.operands[1]) + "]";
        ValueId r = op.results[0];
        out += indent + ctype(r) + " " + define(r, 'v') + " = " + rhs + ";\n";
      } else if (op.is("emitc", "call_opaque")) {
        std::string call = op.str_attr("callee") + "(" + args(op.operands) + ")";
        if (op.results.empty()) {
          out += indent + call + ";\n";
        } else {
          ValueId r = op.results[0];
          out += indent + ctype(r) + " " + define(r, 'v') + " = " + call + ";\n";
        }
      } else if (op.is("emitc", "for")) {
        const ir::Block& body = op.regions.at(0).body();
        ValueId iv = body.arguments.at(0);
        std::string lb = use(op.operands[0]), ub = use(op.operands[1]),
                    step = use(op.operands[2]);
        std::string name = define(iv, 'i');
        out += indent + fmt::format("for (size_t {0} = {1}; {0} < {2}; {0} += {3}) {{\n", name,
                                    lb, ub, step);
        emit_block(body, depth + 1, out);
        out += indent + "}\n";
      } else {
        throw EmitError("cannot translate " + op.full_name() + " to C");
      }
    }
  }

  const ir::Module& module_;
  const EmitOptions& options_;
  std::map<ValueId, std::string> names_;
  std::map<ValueId, ValueId> root_;
  std::set<ValueId> written_;
  unsigned next_ = 1;
};

}  // namespace

CSourceUnit emit_c(const ir::Module& module, const EmitOptions& options) {
  for (const auto& d : dialects::dialect_census(module)) {
    if (d != "func" && d != "emitc")
      throw EmitError("module still contains ops of dialect '" + d + "'");
  }
  CSourceUnit unit;
  if (options.include_prologue) unit.includes.push_back(kCompatInclude);
  for (const auto& func : module.functions())
    unit.functions.push_back(FunctionEmitter(module, options).run(func));

  for (const auto& inc : unit.includes) unit.text += inc + "\n";
  for (const auto& f : unit.functions) {
    if (!unit.text.empty()) unit.text += "\n";
    unit.text += f;
  }
  return unit;
}

std::string kernel_set_filename(const KernelConfig& config) {
  return fmt::format("ukernels_{}x{}_vlen{}.c", config.mr, config.nr, config.vlen_bits);
}

CSourceUnit emit_kernel_set(const std::vector<std::pair<KernelConfig, ir::Module>>& lowered) {
  if (lowered.empty()) throw EmitError("empty kernel family");
  const int vlen = lowered.front().first.vlen_bits;
  int max_mr = 0, max_nr = 0;
  std::map<std::pair<int, int>, std::string> table;
  for (const auto& [cfg, module] : lowered) {
    if (cfg.vlen_bits != vlen) throw EmitError("kernel family mixes vector lengths");
    if (!table.emplace(std::pair{cfg.mr, cfg.nr}, cfg.kernel_name()).second)
      throw EmitError(fmt::format("two kernels share the tile size {}x{}", cfg.mr, cfg.nr));
    max_mr = std::max(max_mr, cfg.mr);
    max_nr = std::max(max_nr, cfg.nr);
  }

  CSourceUnit unit;
  unit.includes.push_back(kCompatInclude);
  EmitOptions options;
  options.include_prologue = false;
  for (const auto& [cfg, module] : lowered) {
    CSourceUnit one = emit_c(module, options);
    unit.functions.insert(unit.functions.end(), one.functions.begin(), one.functions.end());
  }

  std::string& t = unit.text;
  t += std::string(kCompatInclude) + "\n\n";
  t += fmt::format(
      "#if defined(VLEN_BITS) && VLEN_BITS != {0}\n"
      "#error \"kernels were generated for VLEN_BITS={0}\"\n"
      "#endif\n",
      vlen);
  for (const auto& f : unit.functions) t += "\n" + f;

  t += "\ntypedef void (*ukernel_fn)(size_t, const float*, const float*, float*, size_t);\n\n";
  t += fmt::format("ukernel_fn const ukernels[{}][{}] = {{\n", max_mr, max_nr);
  for (int m = 1; m <= max_mr; ++m) {
    t += "  {";
    for (int n = 1; n <= max_nr; ++n) {
      if (n > 1) t += ", ";
      auto it = table.find({m, n});
      t += it == table.end() ? "0" : it->second;
    }
    t += m == max_mr ? "}\n" : "},\n";
  }
  t += "};\n";
  return unit;
}

}  // namespace rvvgen::emit
