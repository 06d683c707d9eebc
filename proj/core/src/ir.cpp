#include "rvvgen/ir.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace rvvgen::ir {

//===----------------------------------------------------------------------===//
// Types and attributes
//===----------------------------------------------------------------------===//

Type Type::emitc_ptr(const Type& elem) {
  if (!elem.is(TypeKind::F32))
    throw std::invalid_argument("emitc.ptr element must be f32, got " + elem.str());
  Type t(TypeKind::EmitCPtr);
  t.pointee_ = TypeKind::F32;
  return t;
}

Type Type::emitc_opaque(std::string text) {
  if (text.empty()) throw std::invalid_argument("emitc.opaque text must be nonempty");
  Type t(TypeKind::EmitCOpaque);
  t.text_ = std::move(text);
  return t;
}

std::string Type::str() const {
  switch (kind_) {
    case TypeKind::F32: return "f32";
    case TypeKind::Index: return "index";
    case TypeKind::MemRefF32Dyn: return "memref<-1xf32>";
    case TypeKind::RVVVecF32M1: return "!rvv.vfloat32m1";
    case TypeKind::EmitCPtr: return "!emitc.ptr<f32>";
    case TypeKind::EmitCOpaque: return "!emitc.opaque<\"" + text_ + "\">";
  }
  return "<invalid>";
}

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string float_str(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string attribute_str(const Attribute& attr) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return float_str(v);
        else if constexpr (std::is_same_v<T, std::string>) return quote(v);
        else return v.str();
      },
      attr);
}

const Attribute* Operation::attr(std::string_view key) const {
  auto it = attributes.find(key);
  return it == attributes.end() ? nullptr : &it->second;
}

std::int64_t Operation::int_attr(std::string_view key) const {
  const Attribute* a = attr(key);
  if (a == nullptr || !std::holds_alternative<std::int64_t>(*a))
    throw std::out_of_range(full_name() + ": missing int attribute '" + std::string(key) + "'");
  return std::get<std::int64_t>(*a);
}

const std::string& Operation::str_attr(std::string_view key) const {
  const Attribute* a = attr(key);
  if (a == nullptr || !std::holds_alternative<std::string>(*a))
    throw std::out_of_range(full_name() + ": missing string attribute '" + std::string(key) +
                            "'");
  return std::get<std::string>(*a);
}

//===----------------------------------------------------------------------===//
// Module
//===----------------------------------------------------------------------===//

ValueId Module::new_value(Type type, DefSite def) {
  values_.push_back({std::move(type), def});
  return ValueId{static_cast<std::uint32_t>(values_.size() - 1)};
}

const ValueInfo& Module::info(ValueId v) const {
  if (!has_value(v)) throw std::out_of_range("unknown value id " + std::to_string(v.id));
  return values_[v.id];
}

void Module::set_type(ValueId v, Type type) {
  if (!has_value(v)) throw std::out_of_range("unknown value id " + std::to_string(v.id));
  values_[v.id].type = std::move(type);
}

namespace {

template <typename BlockT, typename Fn>
void walk_block(BlockT& block, const Fn& fn) {
  for (auto& op : block.ops) {
    fn(op);
    for (auto& region : op.regions)
      for (auto& b : region.blocks) walk_block(b, fn);
  }
}

}  // namespace

void walk(const Block& block, const std::function<void(const Operation&)>& fn) {
  walk_block(block, fn);
}

void walk(const Module& module, const std::function<void(const Operation&)>& fn) {
  for (const auto& func : module.functions()) {
    fn(func);
    for (const auto& region : func.regions)
      for (const auto& b : region.blocks) walk_block(b, fn);
  }
}

void walk(Module& module, const std::function<void(Operation&)>& fn) {
  for (auto& func : module.functions()) {
    fn(func);
    for (auto& region : func.regions)
      for (auto& b : region.blocks) walk_block(b, fn);
  }
}

void replace_uses(Module& module, const std::map<ValueId, ValueId>& mapping) {
  if (mapping.empty()) return;
  walk(module, [&](Operation& op) {
    for (auto& operand : op.operands) {
      // Chase chains so a -> b, b -> c resolves to c.
      for (auto it = mapping.find(operand); it != mapping.end(); it = mapping.find(operand))
        operand = it->second;
    }
  });
}

Operation make_op(Module& module, std::string dialect, std::string name,
                  std::vector<ValueId> operands, const std::vector<Type>& result_types,
                  std::map<std::string, Attribute, std::less<>> attributes) {
  Operation op;
  op.dialect = std::move(dialect);
  op.name = std::move(name);
  op.operands = std::move(operands);
  op.attributes = std::move(attributes);
  for (std::uint32_t i = 0; i < result_types.size(); ++i)
    op.results.push_back(module.new_result(result_types[i], i));
  return op;
}

std::size_t count_ops(const Module& module, std::string_view dialect, std::string_view name) {
  std::size_t n = 0;
  walk(module, [&](const Operation& op) {
    if (op.dialect == dialect && (name.empty() || op.name == name)) ++n;
  });
  return n;
}

//===----------------------------------------------------------------------===//
// Registry
//===----------------------------------------------------------------------===//

bool TypePattern::matches(const Type& t) const {
  return kinds.empty() || std::find(kinds.begin(), kinds.end(), t.kind()) != kinds.end();
}

std::string TypePattern::str() const {
  if (kinds.empty()) return "any";
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += " | ";
    switch (kinds[i]) {
      case TypeKind::F32: out += "f32"; break;
      case TypeKind::Index: out += "index"; break;
      case TypeKind::MemRefF32Dyn: out += "memref<-1xf32>"; break;
      case TypeKind::RVVVecF32M1: out += "!rvv.vfloat32m1"; break;
      case TypeKind::EmitCPtr: out += "!emitc.ptr"; break;
      case TypeKind::EmitCOpaque: out += "!emitc.opaque"; break;
    }
  }
  return out;
}

void DialectRegistry::add(OpSignature sig) {
  std::string key = sig.full_name();
  if (sigs_.count(key) != 0) {
    std::fprintf(stderr, "duplicate op registration: %s\n", key.c_str());
    std::abort();
  }
  sigs_.emplace(std::move(key), std::move(sig));
}

const OpSignature* DialectRegistry::lookup(std::string_view dialect,
                                           std::string_view name) const {
  std::string key;
  key.reserve(dialect.size() + name.size() + 1);
  key.append(dialect).append(".").append(name);
  auto it = sigs_.find(key);
  return it == sigs_.end() ? nullptr : &it->second;
}

std::size_t DialectRegistry::count_dialect(std::string_view dialect) const {
  return static_cast<std::size_t>(std::count_if(sigs_.begin(), sigs_.end(), [&](const auto& kv) {
    return kv.second.dialect == dialect;
  }));
}

std::vector<std::string> DialectRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& kv : sigs_) out.push_back(kv.first);
  return out;
}

//===----------------------------------------------------------------------===//
// Verifier
//===----------------------------------------------------------------------===//

namespace {

bool attr_has_kind(const Attribute& a, AttrKind k) {
  switch (k) {
    case AttrKind::Int: return std::holds_alternative<std::int64_t>(a);
    case AttrKind::Float: return std::holds_alternative<double>(a);
    case AttrKind::String: return std::holds_alternative<std::string>(a);
    case AttrKind::TypeAttr: return std::holds_alternative<Type>(a);
    case AttrKind::IntOrFloat:
      return std::holds_alternative<std::int64_t>(a) || std::holds_alternative<double>(a);
  }
  return false;
}

class Verifier {
 public:
  Verifier(const Module& m, const DialectRegistry& r) : module_(m), registry_(r) {
    walk(module_, [&](const Operation& op) {
      for (auto res : op.results) producers_.emplace(res, &op);
    });
  }

  std::vector<Diagnostic> run() {
    for (std::size_t i = 0; i < module_.functions().size(); ++i) {
      const Operation& func = module_.functions()[i];
      std::string path = "@" + func_label(func, i);
      if (!func.is("func", "func")) {
        report(path, "top-level operation must be func.func, got " + func.full_name());
        continue;
      }
      check_op(func, path);
      define_results(func, path);
    }
    return std::move(diags_);
  }

 private:
  static std::string func_label(const Operation& func, std::size_t i) {
    if (const Attribute* a = func.attr("sym_name"); a && std::holds_alternative<std::string>(*a))
      return std::get<std::string>(*a);
    return "<func#" + std::to_string(i) + ">";
  }

  void report(const std::string& path, std::string reason) {
    diags_.push_back({path, std::move(reason)});
  }

  void define(ValueId v, const std::string& path, DefSite expected) {
    if (!module_.has_value(v)) {
      report(path, fmt::format("defines unknown value %{}", v.id));
      return;
    }
    if (!defined_.insert(v).second) {
      report(path, fmt::format("value %{} defined more than once", v.id));
      return;
    }
    const DefSite& site = module_.info(v).def;
    if (site.kind != expected.kind || site.index != expected.index)
      report(path, fmt::format("value %{} has inconsistent defining site", v.id));
    visible_.insert(v);
  }

  void define_results(const Operation& op, const std::string& path) {
    for (std::uint32_t i = 0; i < op.results.size(); ++i)
      define(op.results[i], path, {DefSite::Kind::OpResult, i});
  }

  void check_block(const Block& block, const std::string& path) {
    std::vector<ValueId> scope;
    for (std::uint32_t i = 0; i < block.arguments.size(); ++i) {
      define(block.arguments[i], path, {DefSite::Kind::BlockArgument, i});
      scope.push_back(block.arguments[i]);
    }
    for (std::size_t i = 0; i < block.ops.size(); ++i) {
      const Operation& op = block.ops[i];
      std::string op_path = fmt::format("{}/{}:{}", path, i, op.full_name());
      check_op(op, op_path);
      const OpSignature* sig = registry_.lookup(op.dialect, op.name);
      if (sig && sig->is_terminator && i + 1 != block.ops.size())
        report(op_path, "terminator must be the last operation in its block");
      define_results(op, op_path);
      scope.insert(scope.end(), op.results.begin(), op.results.end());
    }
    for (auto v : scope) visible_.erase(v);
  }

  void check_op(const Operation& op, const std::string& path) {
    for (std::size_t i = 0; i < op.operands.size(); ++i) {
      ValueId v = op.operands[i];
      if (!module_.has_value(v))
        report(path, fmt::format("operand #{} refers to unknown value %{}", i, v.id));
      else if (visible_.count(v) == 0)
        report(path, fmt::format("operand #{} (%{}) used before definition or out of scope",
                                 i, v.id));
    }

    const OpSignature* sig = registry_.lookup(op.dialect, op.name);
    if (sig == nullptr) {
      report(path, "unregistered operation " + op.full_name());
    } else {
      check_signature(op, *sig, path);
    }

    for (std::size_t r = 0; r < op.regions.size(); ++r) {
      const Region& region = op.regions[r];
      if (region.blocks.size() != 1) {
        report(path, fmt::format("region #{} must contain exactly one block, has {}", r,
                                 region.blocks.size()));
        continue;
      }
      check_block(region.body(), path);
    }
  }

  void check_signature(const Operation& op, const OpSignature& sig, const std::string& path) {
    auto type_ok = [&](ValueId v, const TypePattern& p) {
      return !module_.has_value(v) || p.matches(module_.type(v));
    };

    std::size_t fixed = sig.operands.size();
    bool arity_ok = sig.variadic_operands ? op.operands.size() >= fixed
                                          : op.operands.size() == fixed;
    if (!arity_ok) {
      report(path, fmt::format("expected {}{} operands, got {}", sig.variadic_operands ? ">= " : "",
                               fixed, op.operands.size()));
    } else {
      for (std::size_t i = 0; i < op.operands.size(); ++i) {
        const TypePattern& p = i < fixed ? sig.operands[i] : *sig.variadic_operands;
        if (!type_ok(op.operands[i], p))
          report(path, fmt::format("operand #{} has type {}, expected {}", i,
                                   module_.type(op.operands[i]).str(), p.str()));
      }
    }

    std::size_t fixed_res = sig.results.size();
    bool res_ok = sig.variadic_results
                      ? op.results.size() >= fixed_res &&
                            op.results.size() - fixed_res <= sig.max_variadic_results
                      : op.results.size() == fixed_res;
    if (!res_ok) {
      report(path, fmt::format("unexpected result count {}", op.results.size()));
    } else {
      for (std::size_t i = 0; i < op.results.size(); ++i) {
        const TypePattern& p = i < fixed_res ? sig.results[i] : *sig.variadic_results;
        if (!type_ok(op.results[i], p))
          report(path, fmt::format("result #{} has type {}, expected {}", i,
                                   module_.type(op.results[i]).str(), p.str()));
      }
    }

    if (op.regions.size() != sig.region_count)
      report(path, fmt::format("expected {} regions, got {}", sig.region_count, op.regions.size()));

    for (const auto& [key, kind] : sig.attributes) {
      const Attribute* a = op.attr(key);
      if (a == nullptr)
        report(path, "missing attribute '" + key + "'");
      else if (!attr_has_kind(*a, kind))
        report(path, "attribute '" + key + "' has the wrong kind");
    }

    if (sig.verifier && arity_ok && res_ok) {
      VerifyContext ctx{module_, registry_, producers_};
      if (auto reason = sig.verifier(op, ctx)) report(path, *reason);
    }
  }

  const Module& module_;
  const DialectRegistry& registry_;
  std::map<ValueId, const Operation*> producers_;
  std::set<ValueId> defined_;
  std::set<ValueId> visible_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> verify(const Module& module, const DialectRegistry& registry) {
  return Verifier(module, registry).run();
}

//===----------------------------------------------------------------------===//
// Printer
//===----------------------------------------------------------------------===//

namespace {

class Printer {
 public:
  explicit Printer(const Module& m) : module_(m) {}

  std::string run() {
    if (module_.empty()) return "module { }\n";
    out_ += "module {\n";
    for (const auto& func : module_.functions()) print_op(func, 1);
    out_ += "}\n";
    return std::move(out_);
  }

 private:
  std::string name(ValueId v) {
    auto it = numbering_.find(v);
    if (it == numbering_.end()) it = numbering_.emplace(v, next_++).first;
    return "%" + std::to_string(it->second);
  }

  std::string type_list(const std::vector<ValueId>& vs) {
    std::string s;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i) s += ", ";
      s += module_.type(vs[i]).str();
    }
    return s;
  }

  void print_op(const Operation& op, int depth) {
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    std::string line = indent;
    if (!op.results.empty()) {
      for (std::size_t i = 0; i < op.results.size(); ++i) {
        if (i) line += ", ";
        line += name(op.results[i]);
      }
      line += " = ";
    }
    line += op.full_name() + "(";
    for (std::size_t i = 0; i < op.operands.size(); ++i) {
      if (i) line += ", ";
      line += name(op.operands[i]);
    }
    line += ")";
    if (!op.attributes.empty()) {
      line += " {";
      bool first = true;
      for (const auto& [k, v] : op.attributes) {
        if (!first) line += ", ";
        first = false;
        line += k + " = " + attribute_str(v);
      }
      line += "}";
    }
    line += " : (" + type_list(op.operands) + ") -> ";
    if (op.results.size() == 1)
      line += module_.type(op.results.front()).str();
    else
      line += "(" + type_list(op.results) + ")";

    if (op.regions.empty()) {
      out_ += line + "\n";
      return;
    }
    out_ += line + " {\n";
    for (const auto& region : op.regions) {
      for (const auto& block : region.blocks) {
        out_ += indent + "  ^bb0(";
        for (std::size_t i = 0; i < block.arguments.size(); ++i) {
          if (i) out_ += ", ";
          out_ += name(block.arguments[i]) + ": " + module_.type(block.arguments[i]).str();
        }
        out_ += "):\n";
        for (const auto& inner : block.ops) print_op(inner, depth + 1);
      }
    }
    out_ += indent + "}\n";
  }

  const Module& module_;
  std::map<ValueId, std::uint32_t> numbering_;
  std::uint32_t next_ = 0;
  std::string out_;
};

}  // namespace

std::string print_ir(const Module& module) { return Printer(module).run(); }

}  // namespace rvvgen::ir
