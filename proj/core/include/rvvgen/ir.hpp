#pragma once

// Generic SSA intermediate representation shared by every dialect of the
// generator: typed values, operations with nested single-block regions,
// function-level modules, a structural verifier and a deterministic printer.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rvvgen::ir {

enum class TypeKind : std::uint8_t {
  F32,
  Index,
  MemRefF32Dyn,  // memref<-1xf32>
  RVVVecF32M1,   // !rvv.vfloat32m1
  EmitCPtr,      // !emitc.ptr<elem>
  EmitCOpaque,   // !emitc.opaque<"text">
};

class Type {
 public:
  static Type f32() { return Type(TypeKind::F32); }
  static Type index() { return Type(TypeKind::Index); }
  static Type memref_f32() { return Type(TypeKind::MemRefF32Dyn); }
  static Type rvv_f32m1() { return Type(TypeKind::RVVVecF32M1); }
  // Only f32 pointees exist; anything else throws std::invalid_argument.
  static Type emitc_ptr(const Type& elem);
  // Throws std::invalid_argument on empty text.
  static Type emitc_opaque(std::string text);

  TypeKind kind() const { return kind_; }
  // Pointee kind for EmitCPtr; F32 otherwise unused.
  TypeKind pointee() const { return pointee_; }
  const std::string& opaque_text() const { return text_; }

  bool is(TypeKind k) const { return kind_ == k; }
  std::string str() const;

  friend bool operator==(const Type&, const Type&) = default;

 private:
  explicit Type(TypeKind kind) : kind_(kind) {}

  TypeKind kind_;
  TypeKind pointee_ = TypeKind::F32;
  std::string text_;
};

struct ValueId {
  std::uint32_t id = 0;
  friend auto operator<=>(const ValueId&, const ValueId&) = default;
};

struct DefSite {
  enum class Kind : std::uint8_t { BlockArgument, OpResult };
  Kind kind = Kind::OpResult;
  std::uint32_t index = 0;  // argument position or result position
};

struct ValueInfo {
  Type type;
  DefSite def;
};

using Attribute = std::variant<std::int64_t, double, std::string, Type>;

std::string attribute_str(const Attribute& attr);

struct Region;

struct Operation {
  std::string dialect;
  std::string name;
  std::vector<ValueId> operands;
  std::vector<ValueId> results;
  std::map<std::string, Attribute, std::less<>> attributes;
  std::vector<Region> regions;

  std::string full_name() const { return dialect + "." + name; }
  bool is(std::string_view d, std::string_view n) const {
    return dialect == d && name == n;
  }

  const Attribute* attr(std::string_view key) const;
  // Throws std::out_of_range if the attribute is absent or has another kind.
  std::int64_t int_attr(std::string_view key) const;
  const std::string& str_attr(std::string_view key) const;
};

struct Block {
  std::vector<ValueId> arguments;
  std::vector<Operation> ops;
};

struct Region {
  std::vector<Block> blocks;

  Block& body() { return blocks.front(); }
  const Block& body() const { return blocks.front(); }
};

// Owns the value table and the ordered list of top-level func.func ops.
// Value ids are handed out monotonically and never reused.
class Module {
 public:
  ValueId new_value(Type type, DefSite def);
  ValueId new_result(Type type, std::uint32_t index) {
    return new_value(std::move(type), {DefSite::Kind::OpResult, index});
  }
  ValueId new_argument(Type type, std::uint32_t index) {
    return new_value(std::move(type), {DefSite::Kind::BlockArgument, index});
  }

  bool has_value(ValueId v) const { return v.id < values_.size(); }
  const ValueInfo& info(ValueId v) const;
  const Type& type(ValueId v) const { return info(v).type; }
  // Retypes a value in place; every use observes the new type.
  void set_type(ValueId v, Type type);
  std::size_t value_count() const { return values_.size(); }

  std::vector<Operation>& functions() { return functions_; }
  const std::vector<Operation>& functions() const { return functions_; }

  bool empty() const { return functions_.empty(); }

 private:
  std::vector<ValueInfo> values_;
  std::vector<Operation> functions_;
};

// Pre-order walks over every operation, including those nested in regions.
void walk(const Module& module, const std::function<void(const Operation&)>& fn);
void walk(Module& module, const std::function<void(Operation&)>& fn);
void walk(const Block& block, const std::function<void(const Operation&)>& fn);

// Replaces every operand occurrence according to `mapping`.
void replace_uses(Module& module, const std::map<ValueId, ValueId>& mapping);

// Creates an operation whose results are fresh values of `result_types`.
Operation make_op(Module& module, std::string dialect, std::string name,
                  std::vector<ValueId> operands, const std::vector<Type>& result_types,
                  std::map<std::string, Attribute, std::less<>> attributes = {});

std::size_t count_ops(const Module& module, std::string_view dialect,
                      std::string_view name = {});

//===----------------------------------------------------------------------===//
// Signatures and registry
//===----------------------------------------------------------------------===//

// Accepts any of `kinds`; an empty list accepts every type.
struct TypePattern {
  std::vector<TypeKind> kinds;

  static TypePattern any() { return {}; }
  static TypePattern of(std::initializer_list<TypeKind> k) { return {k}; }
  bool matches(const Type& t) const;
  std::string str() const;
};

enum class AttrKind : std::uint8_t { Int, Float, String, TypeAttr, IntOrFloat };

struct Diagnostic {
  std::string path;    // e.g. "@ukernel_8x4_f32/2:scf.for"
  std::string reason;

  std::string str() const { return path + ": " + reason; }
};

class DialectRegistry;

struct VerifyContext {
  const Module& module;
  const DialectRegistry& registry;
  // Maps a value to the operation that defines it, if any.
  const std::map<ValueId, const Operation*>& producers;
};

// Extra per-operation checks beyond arity and operand/result types. Returns
// a reason string on failure.
using OpVerifier =
    std::function<std::optional<std::string>(const Operation&, const VerifyContext&)>;

struct OpSignature {
  std::string dialect;
  std::string name;
  std::vector<TypePattern> operands;
  // When set, any number of trailing operands matching this pattern follow.
  std::optional<TypePattern> variadic_operands;
  std::vector<TypePattern> results;
  std::optional<TypePattern> variadic_results;
  std::size_t max_variadic_results = SIZE_MAX;
  std::size_t region_count = 0;
  std::map<std::string, AttrKind, std::less<>> attributes;  // required
  bool is_terminator = false;
  OpVerifier verifier;

  std::string full_name() const { return dialect + "." + name; }
};

class DialectRegistry {
 public:
  // Aborts on duplicate registration.
  void add(OpSignature sig);
  const OpSignature* lookup(std::string_view dialect, std::string_view name) const;
  std::size_t size() const { return sigs_.size(); }
  std::size_t count_dialect(std::string_view dialect) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, OpSignature, std::less<>> sigs_;
};

std::vector<Diagnostic> verify(const Module& module, const DialectRegistry& registry);

// Textual form: values printed %N in definition order, one op per line,
// nested regions indented by two spaces.
std::string print_ir(const Module& module);

}  // namespace rvvgen::ir
