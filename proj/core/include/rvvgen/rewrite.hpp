#pragma once

// Greedy pattern rewriting over ir::Module.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvvgen/ir.hpp"

namespace rvvgen::ir {

// A pattern matched an operation whose operands break the pattern's
// precondition. Always a builder or pass-ordering bug.
class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rewrite {
  // Spliced in place of the matched op. May define the matched op's result
  // ids directly, in which case no mapping is needed for them.
  std::vector<Operation> replacement;
  std::map<ValueId, ValueId> value_map;
};

class RewritePattern {
 public:
  virtual ~RewritePattern() = default;

  virtual std::string name() const = 0;
  virtual bool match(const Operation& op, const Module& module) const = 0;
  // Throws PatternError when the matched op violates the precondition.
  virtual Rewrite rewrite(const Operation& op, Module& module) const = 0;
  // Dialects of the ops this pattern creates; must be a subset of {emitc, func}.
  virtual std::set<std::string> output_dialects() const = 0;
};

using PatternList = std::vector<std::shared_ptr<const RewritePattern>>;

struct PassResult {
  Module module;
  std::size_t rewrites_applied = 0;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

struct ApplyOptions {
  // When set, each step rewrites a uniformly chosen matching op instead of
  // the first one in pre-order. Used to check order independence.
  std::optional<std::uint64_t> shuffle_seed;
};

// Rewrites until no pattern matches. Throws PatternError if a pattern
// misbehaves (bad output dialect, no progress on its own dialect) or the
// attempt budget of ops * patterns * 4 is exhausted.
PassResult apply_patterns(Module module, const PatternList& patterns, ApplyOptions options = {});

}  // namespace rvvgen::ir
