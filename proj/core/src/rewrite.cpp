#include "rvvgen/rewrite.hpp"

#include <fmt/format.h>

#include <random>

namespace rvvgen::ir {

namespace {

const std::set<std::string> kTerminalDialects = {"emitc", "func"};

std::size_t deep_count(const std::vector<Operation>& ops, const std::string& dialect) {
  std::size_t n = 0;
  for (const auto& op : ops) {
    if (op.dialect == dialect) ++n;
    for (const auto& region : op.regions)
      for (const auto& block : region.blocks) n += deep_count(block.ops, dialect);
  }
  return n;
}

std::size_t total_ops(const Module& module) {
  std::size_t n = 0;
  walk(module, [&](const Operation&) { ++n; });
  return n;
}

class Driver {
 public:
  Driver(Module module, const PatternList& patterns)
      : module_(std::move(module)), patterns_(patterns) {
    for (const auto& p : patterns_) {
      for (const auto& d : p->output_dialects()) {
        if (kTerminalDialects.count(d) == 0)
          throw PatternError(fmt::format("pattern {} declares non-terminal output dialect '{}'",
                                         p->name(), d));
      }
    }
    budget_ = total_ops(module_) * patterns_.size() * 4;
  }

  PassResult run(const ApplyOptions& options) {
    if (options.shuffle_seed) {
      std::mt19937_64 rng(*options.shuffle_seed);
      while (step_random(rng)) {
      }
    } else {
      while (sweep_functions() != 0) {
      }
    }
    return {std::move(module_), rewrites_, {}};
  }

 private:
  const RewritePattern* find_pattern(const Operation& op) const {
    for (const auto& p : patterns_)
      if (p->match(op, module_)) return p.get();
    return nullptr;
  }

  // Rewrites block.ops[index] in place; returns the replacement length.
  std::size_t apply(std::vector<Operation>& ops, std::size_t index, const RewritePattern& pattern) {
    if (++attempts_ > budget_)
      throw PatternError(fmt::format("rewrite budget of {} attempts exhausted", budget_));

    Operation matched = std::move(ops[index]);
    Rewrite rw = pattern.rewrite(matched, module_);

    for (const auto& op : rw.replacement) {
      if (pattern.output_dialects().count(op.dialect) == 0)
        throw PatternError(fmt::format("pattern {} produced {} outside its declared dialects",
                                       pattern.name(), op.full_name()));
    }
    std::size_t before = 1;
    for (const auto& region : matched.regions)
      for (const auto& block : region.blocks) before += deep_count(block.ops, matched.dialect);
    if (deep_count(rw.replacement, matched.dialect) >= before)
      throw PatternError(fmt::format("pattern {} did not reduce the number of {} ops",
                                     pattern.name(), matched.dialect));

    std::size_t n = rw.replacement.size();
    ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(index));
    ops.insert(ops.begin() + static_cast<std::ptrdiff_t>(index),
               std::make_move_iterator(rw.replacement.begin()),
               std::make_move_iterator(rw.replacement.end()));
    replace_uses(module_, rw.value_map);
    ++rewrites_;
    return n;
  }

  std::size_t sweep_functions() {
    std::size_t n = 0;
    for (auto& func : module_.functions()) n += sweep_op_regions(func);
    return n;
  }

  std::size_t sweep_op_regions(Operation& op) {
    std::size_t n = 0;
    for (auto& region : op.regions)
      for (auto& block : region.blocks) n += sweep(block.ops);
    return n;
  }

  std::size_t sweep(std::vector<Operation>& ops) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < ops.size();) {
      if (const RewritePattern* p = find_pattern(ops[i])) {
        i += apply(ops, i, *p);
        ++n;
      } else {
        n += sweep_op_regions(ops[i]);
        ++i;
      }
    }
    return n;
  }

  struct Site {
    std::vector<Operation>* ops;
    std::size_t index;
    const RewritePattern* pattern;
  };

  void collect(std::vector<Operation>& ops, std::vector<Site>& sites) {
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (const RewritePattern* p = find_pattern(ops[i])) sites.push_back({&ops, i, p});
      for (auto& region : ops[i].regions)
        for (auto& block : region.blocks) collect(block.ops, sites);
    }
  }

  bool step_random(std::mt19937_64& rng) {
    std::vector<Site> sites;
    for (auto& func : module_.functions())
      for (auto& region : func.regions)
        for (auto& block : region.blocks) collect(block.ops, sites);
    if (sites.empty()) return false;
    std::uniform_int_distribution<std::size_t> pick(0, sites.size() - 1);
    const Site& s = sites[pick(rng)];
    apply(*s.ops, s.index, *s.pattern);
    return true;
  }

  Module module_;
  const PatternList& patterns_;
  std::size_t rewrites_ = 0;
  std::size_t attempts_ = 0;
  std::size_t budget_ = 0;
};

}  // namespace

PassResult apply_patterns(Module module, const PatternList& patterns, ApplyOptions options) {
  return Driver(std::move(module), patterns).run(options);
}

}  // namespace rvvgen::ir
