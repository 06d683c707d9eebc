#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <unistd.h>

#include <fstream>
#include <ostream>

#include "rvvgen/c_emitter.hpp"
#include "rvvgen/dialects.hpp"
#include "rvvgen/harness_gen.hpp"
#include "rvvgen/kernel_builder.hpp"
#include "rvvgen/lowering.hpp"

namespace rvvgen::cli {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& contents, bool executable) {
  fs::path tmp = path;
  tmp += fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  if (executable) {
    fs::permissions(tmp,
                    fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add);
  }
  fs::rename(tmp, path);
}

namespace {

struct KernelFlags {
  int mr = 8;
  int nr = 4;
  int vlen = 256;
  std::string dtype = "f32";

  void attach(CLI::App& app) {
    app.add_option("--mr", mr, "Rows of the register tile")->capture_default_str();
    app.add_option("--nr", nr, "Columns of the register tile")->capture_default_str();
    app.add_option("--vlen", vlen, "Vector register width in bits (128, 256, 512)")
        ->capture_default_str();
    app.add_option("--dtype", dtype, "Element type")->capture_default_str();
  }

  KernelConfig config() const {
    KernelConfig c;
    c.mr = mr;
    c.nr = nr;
    c.vlen_bits = vlen;
    c.dtype = parse_dtype(dtype);
    c.validate();
    plan_registers(c);
    return c;
  }
};

// Raised for pipeline diagnostics; maps to exit code 1.
struct StageFailure {
  std::vector<ir::Diagnostic> diagnostics;
};

ir::Module lower_to(ir::Module module, const std::string& stage) {
  using Pass = ir::PassResult (*)(ir::Module);
  const std::pair<const char*, Pass> passes[] = {
      {"memref", lowering::pass_memref_to_emitc},
      {"arith", lowering::pass_arith_to_emitc},
      {"scf", lowering::pass_scf_to_emitc},
      {"rvv", lowering::pass_rvv_to_emitc},
  };
  if (stage == "built") return module;
  for (const auto& [name, pass] : passes) {
    ir::PassResult r = pass(std::move(module));
    if (!r.ok()) throw StageFailure{std::move(r.diagnostics)};
    module = std::move(r.module);
    if (stage == name) break;
  }
  return module;
}

void ensure_dir(const fs::path& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generates RISC-V Vector GEMM micro-kernels, their C sources and a test bench",
               "rvvgen"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print version information");

  KernelFlags ir_flags, emit_flags, tb_flags;
  std::string stage = "built";
  std::string emit_out = ".";
  std::string tb_out = "testbench";
  harness::BlockingParams blocking;
  std::string cases_text;
  int reps = 1;

  CLI::App* ir_cmd = app.add_subcommand("ir", "Print the kernel IR after a lowering stage");
  ir_flags.attach(*ir_cmd);
  ir_cmd->add_option("--stage", stage, "built, memref, arith, scf or rvv")
      ->check(CLI::IsMember({"built", "memref", "arith", "scf", "rvv"}))
      ->capture_default_str();

  CLI::App* emit_cmd = app.add_subcommand("emit", "Write the C source of one kernel");
  emit_flags.attach(*emit_cmd);
  emit_cmd->add_option("--out", emit_out, "Output directory")->capture_default_str();

  CLI::App* tb_cmd =
      app.add_subcommand("testbench", "Write the kernel family, GEMM driver, bench and Makefile");
  tb_flags.attach(*tb_cmd);
  tb_cmd->add_option("--out", tb_out, "Output directory")->capture_default_str();
  tb_cmd->add_option("--mc", blocking.mc, "Rows of the A cache block")->capture_default_str();
  tb_cmd->add_option("--kc", blocking.kc, "Depth of the cache blocks")->capture_default_str();
  tb_cmd->add_option("--nc", blocking.nc, "Columns of the B cache block")->capture_default_str();
  tb_cmd->add_option("--cases", cases_text, "Shapes MxNxK[,MxNxK...] (default: layer table)");
  tb_cmd->add_option("--reps", reps, "Timed repetitions per case")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  if (show_version) {
    out << fmt::format("rvvgen {} (ir format {})\n", kToolVersion, kIrFormatVersion);
    return kOk;
  }

  try {
    if (ir_cmd->parsed()) {
      KernelConfig config = ir_flags.config();
      ir::Module module = lower_to(build_microkernel(config), stage);
      out << ir::print_ir(module);
      return kOk;
    }

    if (emit_cmd->parsed()) {
      KernelConfig config = emit_flags.config();
      ir::Module module = lower_to(build_microkernel(config), "rvv");
      std::string text = emit::emit_c(module).text;
      fs::path dir(emit_out);
      ensure_dir(dir);
      fs::path file =
          dir / fmt::format("ukernel_{}x{}_vlen{}.c", config.mr, config.nr, config.vlen_bits);
      write_file_atomic(file, text);
      out << file.string() << "\n";
      return kOk;
    }

    if (tb_cmd->parsed()) {
      KernelConfig config = tb_flags.config();
      std::vector<harness::BenchCase> cases =
          cases_text.empty() ? harness::default_cases() : harness::parse_cases(cases_text, reps);
      if (cases_text.empty())
        for (auto& c : cases) c.repetitions = reps;
      if (reps < 1) throw ConfigError("--reps must be >= 1");
      harness::Testbench tb = harness::generate_testbench(config, blocking, cases);
      fs::path dir(tb_out);
      ensure_dir(dir);
      for (const auto& f : tb.files) write_file_atomic(dir / f.name, f.contents, f.executable);
      out << fmt::format("kernels: {} ({}x{} family, vlen {})\n", tb.kernel_count, config.mr,
                         config.nr, config.vlen_bits);
      out << fmt::format("cases: {}\n", cases.size());
      for (const auto& f : tb.files) out << (dir / f.name).string() << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const StageFailure& f) {
    for (const auto& d : f.diagnostics) err << "error: " << d.str() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  out << app.help();
  return kUsage;
}

}  // namespace rvvgen::cli
