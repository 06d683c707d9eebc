#include <gtest/gtest.h>

#include "rvvgen/harness_gen.hpp"
#include "test_support.hpp"

namespace rvvgen {
namespace {

using harness::BlockingParams;
using testing::count_substr;

TEST(DriverTest, InteriorTilesUseFullKernel) {
  BlockingParams p{40, 128, 60, 20, 6};
  std::string text = harness::generate_driver(p).text;
  EXPECT_NE(text.find("ukernels[19][5]"), std::string::npos);
  EXPECT_NE(text.find("#define GEMM_MC 40"), std::string::npos);
  EXPECT_NE(text.find("#define GEMM_KC 128"), std::string::npos);
  EXPECT_NE(text.find("#define GEMM_NC 60"), std::string::npos);
  EXPECT_NE(text.find("ukernels[mr - 1][nr - 1]"), std::string::npos);
}

TEST(DriverTest, ParamsValidated) {
  EXPECT_THROW((BlockingParams{0, 1, 1, 1, 1}).validate(), ConfigError);
  EXPECT_THROW((BlockingParams{1, 1, 1, 0, 1}).validate(), ConfigError);
  EXPECT_NO_THROW((BlockingParams{7, 3, 5, 8, 4}).validate());
}

TEST(CasesTest, DefaultLayerShapes) {
  auto cases = harness::default_cases();
  ASSERT_EQ(cases.size(), 10u);
  const std::vector<std::tuple<std::string, int, int, int>> want = {
      {"S1", 1000, 1000, 1000}, {"S2", 2000, 2000, 2000}, {"S3", 3000, 3000, 3000},
      {"S4", 4000, 4000, 4000}, {"S5", 5000, 5000, 5000}, {"B1", 1024, 384, 1024},
      {"B2", 384, 384, 64},     {"B3", 64, 384, 384},     {"B4", 4096, 384, 1024},
      {"B5", 1024, 384, 4096}};
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(cases[i].id, std::get<0>(want[i]));
    EXPECT_EQ(cases[i].shape.m, std::get<1>(want[i]));
    EXPECT_EQ(cases[i].shape.n, std::get<2>(want[i]));
    EXPECT_EQ(cases[i].shape.k, std::get<3>(want[i]));
  }
}

TEST(CasesTest, Parse) {
  auto cases = harness::parse_cases("4x4x4,37x29x53", 3);
  ASSERT_EQ(cases.size(), 2u);
  EXPECT_EQ(cases[0].id, "c1");
  EXPECT_EQ(cases[1].id, "c2");
  EXPECT_EQ(cases[1].shape.m, 37);
  EXPECT_EQ(cases[1].shape.n, 29);
  EXPECT_EQ(cases[1].shape.k, 53);
  EXPECT_EQ(cases[1].repetitions, 3);
  for (const char* bad : {"", "4x4", "4x4x0", "axbxc", "4x4x4,", "4x4x4x4"})
    EXPECT_THROW(harness::parse_cases(bad), ConfigError) << bad;
}

TEST(MainTest, CsvAndSeed) {
  std::string text = harness::generate_main(harness::parse_cases("4x4x4")).text;
  EXPECT_NE(text.find("id,m,n,k,mr,nr,gflops,max_rel_err,status"), std::string::npos);
  EXPECT_NE(text.find("0x2545F491u"), std::string::npos);
  EXPECT_NE(text.find("2.0 * "), std::string::npos);
  EXPECT_EQ(count_substr(text, "{\"c1\", 4, 4, 4,"), 1u);
}

TEST(MakefileTest, Flags) {
  harness::ToolchainOptions o;
  o.vlen_bits = 256;
  o.kernel_file = "ukernels_8x4_vlen256.c";
  std::string mk = harness::generate_makefile(o);
  EXPECT_NE(mk.find("-DVLEN_BITS=256"), std::string::npos);
  EXPECT_NE(mk.find("-DRVV_EMULATE"), std::string::npos);
  EXPECT_NE(mk.find("-O2"), std::string::npos);
  EXPECT_NE(mk.find("-march=rv64gcv"), std::string::npos);
  EXPECT_NE(mk.find("-O3"), std::string::npos);
  for (const char* target : {"\nhost:", "\nnative:", "\nrun-host:"})
    EXPECT_NE(mk.find(target), std::string::npos) << target;
}

TEST(TestbenchTest, FileSet) {
  auto tb = harness::generate_testbench({8, 4, DType::F32, 256}, {}, harness::default_cases());
  EXPECT_EQ(tb.kernel_count, 32u);
  std::vector<std::string> names;
  for (const auto& f : tb.files) names.push_back(f.name);
  EXPECT_EQ(names, (std::vector<std::string>{"ukernels_8x4_vlen256.c", "gemm_driver.c",
                                             "naive_ref.c", "bench_main.c", "rvv_compat.h",
                                             "rvv_shim.h", "Makefile", "run_host.sh"}));
  for (const auto& f : tb.files) EXPECT_EQ(f.executable, f.name == "run_host.sh") << f.name;
}

TEST(TestbenchTest, BlockingTakesTileFromConfig) {
  auto tb = harness::generate_testbench({20, 6, DType::F32, 128}, {40, 128, 60, 1, 1},
                                        harness::parse_cases("4x4x4"));
  EXPECT_EQ(tb.kernel_count, 120u);
  for (const auto& f : tb.files)
    if (f.name == "gemm_driver.c") EXPECT_NE(f.contents.find("ukernels[19][5]"), std::string::npos);
}

TEST(RuntimeHeadersTest, CompatSelectsShim) {
  const std::string& compat = harness::rvv_compat_header();
  EXPECT_NE(compat.find("#ifdef RVV_EMULATE"), std::string::npos);
  EXPECT_NE(compat.find("#include \"rvv_shim.h\""), std::string::npos);
  EXPECT_NE(compat.find("#include <riscv_vector.h>"), std::string::npos);
  const std::string& shim = harness::rvv_shim_header();
  for (const char* fn : {"__riscv_vle32_v_f32m1", "__riscv_vse32_v_f32m1", "__riscv_vfmacc_vf_f32m1"})
    EXPECT_NE(shim.find(fn), std::string::npos) << fn;
}

// The embedded copies are the checked-in headers.
TEST(RuntimeHeadersTest, MatchCheckedInFiles) {
  EXPECT_EQ(harness::rvv_compat_header(),
            testing::read_file(std::string(RVVGEN_RUNTIME_DIR) + "/rvv_compat.h"));
  EXPECT_EQ(harness::rvv_shim_header(),
            testing::read_file(std::string(RVVGEN_RUNTIME_DIR) + "/rvv_shim.h"));
}

}  // namespace
}  // namespace rvvgen
