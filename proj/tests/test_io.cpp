#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "blobrd/io.hpp"

using namespace blobrd;

TEST(Format, FullPrecisionScientific)
{
  EXPECT_EQ(format_double(0.1), "1.00000000000000006e-01");
  EXPECT_EQ(format_double(kDiffusionLimited), "inf");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(FieldCsv, HeaderAndRowOrder)
{
  const GridSpec g3 = GridSpec::cube(3, 4, 0.5);
  ScalarField f(g3);
  f[1] = 2.0;
  std::ostringstream os;
  write_field_csv(os, f);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "i,j,k,x,y,z,value");
  std::getline(is, line);
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 6), "1,0,0,");
  EXPECT_NE(line.find("7.50000000000000000e-01"), std::string::npos);
  EXPECT_NE(line.find("2.00000000000000000e+00"), std::string::npos);

  std::ostringstream os2;
  write_field_csv(os2, ScalarField(GridSpec::cube(2, 4, 1.0)));
  const std::string text = os2.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "i,j,x,y,value");
  // header plus 16 rows
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);
}

TEST(BlobFile, RoundTrip)
{
  const GridSpec g = GridSpec::cube(3, 8, 0.5);
  BlobSet b(g, KernelKind::ThreePoint, {Vec3{1, 2, 3}, Vec3{0.25, 1.5, 2.75}},
            std::vector<double>{kDiffusionLimited, 4.5});
  std::stringstream ss;
  write_blob_file(ss, b);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "# d=3 h=5.00000000000000000e-01 kernel=3");
  const BlobFile r = read_blob_file(ss);
  EXPECT_EQ(r.dim, 3);
  EXPECT_EQ(r.h, 0.5);
  EXPECT_EQ(r.kernel, KernelKind::ThreePoint);
  ASSERT_EQ(r.positions.size(), 2u);
  EXPECT_EQ(r.positions[1], b.positions()[1]);
  EXPECT_TRUE(std::isinf(r.kappa[0]));
  EXPECT_EQ(r.kappa[1], 4.5);
  const BlobSet back = r.to_blobs(g);
  EXPECT_EQ(back.size(), 2u);
  EXPECT_THROW(r.to_blobs(GridSpec::cube(3, 8, 1.0)), ConfigError);
}

TEST(BlobFile, TwoDimensionalAndErrors)
{
  std::istringstream two("# d=2 h=1 kernel=4\n1.5 2.5 inf\n3 3 0 2\n");
  const BlobFile r = read_blob_file(two);
  EXPECT_EQ(r.dim, 2);
  ASSERT_EQ(r.positions.size(), 2u);
  EXPECT_EQ(r.kappa[1], 2.0);

  std::istringstream no_header("1 2 3 inf\n");
  EXPECT_THROW(read_blob_file(no_header), ConfigError);
  std::istringstream bad_kernel("# d=3 h=1 kernel=5\n");
  EXPECT_THROW(read_blob_file(bad_kernel), ConfigError);
  std::istringstream bad_number("# d=3 h=1 kernel=4\n1 2 x inf\n");
  try
  {
    read_blob_file(bad_number, "b.txt");
    FAIL();
  }
  catch (const ConfigError &e)
  {
    EXPECT_NE(std::string(e.what()).find("b.txt:2"), std::string::npos);
  }
}

TEST(RunConfig, ParsingOverridesAndContext)
{
  RunConfig cfg;
  std::istringstream file("# comment\nL = 32,48\nkernel=3  # trailing\nrtol=1e-8\nflag=yes\n");
  cfg.load(file, "run.cfg");
  cfg.set_from("kernel=4", "argument 1");
  EXPECT_EQ(cfg.get_int("kernel", 0), 4);
  EXPECT_EQ(cfg.get_int_list("L", {}), (std::vector<int>{32, 48}));
  EXPECT_DOUBLE_EQ(cfg.get_double("rtol", 0.0), 1e-8);
  EXPECT_TRUE(cfg.get_bool("flag", false));
  EXPECT_EQ(cfg.get_string("missing", "dflt"), "dflt");
  EXPECT_EQ(cfg.context("rtol"), "run.cfg:4: key 'rtol'");

  cfg.set_from("m=2.5", "argument 2");
  EXPECT_THROW(cfg.get_int("m", 1), ConfigError);
  EXPECT_THROW(cfg.set_from("novalue", "argument 3"), ConfigError);
  EXPECT_THROW(cfg.require_known({"kernel", "L", "rtol"}), ConfigError);
  EXPECT_NO_THROW(cfg.require_known({"kernel", "L", "rtol", "flag", "m"}));
}

TEST(SolveReport, Columns)
{
  std::ostringstream os;
  write_solve_report(os, {{"precond-bench", 16, 64, "schur", 5, 1, 7, 49, 1e-10}});
  EXPECT_EQ(os.str(), "experiment,L,N,precond,m,n,outer_iters,total_cycles,final_residual\n"
                      "precond-bench,16,64,schur,5,1,7,49,1.00000000000000004e-10\n");
}

TEST(TableCsv, WritesHeaderAndRows)
{
  ExperimentResult r;
  r.name = "t";
  r.columns = {"a", "b"};
  r.add_row({1.0, 2.0});
  EXPECT_THROW(r.add_row({1.0}), ConfigError);
  std::ostringstream os;
  write_table_csv(os, r);
  EXPECT_EQ(os.str(), "a,b\n1.00000000000000000e+00,2.00000000000000000e+00\n");
  EXPECT_DOUBLE_EQ(r.at(0, "b"), 2.0);
  EXPECT_THROW(r.column("c"), ConfigError);
}
