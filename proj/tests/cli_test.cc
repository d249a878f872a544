// Copyright 2026 The palstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "palstream/csv.h"
#include "palstream/image_io.h"
#include "palstream/regression.h"
#include "palstream/synth.h"

namespace palstream {
namespace {

namespace fs = std::filesystem;

const fs::path kData = PALSTREAM_DATA_DIR;

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("palstream_cli_" + std::to_string(getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    fs::path err = dir_ / "stderr.txt";
    std::string cmd = std::string("'") + PALSTREAM_CLI_PATH + "' " + args +
                      " 2>" + quote(err);
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
      r.out.append(buf.data(), n);
    }
    int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) {
    fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  fs::path dir_;
};

// One line on stderr, newline terminated.
void expect_single_line_error(const Result& r) {
  ASSERT_FALSE(r.err.empty());
  EXPECT_EQ(r.err.find('\n'), r.err.size() - 1) << r.err;
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
}

TEST_F(CliTest, DecideWalkThrough) {
  auto profile = write("p.txt",
                       "resolution=300x212\ncpu=0.2\nbattery=0.9\n"
                       "bandwidth_kbps=640\n");
  Result r = run("decide " + quote(profile) + " " +
                 quote(kData / "estimation_table.csv") + " " +
                 quote(kData / "reference_model.csv") + " --nominal-kbps 1000");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "compressed,11.605460,12,28,640,800,28,20.6\n");
}

TEST_F(CliTest, DecideHighBandwidthIsFullTransmission) {
  Result r = run("decide " + quote(kData / "profile_desktop.txt") + " " +
                 quote(kData / "estimation_table.csv") + " " +
                 quote(kData / "reference_model.csv") + " --theta-kbps 800 --header");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out,
            "mode,mu_real,mu_int,target_psnr,sigma,theta,row_psnr,row_size\n"
            "full_transmission,,,,950,800,,\n");
}

TEST_F(CliTest, DecideNeedsExactlyOneThreshold) {
  Result r = run("decide " + quote(kData / "profile_thin_client.txt") + " " +
                 quote(kData / "estimation_table.csv") + " " +
                 quote(kData / "reference_model.csv"));
  EXPECT_EQ(r.status, 2);
  expect_single_line_error(r);
}

TEST_F(CliTest, BadProfileIsFormatError) {
  auto profile = write("p.txt", "resolution=300x212\ncpu=2\n");
  Result r = run("decide " + quote(profile) + " " +
                 quote(kData / "estimation_table.csv") + " " +
                 quote(kData / "reference_model.csv") + " --nominal-kbps 1000");
  EXPECT_EQ(r.status, 3);
  expect_single_line_error(r);
}

TEST_F(CliTest, CompressReportsFactorOfSix) {
  save_ppm(dir_ / "img.ppm", synth::photo({256, 256}, 2));
  Result r = run("compress " + quote(dir_ / "img.ppm") + " --mu 16 --out " +
                 quote(dir_ / "img.pqf"));
  ASSERT_EQ(r.status, 0) << r.err;
  auto lines = csv::split(csv::trim(r.out), '\n');
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "image,width,height,mu,bytes,size_kb,psnr_db,cr");
  auto f = csv::split(lines[1]);
  EXPECT_EQ(f[4], "32830");
  EXPECT_EQ(f[7], "5.9912");
  EXPECT_EQ(fs::file_size(dir_ / "img.pqf"), 32830u);
}

TEST_F(CliTest, CompressRejectsPaletteOfOne) {
  save_ppm(dir_ / "img.ppm", synth::photo({16, 16}, 2));
  Result r = run("compress " + quote(dir_ / "img.ppm") + " --mu 1");
  EXPECT_EQ(r.status, 2);
  expect_single_line_error(r);
}

TEST_F(CliTest, CompressTooFewColorsIsInfeasible) {
  save_ppm(dir_ / "flat.ppm", RgbImage(8, 8, std::vector<Rgb>(64, Rgb{5, 5, 5})));
  Result r = run("compress " + quote(dir_ / "flat.ppm") + " --mu 4");
  EXPECT_EQ(r.status, 5);
  expect_single_line_error(r);
}

TEST_F(CliTest, HistoryFormatMatchesSchema) {
  save_ppm(dir_ / "thin.ppm", synth::photo({300, 212}, 4));
  Result r = run("compress " + quote(dir_ / "thin.ppm") +
                 " --mu 8,16 --format history");
  ASSERT_EQ(r.status, 0) << r.err;
  auto lines = csv::split(csv::trim(r.out), '\n');
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "image,resolution_code,mu,size_kb,psnr_db,cr");
  EXPECT_EQ(lines[1].substr(0, 9), "thin,1,8,");
}

TEST_F(CliTest, RoundTripThroughDecompress) {
  RgbImage img = synth::desktop({64, 40}, 9);
  save_ppm(dir_ / "in.ppm", img);
  ASSERT_EQ(run("compress " + quote(dir_ / "in.ppm") + " --mu 32 --out " +
                quote(dir_ / "x.pqf"))
                .status,
            0);
  Result d = run("decompress " + quote(dir_ / "x.pqf") + " --out " +
                 quote(dir_ / "out.ppm"));
  ASSERT_EQ(d.status, 0) << d.err;
  EXPECT_EQ(d.out, "width,height,mu\n64,40,32\n");
  Result m = run("metrics " + quote(dir_ / "in.ppm") + " " + quote(dir_ / "out.ppm"));
  ASSERT_EQ(m.status, 0) << m.err;
  EXPECT_EQ(m.out.substr(0, 32), "mse,frame_mse,frame_error,psnr_d");
}

TEST_F(CliTest, DecompressGarbageIsFormatError) {
  auto bad = write("bad.pqf", "PQF2 not really");
  Result r = run("decompress " + quote(bad) + " --out " + quote(dir_ / "o.ppm"));
  EXPECT_EQ(r.status, 3);
  expect_single_line_error(r);
}

TEST_F(CliTest, MetricsOfIdenticalImagesIsInfinite) {
  save_ppm(dir_ / "a.ppm", synth::photo({20, 10}, 1));
  Result r = run("metrics " + quote(dir_ / "a.ppm") + " " + quote(dir_ / "a.ppm"));
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "mse,frame_mse,frame_error,psnr_db\n0,0,0,inf\n");
}

TEST_F(CliTest, MetricsSizeMismatchIsUsageError) {
  save_ppm(dir_ / "a.ppm", synth::photo({20, 10}, 1));
  save_ppm(dir_ / "b.ppm", synth::photo({10, 20}, 1));
  Result r = run("metrics " + quote(dir_ / "a.ppm") + " " + quote(dir_ / "b.ppm"));
  EXPECT_EQ(r.status, 2);
  expect_single_line_error(r);
}

TEST_F(CliTest, FitExcludesRowsOutsideWindow) {
  Result r = run("fit " + quote(kData / "reference_history.csv") + " --out " +
                 quote(dir_ / "m.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  // chip_designer mu=8 (20.1001 dB) is data row 25 and must not be listed.
  EXPECT_EQ(r.out.find("\n25,chip_designer"), std::string::npos);
  EXPECT_NE(r.out.find("\n29,chip_designer,128,"), std::string::npos);
  std::string model = slurp(dir_ / "m.csv");
  EXPECT_NE(model.find("# fitted on 27 of 35 rows"), std::string::npos);
  EXPECT_EQ(regression::parse_model_csv(model).k(), 3u);
}

TEST_F(CliTest, FitRecoversNoiselessCoefficients) {
  std::string csv = "image,resolution_code,mu,size_kb,psnr_db,cr\n";
  int row = 0;
  for (int code : {1, 2, 5, 7}) {
    for (double size : {10.0, 56.0, 130.0}) {
      for (double psnr : {26.0, 31.0, 44.0}) {
        double cls = code <= 3 ? 1.0 : 2.0;
        // Chosen so every mu is a whole number.
        double mu = 4 + 0.5 * size - 3 * cls + 2 * psnr;
        csv += "img" + std::to_string(row++) + "," + std::to_string(code) + "," +
               csv::format_double(mu) + "," + csv::format_double(size) + "," +
               csv::format_double(psnr) + ",1\n";
      }
    }
  }
  auto history = write("h.csv", csv);
  Result r = run("fit " + quote(history) + " --out " + quote(dir_ / "m.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  auto m = regression::parse_model_csv(slurp(dir_ / "m.csv"));
  const double want[] = {4, 0.5, -3, 2};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(m.beta[j], want[j], 1e-9);
  EXPECT_EQ(slurp(dir_ / "m.csv").find("# removed_rows="), std::string::npos);
}

TEST_F(CliTest, FitReportsPlantedOutlierByDataRow) {
  std::string csv = "image,resolution_code,mu,size_kb,psnr_db,cr\n";
  int row = 0;
  for (int code : {1, 6}) {
    for (double size : {12.0, 40.0, 90.0, 200.0}) {
      for (double psnr : {26.0, 30.0, 35.0, 41.0}) {
        double cls = code <= 3 ? 1.0 : 2.0;
        double mu = 0.5 * size + 5 * cls + psnr;
        if (row == 13) mu += 80;
        csv += "img" + std::to_string(row++) + "," + std::to_string(code) + "," +
               csv::format_double(mu) + "," +
               csv::format_double(size) + "," + csv::format_double(psnr) + ",1\n";
      }
    }
  }
  // A row outside the PSNR window shifts dataset rows against data rows.
  csv.insert(csv.find('\n') + 1, "dark,1,8,3,12,1\n");
  auto history = write("h.csv", csv);
  Result r = run("fit " + quote(history) + " --out " + quote(dir_ / "m.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(slurp(dir_ / "m.csv").find("# removed_rows=14\n"), std::string::npos);
}

TEST_F(CliTest, FitWithTooFewRowsIsNumericError) {
  auto history = write("h.csv",
                       "image,resolution_code,mu,size_kb,psnr_db,cr\n"
                       "a,1,8,10,30,1\nb,6,16,20,31,1\nc,1,32,30,33,1\n");
  Result r = run("fit " + quote(history));
  EXPECT_EQ(r.status, 4);
  expect_single_line_error(r);
}

TEST_F(CliTest, GenTablePinsPublishedRows) {
  Result r = run("gen-table " + quote(kData / "reference_history.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\n1,300,212,28,20.6\n"), std::string::npos);
  EXPECT_EQ(r.out, slurp(kData / "estimation_table.csv"));
}

TEST_F(CliTest, GenTableEmptyClassIsInfeasible) {
  auto history = write("h.csv",
                       "image,resolution_code,mu,size_kb,psnr_db,cr\n"
                       "a,1,8,10,30,1\n");
  Result r = run("gen-table " + quote(history) + " --no-pinned");
  EXPECT_EQ(r.status, 5);
  expect_single_line_error(r);
}

TEST_F(CliTest, SimulateReportsLossesAndAggregates) {
  ASSERT_EQ(run("synth pan --size 48x32 --frames 5 --out " + quote(dir_ / "f")).status,
            0);
  Result r = run("simulate " + quote(dir_ / "f") + " " +
                 quote(kData / "trace_dip.csv") + " --loss 2 --baseline-mu 16");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("frame,mode,mu,bytes,lost,concealed_from,psnr_db\n", 0), 0u);
  EXPECT_NE(r.out.find("\n2,compressed,16,"), std::string::npos);
  EXPECT_NE(r.out.find(",1,1,"), std::string::npos);
  EXPECT_NE(r.out.find("lost_frames,1\n"), std::string::npos);
}

TEST_F(CliTest, SimulateQosWithoutTableIsUsageError) {
  ASSERT_EQ(run("synth static --size 8x8 --frames 2 --out " + quote(dir_ / "f")).status,
            0);
  Result r = run("simulate " + quote(dir_ / "f") + " " +
                 quote(kData / "trace_dip.csv") + " --qos on");
  EXPECT_EQ(r.status, 2);
  expect_single_line_error(r);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  for (const char* args : {"", "bogus", "compress", "--psnr-formula other metrics a b",
                           "simulate . x --qos maybe"}) {
    Result r = run(args);
    EXPECT_EQ(r.status, 2) << args;
    expect_single_line_error(r);
  }
}

TEST_F(CliTest, HelpExitsZero) {
  Result r = run("--help");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("compress"), std::string::npos);
}

TEST_F(CliTest, SameSeedSameBytes) {
  save_ppm(dir_ / "a.ppm", synth::photo({80, 60}, 12));
  Result a = run("--seed 9 compress " + quote(dir_ / "a.ppm") + " --mu 20 --out " +
                 quote(dir_ / "1.pqf"));
  Result b = run("--seed 9 compress " + quote(dir_ / "a.ppm") + " --mu 20 --out " +
                 quote(dir_ / "2.pqf"));
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir_ / "1.pqf"), slurp(dir_ / "2.pqf"));
}

TEST_F(CliTest, PsnrFormulaFlagChangesPsnr) {
  save_ppm(dir_ / "a.ppm", synth::photo({20, 10}, 1));
  save_ppm(dir_ / "b.ppm", synth::photo({20, 10}, 2));
  Result canon = run("metrics " + quote(dir_ / "a.ppm") + " " + quote(dir_ / "b.ppm"));
  Result alt = run("--psnr-formula paper-eq14 metrics " + quote(dir_ / "a.ppm") +
                   " " + quote(dir_ / "b.ppm"));
  ASSERT_EQ(canon.status, 0);
  ASSERT_EQ(alt.status, 0);
  EXPECT_NE(canon.out, alt.out);
}

}  // namespace
}  // namespace palstream
