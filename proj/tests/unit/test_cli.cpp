#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "sgm/rng.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("sgm_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(SGM_CLI_PATH) + " " + args + " > " + path("stdout.txt") + " 2> " +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  /// Data rows as split fields, config and header lines dropped.
  static std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (header) {
        header = false;
        continue;
      }
      std::vector<std::string> f;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) f.push_back(cell);
      out.push_back(f);
    }
    return out;
  }

  fs::path dir_;
};

void write_file(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

} // namespace

TEST_F(CliTest, StepsBelowTwoIsUsageError) {
  EXPECT_EQ(run("sbm-region --steps 1"), 2);
  EXPECT_NE(slurp(path("stderr.txt")).find("steps"), std::string::npos);
}

TEST_F(CliTest, UnknownFlagIsUsageError) { EXPECT_EQ(run("sbm-region --bogus 3"), 2); }

TEST_F(CliTest, MissingFileIsUsageError) {
  EXPECT_EQ(run("cluster --edges " + path("nope.txt")), 2);
  EXPECT_NE(slurp(path("stderr.txt")).find("nope.txt"), std::string::npos);
}

TEST_F(CliTest, MalformedEdgeListReportsLine) {
  write_file(path("bad.txt"), "0 1 1\n1 2 oops\n");
  EXPECT_EQ(run("cluster --edges " + path("bad.txt")), 2);
  EXPECT_NE(slurp(path("stderr.txt")).find("line 2"), std::string::npos);
}

TEST_F(CliTest, RegionTwoStepGridMatchesEnumeration) {
  ASSERT_EQ(run("sbm-region --k 3 --steps 2 --conditioning all --target e_bal_and_vol e_g --out " + path("r.csv")), 0);
  const auto r = rows(slurp(path("r.csv")));
  ASSERT_EQ(r.size(), 2u);
  const double grid[2] = {0.25, 0.75};
  int bal_vol = 0, eg = 0;
  for (double a : grid)
    for (double b : grid)
      for (double c : grid)
        for (double d : grid) {
          bal_vol += (c + b < a + d) && (c + 2 * d < a + 2 * b);
          eg += (3 * b / (a + 2 * b)) * (1 + (c - d) / (c + 2 * d)) < 1;
        }
  EXPECT_EQ(r[0][3], "E_bal&E_vol");
  EXPECT_DOUBLE_EQ(std::stod(r[0][4]), bal_vol / 16.0);
  EXPECT_EQ(r[0][5], "16");
  EXPECT_DOUBLE_EQ(std::stod(r[1][4]), eg / 16.0);
}

TEST_F(CliTest, RegionBothSignsGivesOne) {
  ASSERT_EQ(run("sbm-region --k 2 3 4 5 --steps 10 --conditioning e_plus_and_minus --target e_g --out " +
                path("r.csv")),
            0);
  const auto r = rows(slurp(path("r.csv")));
  ASSERT_EQ(r.size(), 4u);
  for (const auto& row : r) EXPECT_EQ(row[4], "1");
}

TEST_F(CliTest, OutputStartsWithConfigLine) {
  ASSERT_EQ(run("sbm-region --k 2 --steps 2 --seed 4"), 0);
  const auto text = slurp(path("stdout.txt"));
  ASSERT_EQ(text.rfind("# {", 0), 0u);
  const auto cfg = nlohmann::json::parse(text.substr(2, text.find('\n') - 2));
  EXPECT_EQ(cfg["steps"], 2);
  EXPECT_EQ(cfg["seed"], 4);
}

TEST_F(CliTest, BalancedSweepHasZeroErrors) {
  ASSERT_EQ(run("sbm-cluster --k 2 --cluster-size 20 --p-in-plus 1 --p-out-plus 0 --p-in-minus 0 --p-out-minus 1 "
                "--methods GM --runs 5 --threads 2 --out " + path("s.csv")),
            0);
  const auto r = rows(slurp(path("s.csv")));
  ASSERT_EQ(r.size(), 6u);
  for (const auto& row : r) {
    EXPECT_EQ(row[0], "GM");
    EXPECT_DOUBLE_EQ(std::stod(row[3]), 0.0);
  }
  EXPECT_EQ(r.back()[1], "median");
}

TEST_F(CliTest, SweepIsDeterministicAcrossThreadCounts) {
  const std::string args = "sbm-cluster --cluster-size 30 --runs 3 --seed 11 --methods SN GM";
  ASSERT_EQ(run(args + " --threads 1 --out " + path("a.csv")), 0);
  ASSERT_EQ(run(args + " --threads 3 --out " + path("b.csv")), 0);
  auto a = rows(slurp(path("a.csv"))), b = rows(slurp(path("b.csv")));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].pop_back();
    b[i].pop_back();
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST_F(CliTest, TwoCliqueEdgeList) {
  std::ostringstream edges, truth;
  for (int i = 0; i < 16; ++i) {
    truth << (i < 8 ? 0 : 1) << "\n";
    for (int j = i + 1; j < 16; ++j) edges << i << ' ' << j << ' ' << ((i < 8) == (j < 8) ? 1 : -1) << "\n";
  }
  write_file(path("g.txt"), edges.str());
  write_file(path("t.txt"), truth.str());
  ASSERT_EQ(run("cluster --edges " + path("g.txt") + " --truth " + path("t.txt") + " --k 2 --labels-out " +
                path("l.json") + " --out " + path("m.csv")),
            0);
  const auto lj = nlohmann::json::parse(slurp(path("l.json")));
  EXPECT_EQ(lj["error"], 0.0);
  EXPECT_EQ(lj["labels"].size(), 16u);
  EXPECT_EQ(lj["sizes"], (std::vector<int>{8, 8}));
  const auto m = rows(slurp(path("m.csv")));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0][3], "0");
}

TEST_F(CliTest, LabelsGoToStdoutByDefault) {
  write_file(path("g.txt"), "0 1 1\n2 3 1\n0 2 -1\n1 3 -1\n");
  ASSERT_EQ(run("cluster --edges " + path("g.txt") + " --k 2 --out " + path("m.csv")), 0);
  const auto lj = nlohmann::json::parse(slurp(path("stdout.txt")));
  EXPECT_TRUE(lj["error"].is_null());
  EXPECT_EQ(lj["labels"][0], lj["labels"][1]);
  EXPECT_NE(lj["labels"][0], lj["labels"][2]);
}

TEST_F(CliTest, ThreeBlobPointCloud) {
  sgm::Rng rng(31);
  std::ostringstream pts, truth;
  const double centers[3][2] = {{0, 0}, {6, 0}, {3, 5}};
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < 50; ++i) {
      pts << centers[b][0] + rng.normal() << ", " << centers[b][1] + rng.normal() << "\n";
      truth << b << "\n";
    }
  write_file(path("p.csv"), pts.str());
  write_file(path("t.txt"), truth.str());
  ASSERT_EQ(run("cluster --points " + path("p.csv") + " --truth " + path("t.txt") +
                " --k 3 --k-plus 10 --k-minus 10 --method GM --labels-out " + path("l.json")),
            0);
  const auto lj = nlohmann::json::parse(slurp(path("l.json")));
  EXPECT_LE(lj["error"].get<double>(), 0.1);
}

TEST_F(CliTest, BadMethodIsUsageError) {
  write_file(path("g.txt"), "0 1 1\n2 3 1\n");
  EXPECT_EQ(run("cluster --edges " + path("g.txt") + " --method XX"), 2);
}

TEST_F(CliTest, BenchSingleSize) {
  ASSERT_EQ(run("bench --n 400 --avg-degree 20 --reps 1 --out " + path("b.csv")), 0);
  const auto r = rows(slurp(path("b.csv")));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0][0], "400");
  EXPECT_EQ(r[0][1], "SN");
  EXPECT_EQ(r[1][1], "GM");
  for (const auto& row : r) {
    EXPECT_GT(std::stod(row[2]), 0.0);
    EXPECT_EQ(row[4], "ok");
  }
}

TEST(CliHelpers, MedianAndFormatting) {
  using sgm::cli::median;
  EXPECT_FALSE(median({}).has_value());
  EXPECT_EQ(*median({3.0}), 3.0);
  EXPECT_EQ(*median({4.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(*median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_EQ(sgm::cli::fmt(0.5), "0.5");
  EXPECT_EQ(sgm::cli::fmt_or_na(std::nullopt), "NA");
}
