#include "ldfm/dataset.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace ldfm {
namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + LDFM_CLI_PATH + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "ldfm_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto all = testing::synthetic_dataset(1, 6, 2, 45, 3);
    MultiLabelDataset train = all, test = all;
    train.features = all.features.leftCols(30);
    train.labels = all.labels.leftCols(30);
    test.features = all.features.rightCols(15);
    test.labels = all.labels.rightCols(15);
    std::ofstream(dir_ / "s-train.arff") << write_arff(train, "s");
    std::ofstream(dir_ / "s-test.arff") << write_arff(test, "s");
    std::ofstream(dir_ / "s.xml") << "<labels><label name=\"l0\"/><label name=\"l1\"/></labels>";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string data_args() const {
    return "--train '" + (dir_ / "s-train.arff").string() + "' --test '" + (dir_ / "s-test.arff").string() +
           "' --labels-xml '" + (dir_ / "s.xml").string() + "' --out '" + (dir_ / "out").string() + "'";
  }

  fs::path dir_;
};

TEST_F(Cli, SuccessWritesTables) {
  EXPECT_EQ(run_cli("feature-curve " + data_args() + " --pca-variance 0 --features 1..6 --max-iter 5"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "s_feature_curve.csv"));
  EXPECT_EQ(run_cli("sweep " + data_args() + " --pca-variance 0 --features 3 --lambda 0.5,1 --max-iter 2,4"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "s_sweep.csv"));
}

TEST_F(Cli, ConfigFileWithLists) {
  std::ofstream(dir_ / "run.ini") << "train=" << (dir_ / "s-train.arff").string() << "\n"
                                  << "test=" << (dir_ / "s-test.arff").string() << "\n"
                                  << "labels-xml=" << (dir_ / "s.xml").string() << "\n"
                                  << "features=1,3\nlambda=0.5,2\nmax-iter=3\npca-variance=0\n";
  const auto out = dir_ / "cfg";
  EXPECT_EQ(run_cli("sweep --config '" + (dir_ / "run.ini").string() + "' --out '" + out.string() + "'"), 0);
  std::ifstream in(out / "s_sweep.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 1 + 2 * 2);  // header, two lambdas x two counts
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("feature-curve"), 2);
  EXPECT_EQ(run_cli("no-such-command " + data_args()), 2);
  EXPECT_EQ(run_cli("feature-curve " + data_args() + " --pca-variance 3"), 2);
  EXPECT_EQ(run_cli("feature-curve " + data_args() + " --lambda 1,2"), 2);
  EXPECT_EQ(run_cli("feature-curve --train /nonexistent.arff --test /nonexistent.arff --labels-xml /x.xml"), 3);
}

}  // namespace
}  // namespace ldfm
