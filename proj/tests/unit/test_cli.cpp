#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "sepcov/errors.hpp"
#include "sepcov/io.hpp"

using namespace sepcov;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "sepcov");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("sepcov_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    write_text(path, text);
    return path.string();
  }

  std::string example_spec(const std::string& name, int n) {
    const Result r = run({"example", name, "--n", std::to_string(n)});
    EXPECT_EQ(r.code, 0) << r.err;
    return file(name + ".json", r.out);
  }

  std::filesystem::path dir_;
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(ParseComplex, Forms) {
  EXPECT_EQ(cli::parse_complex("1.5+0.1i"), Complex(1.5, 0.1));
  EXPECT_EQ(cli::parse_complex("1.5 - 2i"), Complex(1.5, -2));
  EXPECT_EQ(cli::parse_complex("3"), Complex(3, 0));
  EXPECT_EQ(cli::parse_complex("0.5i"), Complex(0, 0.5));
  EXPECT_EQ(cli::parse_complex("-i"), Complex(0, -1));
  EXPECT_EQ(cli::parse_complex("1e-3+1e4j"), Complex(1e-3, 1e4));
  EXPECT_THROW(cli::parse_complex(""), DomainError);
  EXPECT_THROW(cli::parse_complex("1+"), DomainError);
  EXPECT_THROW(cli::parse_complex("abc"), DomainError);
  const auto list = cli::parse_complex_list("1.5+1i, 1.5+0.1i");
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[1], Complex(1.5, 0.1));
}

TEST_F(Cli, HelpAndUsage) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"--threads", "many", "example", "example1", "--n", "2"}).code, 1);
}

TEST_F(Cli, CheckExitCodes) {
  const Result ok = run({"check", example_spec("example1", 10)});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_GT(json::parse(ok.out)["tau_raw"].get<double>(), 0.0);

  const std::string zero = file("zero.json", R"({"A": [{"diag": [0, 0]}], "B": [{"diag": [1, 1]}]})");
  EXPECT_EQ(run({"check", zero}).code, 2);

  const Result bad = run({"check", file("bad.json", "{\"A\": [")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("JSON"), std::string::npos);

  const Result field = run({"check", file("field.json", R"({"A": [{"diag": [1, "x"]}], "B": [{"diag": [1]}]})")});
  EXPECT_EQ(field.code, 1);
  EXPECT_NE(field.err.find("A[0].diag[1]"), std::string::npos);

  EXPECT_EQ(run({"check", (dir_ / "missing.json").string()}).code, 1);
}

TEST_F(Cli, Solve) {
  const std::string spec = file("mp.json", R"({"A": [{"generator": {"name": "identity"}}],
                                              "B": [{"generator": {"name": "identity"}}], "d": 5, "n": 5})");
  const Result r = run({"solve", spec, "--z-list", "0+1i,2+0.5i"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["solutions"].size(), 2u);
  EXPECT_NEAR(j["solutions"][0]["delta_b"][0][0][0].get<double>(), 0.30024259022012045, 1e-12);
  EXPECT_EQ(run({"solve", spec, "--z-list", "1+0i"}).code, 1);
  EXPECT_EQ(run({"--format", "csv", "solve", spec, "--z-list", "1+1i"}).code, 1);
}

TEST_F(Cli, SolveFailureExitsThree) {
  const std::string spec = example_spec("example2", 20);
  const Result r = run({"solve", spec, "--z-list", "0.5+0.05i", "--max-iter", "1"});
  EXPECT_EQ(r.code, 3);
}

TEST_F(Cli, DensityCurve) {
  const std::string spec = example_spec("example1", 100);
  const std::string out = (dir_ / "density.csv").string();
  const Result r = run({"--out", out, "density", spec, "--eta", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("support_bound"), std::string::npos);
  const std::string csv = read_text(out);
  EXPECT_EQ(count_lines(csv), 601u);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,density");
  while (std::getline(is, line)) EXPECT_GE(std::stod(line.substr(line.find(',') + 1)), -1e-12);

  EXPECT_EQ(run({"density", spec, "--eta", "0"}).code, 1);
}

TEST_F(Cli, DensityMatchesMarchenkoPastur) {
  const std::string spec = file("mp.json", R"({"A": [{"generator": {"name": "identity"}}],
                                              "B": [{"generator": {"name": "identity"}}], "d": 8, "n": 8})");
  const Result r = run({"density", spec, "--eta", "1e-4", "--lo", "1", "--hi", "3", "--points", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n2,0.159"), std::string::npos) << r.out;
}

TEST_F(Cli, Simulate) {
  const std::string spec = example_spec("example3", 50);
  const Result r = run({"--seed", "4", "simulate", spec});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["eigenvalues_s_tilde"].size(), 50u);
  EXPECT_EQ(j["eigenvalues_s"].size(), 100u);
  EXPECT_EQ(j["dist"].get<std::string>(), "student_t");

  const Result rad = run({"simulate", example_spec("example1", 6), "--dist", "rademacher"});
  ASSERT_EQ(rad.code, 0) << rad.err;
  EXPECT_EQ(json::parse(rad.out)["dist"].get<std::string>(), "rademacher");

  EXPECT_EQ(run({"simulate", spec, "--dist", "cauchy"}).code, 1);
}

TEST_F(Cli, SimulateDeltasMatchAtoms) {
  const std::string spec = example_spec("example3", 8);
  const Result r = run({"--seed", "5", "simulate", spec, "--z-list", "1+1i"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const LoadedModel lm = load_model_spec(spec);
  const Realization real = simulate(lm.model, lm.dist, 5);
  const CMatrix expected = empirical_spectrum(lm.model, real.eig_s_tilde, Side::B).stieltjes(Complex(1, 1));
  const json& dhat = j["points"][0]["delta_hat_b"];
  for (Eigen::Index r0 = 0; r0 < expected.rows(); ++r0)
    for (Eigen::Index s0 = 0; s0 < expected.cols(); ++s0) {
      const Complex v(dhat[r0][s0][0].get<double>(), dhat[r0][s0][1].get<double>());
      EXPECT_NEAR(std::abs(v - expected(r0, s0)), 0.0, 1e-9);
    }
}

TEST_F(Cli, ErrorsTable) {
  const std::vector<std::string> args{"--seed", "3", "errors", "--example", "example1", "--n-list", "4,8",
                                      "--reps", "1", "--z-list", "1.5+1i,1.5+0.1i"};
  const Result a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "n,z_re,z_im,mean_a,q10_a,q90_a,mean_b,q10_b,q90_b,failures");
  EXPECT_EQ(count_lines(a.out), 5u);
  std::istringstream is(a.out);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 10u);
    EXPECT_EQ(cells[3], cells[4]);
    EXPECT_EQ(cells[3], cells[5]);
  }
  EXPECT_EQ(run(args).out, a.out);
  EXPECT_EQ(run({"errors", "--example", "example1", "--n-list", "4", "--z-list", "1.5-0.1i"}).code, 1);
  EXPECT_EQ(run({"errors", "--n-list", "4", "--z-list", "1+1i"}).code, 1);
}

TEST_F(Cli, Universality) {
  const Result r = run({"universality", "--example", "example3", "--n", "20", "--reps", "3", "--z", "2+0.1i"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,z_re,z_im,reps,failures,mean_a,q10_a,q90_a,mean_b,q10_b,q90_b");
  const Result j = run({"--format", "json", "universality", "--example", "example3", "--n", "20", "--reps", "3",
                        "--z", "2+0.1i"});
  ASSERT_EQ(j.code, 0) << j.err;
  EXPECT_EQ(json::parse(j.out)["diff_a"].size(), 3u);
}

TEST_F(Cli, ExampleSpecs) {
  const Result gen = run({"--seed", "9", "example", "example2", "--n", "6", "--R", "3"});
  ASSERT_EQ(gen.code, 0) << gen.err;
  const json j = json::parse(gen.out);
  EXPECT_EQ(j["generator"]["seed"].get<std::uint64_t>(), 9u);
  EXPECT_EQ(j["R"].get<int>(), 3);
  const Result dense = run({"--seed", "9", "example", "example2", "--n", "6", "--R", "3", "--dense"});
  ASSERT_EQ(dense.code, 0);
  const LoadedModel a = parse_model_spec(gen.out);
  const LoadedModel b = parse_model_spec(dense.out);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_TRUE(a.model.a(r).cwiseEqual(b.model.a(r)).all());
  EXPECT_EQ(run({"example", "example4", "--n", "3"}).code, 1);
  EXPECT_EQ(run({"example", "example2", "--n", "3", "--R", "5"}).code, 1);
}

TEST_F(Cli, BinaryRuns) {
  const std::string out = (dir_ / "spec.json").string();
  const std::string cmd = std::string(SEPCOV_TOOL_PATH) + " --out " + out + " example example1 --n 4";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(parse_model_spec(read_text(out)).model.d(), 20);
}
