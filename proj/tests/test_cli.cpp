// Copyright 2026 The direx Authors.
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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "direx/cli.hpp"

using namespace direx;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch() {
  fs::path p = fs::temp_directory_path() / "direx_cli_test";
  fs::create_directories(p);
  return p;
}

std::string write_config(const std::string& name, const json& j) {
  fs::path p = scratch() / name;
  std::ofstream(p) << j.dump();
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(DIREX_CLI) + " " + args + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string config_path(const std::string& name) {
  return std::string(DIREX_SOURCE_DIR) + "/configs/" + name;
}

json fig1_setup_json(double eta) {
  return {{"theta", M_PI / 4},
          {"alice_angles", {0.0, M_PI / 2}},
          {"bob_angles", {M_PI / 4, -M_PI / 4, 0.0}},
          {"eta", eta}};
}

json small_simulation(bool classical) {
  json j = {{"game", "chsh"},
            {"level", "1+AB"},
            {"setup", fig1_setup_json(1.0)},
            {"protocol", {{"gamma", 0.05}, {"eps_comp_target", 1e-6}}},
            {"simulation", {{"n", 50000}, {"seed", 3}}}};
  if (classical) {
    std::vector<double> local(24, 0.0);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 3; ++y) local[(x * 3 + y) * 4] = 1.0;
    j["simulation"]["device"] = local;
  }
  return j;
}

}  // namespace

TEST(Cli, ParsesBuiltinGames) {
  for (const char* name : {"chsh", "eb22", "eb23", "ab22", "ab23"}) {
    RunConfig c = parse_config(json{{"game", name}, {"protocol", {{"delta", 0.001}}}});
    EXPECT_EQ(c.game_name, name);
    EXPECT_EQ(c.protocol.delta.size(), c.game.num_scores());
    EXPECT_EQ(c.protocol.ab_size, 4);
  }
  RunConfig c = parse_config(json{{"game", "chsh"}, {"level", 1}});
  EXPECT_EQ(c.level, "1");
  EXPECT_EQ(c.x_gen, 1);
  EXPECT_EQ(c.y_gen, 2);
}

TEST(Cli, ParsesCustomGame) {
  json g = game_to_json(make_chsh_extended());
  RunConfig c = parse_config(json{{"game", g}, {"generation_inputs", {0, 1}}});
  EXPECT_EQ(c.game.rule, make_chsh_extended().rule);
  EXPECT_EQ(c.x_gen, 0);
  EXPECT_EQ(c.y_gen, 1);
}

TEST(Cli, RejectsBadConfigs) {
  std::vector<json> bad = {
      json::array(),
      json{{"level", "2"}},
      json{{"game", "nope"}},
      json{{"game", "chsh"}, {"generation_inputs", {2, 0}}},
      json{{"game", "chsh"}, {"protocol", {{"delta", {0.1, 0.1}}}}},
      json{{"game", "chsh"}, {"protocol", {{"gamma", 1.5}}}},
      json{{"game", "chsh"}, {"sweep", {{"parameter", "theta"}}}},
      json{{"game", "chsh"}, {"sweep", {{"points", 0}}}},
      json{{"game", "chsh"}, {"optimizer", {{"iterations", 0}}}},
      json{{"game", "chsh"}, {"simulation", {{"n", 2000000}}}},
      json{{"game", "chsh"}, {"setup", {{"alice_angles", {0.0}}, {"bob_angles", {0.0, 0.0, 0.0}}}}},
      json{{"game", "chsh"}, {"omega", {0.5, 0.5}}},
  };
  for (const auto& j : bad) EXPECT_THROW(parse_config(j), Error) << j.dump();
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Cli, SweepGridFromRange) {
  RunConfig c = parse_config(json{{"game", "chsh"},
                                  {"sweep", {{"start", 1.0}, {"stop", 0.8}, {"points", 11}}}});
  ASSERT_EQ(c.sweep.grid.size(), 11u);
  EXPECT_DOUBLE_EQ(c.sweep.grid.front(), 1.0);
  EXPECT_DOUBLE_EQ(c.sweep.grid.back(), 0.8);
}

TEST(Cli, CompletenessTargetIsTotal) {
  RunConfig c = parse_config(json{{"game", "chsh"},
                                  {"protocol", {{"n", 1e10}, {"gamma", 5e-3}, {"eps_comp_target", 1e-12}}}});
  ScoreDistribution w{{0.4225, 0.49, 0.0875}, false};
  ProtocolParams p = resolved_params(c, w);
  EXPECT_NEAR(completeness_error(p.n, p.gamma, w.values, p.delta), 1e-12, 1e-20);
  RunConfig none = parse_config(json{{"game", "chsh"}});
  EXPECT_THROW(resolved_params(none, w), ConfigError);
}

TEST(Cli, Formatting) {
  EXPECT_EQ(fmt(0.5), "0.5");
  EXPECT_EQ(fmt(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(join({0.25, 1.0}), "0.25;1");
}

TEST(Cli, SimplexHelpers) {
  auto p = project_simplex({0.7, 0.5, -0.2});
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_EQ(p[2], 0.0);
  Eigen::MatrixXd b = simplex_tangent_basis(4);
  EXPECT_TRUE((b.transpose() * b).isIdentity(1e-12));
  EXPECT_NEAR((Eigen::RowVectorXd::Ones(4) * b).norm(), 0.0, 1e-12);
}

TEST(Cli, AsymptoticRateGolden) {
  RunConfig c = load_config(config_path("example32.json"));
  c.asymptotic_only = true;
  std::ostringstream os;
  ASSERT_EQ(cmd_rate(c, os), kExitOk);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "game,v,p_guess,asymptotic_rate");
  std::vector<std::string> cols;
  std::stringstream rs(row);
  for (std::string cell; std::getline(rs, cell, ',');) cols.push_back(cell);
  ASSERT_EQ(cols.size(), 4u);
  EXPECT_EQ(cols[0], "chsh");
  EXPECT_EQ(cols[1], "0.4225;0.49;0.0875");
  EXPECT_NEAR(std::stod(cols[2]), 0.4913517119, 1e-6);
  EXPECT_NEAR(std::stod(cols[3]), -std::log2(0.4913517119), 1e-5);
}

TEST(Cli, OneIterationKeepsStart) {
  RunConfig c = load_config(config_path("example32.json"));
  c.level = "1";
  c.optimizer.iterations = 1;
  c.v.clear();
  std::ostringstream os;
  ASSERT_EQ(cmd_optimize_mtf(c, os), kExitOk);
  json j = json::parse(os.str());
  EXPECT_EQ(j.at("v_star"), j.at("omega"));
  EXPECT_EQ(j.at("evaluations"), 1);
}

TEST(Cli, SetupOptimizationAtFullEfficiency) {
  GuessingProgram prog = build_guessing_program(make_chsh_extended(), 1, 2, "1+AB");
  OptimizerSettings st;
  st.max_evaluations = 40;
  SetupOptResult r = optimize_setup(prog, fig1_setup(), st);
  EXPECT_GE(r.rate, 1.99);
  EXPECT_LE(r.rate, 2.0 + 1e-6);
  for (std::size_t i = 1; i < r.accepted.size(); ++i) EXPECT_GT(r.accepted[i], r.accepted[i - 1]);
}

TEST(Cli, SetupOptimizationTiltsStateUnderLoss) {
  GuessingProgram prog = build_guessing_program(make_chsh_extended(), 1, 2, "1+AB");
  QubitSetup start = fig1_setup();
  start.eta = 0.8;
  OptimizerSettings st;
  st.max_evaluations = 150;
  SetupOptResult r = optimize_setup(prog, start, st);
  EXPECT_GT(r.rate, setup_rate(prog, start));
  EXPECT_LT(r.setup.theta, M_PI / 4 - 0.05);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("seed-account --config " + config_path("seed_account.json") +
                    " --out " + (scratch() / "seed.json").string()),
            kExitOk);
  EXPECT_EQ(run_cli("rate --config /nonexistent.json"), kExitConfig);
  EXPECT_EQ(run_cli("rate"), kExitConfig);
  std::string infeasible = write_config(
      "infeasible.json", json{{"game", "chsh"}, {"level", "1"}, {"mode", "asymptotic"},
                              {"omega", {0.5, 0.5, 0.0}}});
  EXPECT_EQ(run_cli("rate --config " + infeasible), kExitInfeasible);
  std::string tampered = write_config("tampered.json", small_simulation(true));
  EXPECT_EQ(run_cli("simulate --config " + tampered + " --out " +
                    (scratch() / "tampered.out").string()),
            kExitAbort);
  json out = json::parse(slurp(scratch() / "tampered.out"));
  EXPECT_TRUE(out.at("abort").get<bool>());
  EXPECT_EQ(out.at("output_bits"), 0);
}

TEST(Cli, HonestSimulationProducesOutput) {
  RunConfig c = parse_config(small_simulation(false));
  std::ostringstream os;
  ASSERT_EQ(cmd_simulate(c, os), kExitOk);
  json j = json::parse(os.str());
  EXPECT_FALSE(j.at("abort").get<bool>());
  EXPECT_EQ(j.at("truncated_blocks"), 0);
  EXPECT_GT(j.at("seed_bits_used").get<double>(), 0.0);
  EXPECT_EQ(j.at("n"), 50000);
}

TEST(Cli, CommandsAreDeterministic) {
  std::string sim = write_config("sim.json", small_simulation(false));
  json sweep = {{"game", "ab22"},
                {"level", "1"},
                {"mode", "asymptotic"},
                {"optimizer", {{"max_evaluations", 10}}},
                {"sweep", {{"grid", {1.0, 0.95}}}}};
  std::string sw = write_config("sweep.json", sweep);
  json mtf = {{"game", "chsh"},
              {"level", "1"},
              {"omega", {0.4225, 0.49, 0.0875}},
              {"protocol", {{"delta", 1e-3}}},
              {"optimizer", {{"iterations", 2}, {"restarts", 1}}}};
  std::string om = write_config("mtf.json", mtf);
  json setup = {{"game", "chsh"}, {"level", "1"}, {"setup", fig1_setup_json(0.9)},
                {"optimizer", {{"max_evaluations", 10}}}};
  std::string os = write_config("setup.json", setup);
  std::string rate = write_config(
      "rate.json", json{{"game", "chsh"}, {"level", "1"}, {"omega", {0.4225, 0.49, 0.0875}},
                        {"protocol", {{"delta", 1e-3}}}});
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"rate", rate},
      {"sweep", sw},
      {"optimize-mtf", om},
      {"optimize-setup", os},
      {"simulate", sim},
      {"seed-account", config_path("seed_account.json")}};
  for (const auto& [verb, cfg] : runs) {
    std::string a = (scratch() / (verb + ".a")).string();
    std::string b = (scratch() / (verb + ".b")).string();
    ASSERT_EQ(run_cli(verb + " --config " + cfg + " --out " + a + " --threads 2"), 0) << verb;
    ASSERT_EQ(run_cli(verb + " --config " + cfg + " --out " + b + " --threads 1"), 0) << verb;
    std::string x = slurp(a);
    EXPECT_FALSE(x.empty()) << verb;
    EXPECT_EQ(x, slurp(b)) << verb;
  }
  std::string csv = slurp(scratch() / "sweep.a");
  EXPECT_EQ(csv.rfind("# schema: sweep/1\neta,theta,angles,", 0), 0u);
  EXPECT_NE(csv.find("# threshold_eta,"), std::string::npos);
}
