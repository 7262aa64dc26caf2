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


#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "direx/cli.hpp"

namespace {

using Command = int (*)(const direx::RunConfig&, std::ostream&);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"direx: device-independent randomness expansion rate analysis"};
  app.require_subcommand(1);
  std::string config, out, level;
  int threads = 0;
  long long seed = -1;
  const std::vector<std::pair<std::string, Command>> verbs = {
      {"rate", direx::cmd_rate},
      {"sweep", direx::cmd_sweep},
      {"optimize-mtf", direx::cmd_optimize_mtf},
      {"optimize-setup", direx::cmd_optimize_setup},
      {"simulate", direx::cmd_simulate},
      {"seed-account", direx::cmd_seed_account}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : verbs) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", config, "JSON run configuration")->required();
    s->add_option("--out", out, "output file (default stdout)");
    s->add_option("--level", level, "relaxation level, e.g. 2 or 1+AB");
    s->add_option("--threads", threads, "worker threads");
    s->add_option("--seed", seed, "overrides optimizer and simulation seeds");
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : direx::kExitConfig;
  }
  try {
    direx::RunConfig c = direx::load_config(config);
    if (!level.empty()) c.level = level;
    if (threads > 0) c.threads = threads;
    if (seed >= 0) {
      c.optimizer.seed = static_cast<std::uint64_t>(seed);
      c.simulation.seed = static_cast<std::uint64_t>(seed);
    }
    for (std::size_t i = 0; i < verbs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      std::ostringstream buf;
      int rc = verbs[i].second(c, buf);
      if (out.empty()) {
        std::cout << buf.str();
      } else {
        std::ofstream f(out);
        if (!f) throw direx::ConfigError("cannot write " + out);
        f << buf.str();
      }
      return rc;
    }
  } catch (const direx::InfeasibleError& e) {
    std::cerr << "direx: " << e.what() << '\n';
    return direx::kExitInfeasible;
  } catch (const direx::Error& e) {
    std::cerr << "direx: " << e.what() << '\n';
    return direx::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "direx: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
