// lyapcert: finite-scale Lyapunov positivity certificates from the command line.
//
//   lyapcert certify --config run.cfg [--require-positive] [--threads N] [--out DIR]
//   lyapcert reproduce-figures --out figs
//   lyapcert estimate --set energies=0,0.5 --set lambdas=1
//
// `certify` takes the mode from the config (default certify-doubling); the
// other subcommands force their mode.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lyapcert/campaign.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string manifest;
  std::vector<std::string> overrides;
  bool require_positive = false;
  unsigned threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "flat key=value configuration file");
  cmd->add_option("--manifest", args.manifest, "re-run the configuration echoed in a manifest.json");
  cmd->add_option("--set", args.overrides, "override a config key (key=value), repeatable");
  cmd->add_flag("--require-positive", args.require_positive, "exit 2 if any energy is INCONCLUSIVE");
  cmd->add_option("--threads", args.threads, "worker threads (default: $LYAPCERT_THREADS or all cores)");
  cmd->add_option("--out", args.out, "output directory");
}

int run(const CommonArgs& args, const std::string& forced_mode) {
  using namespace lyapcert;
  try {
    if (!args.config.empty() && !args.manifest.empty()) {
      throw Error(ErrorCode::config_invalid, "--config and --manifest are mutually exclusive");
    }
    ConfigMap file_values;
    if (!args.config.empty()) file_values = load_config_file(args.config);
    if (!args.manifest.empty()) file_values = load_manifest_config(args.manifest);
    ConfigMap overrides;
    for (const auto& kv : args.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::config_invalid, "--set expects key=value, got " + kv);
      const std::string key = kv.substr(0, eq);
      if (overrides.contains(key)) throw Error(ErrorCode::config_invalid, "--set repeats key " + key);
      overrides[key] = kv.substr(eq + 1);
    }
    if (!forced_mode.empty()) overrides["mode"] = forced_mode;
    if (!args.out.empty()) overrides["out"] = args.out;
    const CampaignConfig cfg = build_config(file_values, overrides);

    CampaignOptions opts;
    opts.require_positive = args.require_positive;
    opts.threads = args.threads;
    const CampaignResult res = run_campaign(cfg, opts);
    for (const auto& p : res.outputs) std::cout << "wrote " << p.string() << "\n";
    if (!res.manifest.empty()) std::cout << "wrote " << res.manifest.string() << "\n";
    if (!res.message.empty()) std::cerr << res.message << "\n";
    return res.exit_code;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::budget_exceeded ? 3 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-scale Lyapunov exponent positivity certificates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lyapcert::kVersion);

  struct Sub {
    const char* name;
    const char* mode;
    const char* help;
  };
  const std::vector<Sub> subs = {
      {"certify", "", "run the mode named in the config"},
      {"certify-doubling", "certify-doubling", "certificate for x -> Kx"},
      {"certify-toral", "certify-toral", "certificate for a hyperbolic toral automorphism"},
      {"estimate", "estimate", "direct long-orbit Lyapunov estimates"},
      {"baseline", "baseline", "Monte-Carlo i.i.d. (Furstenberg) baseline"},
      {"deviations", "deviations", "empirical large-deviation profile"},
      {"reproduce-figures", "reproduce-figures", "K=2, N0=6 sweep over six couplings"},
  };
  std::vector<CommonArgs> args(subs.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(cmd, args[i]);
    cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (cmds[i]->parsed()) return run(args[i], subs[i].mode);
  }
  return 1;
}
