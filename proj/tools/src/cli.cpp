#include <omp.h>

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "polaron/errors.hpp"
#include "polaron_app/commands.hpp"

namespace polaron::app {

namespace {

const char* describe(const std::string& name) {
  if (name == "solve") return "ground state at one total momentum";
  if (name == "scan-p") return "ground energy along a momentum schedule";
  if (name == "counterterm") return "one- or two-phonon counterterm over a cutoff schedule";
  if (name == "uv-scan") return "energies with counterterms subtracted over a cutoff schedule";
  if (name == "ir-scan") return "energies over a descending phonon-mass schedule";
  if (name == "gap") return "one-phonon threshold gap";
  if (name == "pstar") return "critical momentum estimate";
  return "run the diagnostics property suite";
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Bose polaron ground states at fixed total momentum"};
  app.set_version_flag("--version", kCodeVersion);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string format;
  int threads = 0;
  bool no_cache = false;
  bool clear_cache = false;
  app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override, section.key=value (repeatable)");
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--no-cache", no_cache, "neither read nor write the result cache");
  app.add_flag("--clear-cache", clear_cache, "drop every cached result first");
  for (const auto& name : command_names()) app.add_subcommand(name, describe(name))->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const ResultCache cache(default_cache_root());
    if (clear_cache) {
      std::cout << "cleared " << cache.clear() << " cached results from " << cache.root().string()
                << "\n";
    }
    if (app.get_subcommands().empty()) {
      if (clear_cache) return kExitOk;
      std::cerr << app.help();
      return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig config = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
    for (const auto& o : overrides) config.set(o);
    if (!out_dir.empty()) config.set("output", "directory", out_dir);
    if (!format.empty()) config.set("output", "format", format);
    if (threads > 0) omp_set_num_threads(threads);

    const CacheKey key = make_cache_key(command, config.canonical_inputs());
    std::optional<Bundle> bundle;
    if (!no_cache) bundle = cache.load(key);
    const bool hit = bundle.has_value();
    if (!hit) {
      bundle = render(command, key, config, run_command(command, config));
      if (!no_cache) cache.store(key, *bundle);
    }
    const std::filesystem::path dir = config.text("output.directory");
    for (const auto& [name, content] : bundle->files) atomic_write(dir / name, content);
    std::cout << bundle->summary << (hit ? " [cached]" : "") << "\n";
    return bundle->exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const QuadratureError& e) {
    std::cerr << "quadrature failed: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPropertyFailure;
  }
}

}  // namespace polaron::app
