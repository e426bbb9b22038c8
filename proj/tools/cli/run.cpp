#include "cli/cli.hpp"

#include <cstdio>
#include <filesystem>

namespace tgw::cli {

namespace {

int fail(int code, const std::string& message) {
  log_event({{"event", "error"}, {"code", code}, {"message", message}});
  std::fprintf(stderr, "error: %s\n", message.c_str());
  return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
  try {
    RunConfig config;
    if (!parse_args(argc, argv, config)) return 0;
    if (config.subcommand == "gw") return cmd_gw(config);
    if (config.subcommand == "barycenter") return cmd_barycenter(config);
    if (config.subcommand == "interpolate") return cmd_interpolate(config);
    if (config.subcommand == "classify") return cmd_classify(config);
    if (config.subcommand == "match") return cmd_match(config);
    return fail(3, "unknown subcommand " + config.subcommand);
  } catch (const IoError& e) {
    return fail(2, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(2, e.what());
  } catch (const PreconditionError& e) {
    return fail(3, e.what());
  } catch (const SolverError& e) {
    return fail(4, e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
}

}  // namespace tgw::cli
