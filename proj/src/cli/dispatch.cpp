#include "krawtex/cli.hpp"

#include "common.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>

namespace krawtex::cli {

namespace {

std::uint64_t parse_seed(const std::string& text)
{
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 10);
  }
  catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-')
    throw UsageError("KRAWTEX_SEED must be an unsigned integer, got '" + text + "'");
  return v;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag)
{
  if (flag)
    return *flag;
  if (const char* env = std::getenv("KRAWTEX_SEED"); env && *env)
    return parse_seed(env);
  return 0;
}

int fail(std::ostream& err, const std::string& kind, const std::string& command, const std::string& message,
         int code)
{
  json e;
  e["error"] = kind;
  e["command"] = command;
  e["message"] = message;
  write_json_line(err, e);
  return code;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Krawtchouk-domain dehazing toolkit", "krawtex"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Registry registry;
  add_basis(app, registry);
  add_analyze(app, registry);
  add_transform(app, registry);
  add_synthesize(app, registry);
  add_toyset(app, registry);
  add_train(app, registry);
  add_dehaze(app, registry);
  add_evaluate(app, registry);
  add_gradcheck(app, registry);

  std::optional<std::uint64_t> seed;
  for (Command& c : registry)
    c.app->add_option("--seed", seed, "Random seed (falls back to KRAWTEX_SEED, then 0)");

  if (!args.empty() && !args.front().empty() && args.front().front() != '-' &&
      !std::any_of(registry.begin(), registry.end(),
                   [&](const Command& c) { return c.app->get_name() == args.front(); }))
    return fail(err, "unknown_command", args.front(), "unknown command '" + args.front() + "'", kExitUsage);

  std::string name = args.empty() ? "" : args.front();
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  }
  catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  }
  catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  }
  catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    return fail(err, "bad_arguments", name, e.what(), kExitUsage);
  }

  for (Command& c : registry) {
    if (!c.app->parsed())
      continue;
    name = c.app->get_name();
    try {
      Context ctx{out, resolve_seed(seed)};
      c.run(ctx);
      if (c.echo_target) {
        const fs::path target = c.echo_target();
        if (!target.empty()) {
          json echo;
          echo["command"] = name;
          echo["seed"] = ctx.seed;
          echo["options"] = option_values(*c.app);
          std::ofstream os = open_output(target.string() + ".config.json");
          os << echo.dump(2) << '\n';
        }
      }
      return kExitOk;
    }
    catch (const UsageError& e) {
      return fail(err, "bad_arguments", name, e.what(), kExitUsage);
    }
    catch (const std::exception& e) {
      return fail(err, "runtime_failure", name, e.what(), kExitFailure);
    }
  }
  return fail(err, "bad_arguments", name, "no command given", kExitUsage);
}

int dispatch(int argc, const char* const* argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

} // namespace krawtex::cli
