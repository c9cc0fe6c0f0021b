// adtracker command line: run the service, bootstrap the first manager,
// write simulated fixtures.

#include <CLI11.hpp>
#include <termios.h>
#include <unistd.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "adtracker/accounts.hpp"
#include "adtracker/advertisers.hpp"
#include "adtracker/api.hpp"
#include "adtracker/codec.hpp"
#include "adtracker/config.hpp"
#include "adtracker/geo.hpp"
#include "adtracker/jobs.hpp"
#include "adtracker/log.hpp"
#include "adtracker/provider.hpp"
#include "adtracker/store.hpp"

namespace {

using namespace adtracker;

config::Config load_config(const std::string& path, const std::string& data_dir) {
  auto cfg = config::load(path.empty() ? std::nullopt : std::optional<std::filesystem::path>(path));
  if (!data_dir.empty()) cfg.data_dir = data_dir;
  return cfg;
}

std::string read_password(bool from_stdin) {
  std::string pw;
  if (from_stdin || !isatty(STDIN_FILENO)) {
    std::getline(std::cin, pw);
    return pw;
  }
  termios old{};
  tcgetattr(STDIN_FILENO, &old);
  termios quiet = old;
  quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
  std::cerr << "Password: " << std::flush;
  tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
  std::getline(std::cin, pw);
  tcsetattr(STDIN_FILENO, TCSANOW, &old);
  std::cerr << "\nRepeat: " << std::flush;
  std::string again;
  tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
  std::getline(std::cin, again);
  tcsetattr(STDIN_FILENO, TCSANOW, &old);
  std::cerr << '\n';
  if (again != pw) throw Error(ErrorCode::BadRequest, "passwords do not match");
  return pw;
}

int serve(const config::Config& cfg) {
  // Signals go to a dedicated waiter thread; block them before any other
  // thread starts so none of those receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SystemClock clock;
  auto store = store::Store::open(cfg.data_dir, clock);
  accounts::AccountService accounts(*store, clock);

  std::shared_ptr<provider::AdProvider> ads;
  std::unique_ptr<advertisers::GraphProvider> graph;
  if (cfg.provider == config::ProviderMode::Live) {
    provider::validate(cfg.live);
    auto limiter = std::make_shared<provider::RateLimiter>(cfg.live.max_requests_per_minute, clock);
    ads = std::make_shared<provider::LiveProvider>(cfg.live, limiter, clock);
    graph = std::make_unique<advertisers::LiveGraphProvider>(cfg.graph_base_url, cfg.live.access_token);
  } else {
    if (cfg.sim_fixture) {
      ads = std::make_shared<provider::SimulatedProvider>(
          provider::SimulatedProvider::from_jsonl(*cfg.sim_fixture, cfg.live.page_size));
    } else {
      ads = provider::seed_simulated(cfg.sim_seed, cfg.sim_ads, cfg.live.page_size);
    }
    graph = std::make_unique<advertisers::SimulatedGraphProvider>();
  }

  const geo::Gazetteer gazetteer =
      cfg.gazetteer_path ? geo::Gazetteer::load(*cfg.gazetteer_path) : geo::Gazetteer::bundled();

  advertisers::ImageCacheConfig image_cfg;
  image_cfg.ttl = cfg.image_ttl;
  advertisers::ImageCache images(cfg.data_dir / "images", *graph, clock, image_cfg);

  jobs::JobManager manager(*store, ads, clock, cfg.jobs);

  api::ServerOptions options;
  options.default_threshold_km = cfg.threshold_km;
  options.ui_dir = cfg.ui_dir;
  options.request_log = &std::cout;
  api::Server server({*store, accounts, manager, gazetteer, &images}, options);

  auto [host, port] = config::split_listen_addr(cfg.listen_addr);
  const int bound = server.bind(host, port);
  manager.start();
  log::event("listening", {{"host", host}, {"port", bound}, {"data_dir", cfg.data_dir.string()}});

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    log::event("shutdown", {{"signal", sig}});
    server.stop();
  });
  server.listen();
  // listen() also returns on bind loss; make sure the waiter can exit.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  manager.stop();
  manager.wait_idle();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Political ad archive tracker"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_dir;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-d,--data-dir", data_dir, "Data directory (overrides config)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API and the refresh scheduler");

  auto* boot = app.add_subcommand("bootstrap-manager", "Create the first approved manager account");
  std::string email;
  bool password_stdin = false;
  boot->add_option("--email", email, "Manager email")->required();
  boot->add_flag("--password-stdin", password_stdin, "Read the password from one line of stdin");

  auto* gen = app.add_subcommand("gen-fixture", "Write a simulated archive fixture as JSON Lines");
  std::uint64_t seed = 7;
  std::size_t count = 60;
  std::string out_path;
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--n", count, "Number of ads");
  gen->add_option("--out", out_path, "Output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(load_config(config_path, data_dir));

    if (*boot) {
      auto cfg = load_config(config_path, data_dir);
      SystemClock clock;
      auto store = store::Store::open(cfg.data_dir, clock);
      accounts::AccountService accounts(*store, clock);
      auto account = accounts.bootstrap_manager(email, read_password(password_stdin));
      std::cout << "manager " << account.email << " created with id " << account.account_id.value << '\n';
      return 0;
    }

    if (*gen) {
      auto ads = provider::generate_ads(seed, count);
      if (out_path.empty()) {
        codec::write_ad_lines(std::cout, ads);
      } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::BadRequest, "cannot write " + out_path);
        codec::write_ad_lines(out, ads);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
