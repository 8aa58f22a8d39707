// Scripted stand-in for the workload: sleeps (or pretends to) through the
// three phases and prints the marker stream.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <thread>

#include "edgebench/orchestrator.hpp"

using namespace edgebench;

int main(int argc, char** argv) {
  CLI::App app{"phase-marked workload stub"};
  double idle = 0.0, load = 0.0, gen = 0.0;
  long long tokens = 512;
  std::string fail, clock = "real";
  int fail_iter = -1, iter = -1;
  bool chatter = false;
  // Ignored, accepted so templates written for the real workload still run.
  std::string model, quant;
  app.add_option("--idle", idle)->check(CLI::NonNegativeNumber);
  app.add_option("--load", load)->check(CLI::NonNegativeNumber);
  app.add_option("--gen", gen)->check(CLI::NonNegativeNumber);
  app.add_option("--tokens", tokens)->check(CLI::PositiveNumber);
  app.add_option("--fail", fail)->check(CLI::IsMember({"load", "gen", "hang"}));
  app.add_option("--fail-iter", fail_iter, "only fail when --iter matches");
  app.add_option("--iter", iter);
  std::string fail_model;
  app.add_option("--fail-model", fail_model, "only fail when --model matches");
  app.add_option("--clock", clock)->check(CLI::IsMember({"real", "script"}));
  app.add_flag("--chatter", chatter, "print non-marker lines between phases");
  app.add_option("--model", model);
  app.add_option("--quant", quant);
  CLI11_PARSE(app, argc, argv);

  if (fail_iter >= 0 && iter != fail_iter) fail.clear();
  if (!fail_model.empty() && model != fail_model) fail.clear();

  // script clock: timestamps advance by exactly the scripted durations, no sleeping
  const bool scripted = clock == "script";
  double script_t = 1000.0;
  auto now = [&] {
    if (scripted) return script_t;
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
  auto spend = [&](double s) {
    if (scripted) script_t += s;
    else std::this_thread::sleep_for(std::chrono::duration<double>(s));
  };
  auto mark = [&](Phase p, Boundary b) {
    std::printf("%s\n", format_marker(p, b, now()).c_str());
    std::fflush(stdout);
  };
  auto say = [&](const char* text) {
    if (!chatter) return;
    std::printf("%s\n", text);
    std::fflush(stdout);
  };

  mark(Phase::Idle, Boundary::Start);
  spend(idle);
  mark(Phase::Idle, Boundary::End);

  mark(Phase::ModelLoad, Boundary::Start);
  say("loading weights");
  if (fail == "hang") {
    for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
  }
  if (fail == "load") {
    std::fprintf(stderr, "stub: simulated load failure\n");
    return 3;
  }
  spend(load);
  mark(Phase::ModelLoad, Boundary::End);

  mark(Phase::Generate, Boundary::Start);
  if (fail == "gen") {
    std::fprintf(stderr, "stub: simulated generation failure\n");
    return 4;
  }
  spend(gen);
  mark(Phase::Generate, Boundary::End);
  say("done");
  std::printf("%s\n", format_tokens(tokens).c_str());
  std::fflush(stdout);
  return 0;
}
