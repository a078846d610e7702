// Copyright 2026 The TLR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <stdlib.h>
#include <sys/socket.h>
#include <unistd.h>

#include "doctest.h"
#include "tlr/cli.hpp"
#include "tlr/log.hpp"
#include "tlr/mapping.hpp"
#include "tlr/prior_map.hpp"
#include "tlr/recognition.hpp"
// After Eigen: <resolv.h> defines _res.
#include "httplib.h"

using namespace tlr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tlr");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("tlr_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    std::ofstream(d / "scenario.json") << R"({
      "route_id": "cli", "duration": 20, "rng_seed": 5,
      "camera": {"width": 1280, "height": 960, "hfov_deg": 66, "position": [1, 0, 1.7], "pitch_deg": 3},
      "lights": [
        {"id": "L", "position": [150, 4, 5], "group": "G", "facing_yaw_deg": 180,
         "schedule": [{"start": 0, "end": 10, "state": "red"}, {"start": 10, "end": 10.25, "state": "off"},
                      {"start": 10.25, "end": 30, "state": "green"}]},
        {"id": "R", "position": [150, -4, 5], "group": "G", "facing_yaw_deg": 180,
         "schedule": [{"start": 0, "end": 10, "state": "red"}, {"start": 10.25, "end": 30, "state": "green"}]}],
      "path": [{"pose": [0, 0, 0, 0, 0, 0], "speed": 10}, {"pose": [400, 0, 0, 0, 0, 0], "speed": 10}]})";
    return d;
  }();
  return dir;
}

std::string p(const std::string& name) { return (workdir() / name).string(); }

void simulate_once() {
  static const bool done = [] {
    const auto r = cli({"simulate", p("scenario.json"), "--log", p("log.jsonl"), "--truth", p("truth.json")});
    REQUIRE(r.code == 0);
    return true;
  }();
  (void)done;
}

// A port nobody listens on right now.
int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace

TEST_CASE("version and help") {
  auto r = cli({"--version"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["version"] == kVersion);
  CHECK(j["log_format"] == 1);
  CHECK(j["map_format"] == 1);

  r = cli({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("build-map") != std::string::npos);
  r = cli({"run", "--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("--gate-radius") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"simulate"}).code == kExitUsage);
  CHECK(cli({"simulate", p("scenario.json"), "--log", p("x.jsonl"), "--truth", p("x.json"), "--bogus"}).code ==
        kExitUsage);
  CHECK(cli({"run", p("does-not-exist.jsonl"), p("map.json"), "--out", p("v.jsonl")}).code == kExitUsage);
  simulate_once();
  auto r = cli({"build-map", p("log.jsonl"), "--out", p("c.json"), "--truth", p("truth.json"), "--auto-accept"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--map-out") != std::string::npos);
  r = cli({"build-map", p("log.jsonl"), "--out", p("c.json"), "--truth", p("truth.json"), "--eps", "-1"});
  CHECK(r.code == kExitUsage);
  r = cli({"run", p("log.jsonl"), p("map.json"), "--out", p("v.jsonl"), "--truth", p("truth.json"), "--tau", "1.5"});
  CHECK(r.code == kExitUsage);
  r = cli({"curate", p("log.jsonl"), p("m.json"), "--bind", "nocolon"});
  CHECK(r.code == kExitUsage);
}

TEST_CASE("simulate, build-map, run, eval") {
  simulate_once();
  CHECK(read_log(p("log.jsonl")).size() == 320);

  auto r = cli({"build-map", p("log.jsonl"), "--out", p("cands.json"), "--truth", p("truth.json"), "--auto-accept",
                "--map-out", p("map.json")});
  REQUIRE(r.code == kExitOk);
  const CandidateSet set = load_candidates(p("cands.json"));
  CHECK(set.route_id == "cli");
  CHECK(set.candidates.size() == 2);
  const PriorMap map = load_prior_map(p("map.json"));
  CHECK(map.lights.size() == 2);
  REQUIRE(map.groups.size() == 1);
  CHECK(map.groups[0].light_ids.size() == 2);

  r = cli({"run", p("log.jsonl"), p("map.json"), "--out", p("v.jsonl"), "--truth", p("truth.json")});
  REQUIRE(r.code == kExitOk);
  const auto verdicts = read_verdicts(p("v.jsonl"));
  CHECK(verdicts.size() == 320);

  r = cli({"eval", "--truth", p("truth.json"), "--verdicts", "base=" + p("v.jsonl"), "--verdicts", p("v.jsonl"),
           "--report", p("report.json"), "--timeline", p("timeline.csv"), "--log", p("log.jsonl")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("Confusion matrix [base]") != std::string::npos);
  CHECK(r.out.find("Confusion matrix [v]") != std::string::npos);
  CHECK(r.out.find("AP red-yellow") != std::string::npos);
  std::ifstream rep(p("report.json"));
  const auto report = nlohmann::json::parse(rep);
  REQUIRE(report["systems"].size() == 2);
  CHECK(report["systems"][0]["accuracy"].get<double>() > 0.9);
  CHECK(report["detection"]["map"].get<double>() == doctest::Approx(1.0));
  std::ifstream tl(p("timeline.csv"));
  std::string header;
  std::getline(tl, header);
  CHECK(header == "t,gt,pred_base,pred_v");
}

TEST_CASE("data errors exit with 3") {
  simulate_once();
  {
    std::ifstream in(p("log.jsonl"));
    std::ofstream out(p("corrupt.jsonl"));
    std::string line;
    for (int i = 0; i < 5 && std::getline(in, line); ++i) out << line << '\n';
    out << "{\"t\": oops\n";
  }
  auto r = cli({"build-map", p("corrupt.jsonl"), "--out", p("c2.json"), "--truth", p("truth.json")});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("line 6") != std::string::npos);

  r = cli({"run", p("log.jsonl"), p("no-map.json"), "--out", p("v2.jsonl"), "--truth", p("truth.json")});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("io_error") != std::string::npos);

  // No camera available.
  r = cli({"build-map", p("log.jsonl"), "--out", p("c3.json")});
  CHECK(r.code != kExitOk);

  std::ofstream(p("short.jsonl")) << "{\"state\": \"red\"}\n";
  r = cli({"eval", "--truth", p("truth.json"), "--verdicts", p("short.jsonl")});
  CHECK(r.code == kExitData);
}

TEST_CASE("service errors exit with 4") {
  simulate_once();
  REQUIRE(cli({"build-map", p("log.jsonl"), "--out", p("cands4.json"), "--truth", p("truth.json"), "--auto-accept",
               "--map-out", p("map4.json")})
              .code == kExitOk);
  const std::string dead = "http://127.0.0.1:" + std::to_string(free_port());
  auto r = cli({"run", p("log.jsonl"), p("map4.json"), "--out", p("v4.jsonl"), "--truth", p("truth.json"),
                "--detector-url", dead, "--detector-timeout-ms", "200"});
  CHECK(r.code == kExitService);

  std::ofstream(p("map4.json.lock")) << ::getpid();
  r = cli({"curate", p("cands4.json"), p("map4.json"), "--bind", "127.0.0.1:0"});
  CHECK(r.code == kExitService);
  fs::remove(p("map4.json.lock"));
}

TEST_CASE("curate serves until interrupted") {
  simulate_once();
  REQUIRE(cli({"build-map", p("log.jsonl"), "--out", p("cands5.json"), "--truth", p("truth.json")}).code == kExitOk);
  const int port = free_port();
  Outcome result{-1, "", ""};
  std::thread t([&] {
    result = cli({"curate", p("cands5.json"), p("map5.json"), "--log", p("log.jsonl"), "--truth", p("truth.json"),
                  "--bind", "127.0.0.1:" + std::to_string(port)});
  });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(std::chrono::seconds(1));
  httplib::Result res;
  for (int i = 0; i < 100 && !(res = client.Get("/api/v1/candidates")); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(nlohmann::json::parse(res->body)["candidates"].size() == 2);
  // The signal handler is installed right after the listening message.
  std::this_thread::sleep_for(std::chrono::milliseconds(500));
  std::raise(SIGINT);
  t.join();
  CHECK(result.code == kExitOk);
  CHECK(result.out.find("listening on http://127.0.0.1:" + std::to_string(port) + "/api/v1") != std::string::npos);
  CHECK_FALSE(fs::exists(p("map5.json.lock")));
}

TEST_CASE("options from the environment") {
  simulate_once();
  ::setenv("TLR_ROUTE", "from-env", 1);
  ::setenv("TLR_TRUTH", p("truth.json").c_str(), 1);
  const auto r = cli({"build-map", p("log.jsonl"), "--out", p("cands6.json")});
  ::unsetenv("TLR_ROUTE");
  ::unsetenv("TLR_TRUTH");
  REQUIRE(r.code == kExitOk);
  CHECK(load_candidates(p("cands6.json")).route_id == "from-env");
}
