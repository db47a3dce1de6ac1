#include <netdb.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstring>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "kgabduct/env.hpp"
#include "kgabduct/error.hpp"
#include "kgabduct/executor.hpp"
#include "kgabduct/sampler.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace kgabduct;
using json = nlohmann::json;

namespace {

// a,b,c,d with r1, r2: (a,r1,b), (a,r1,c), (d,r2,c).
std::shared_ptr<const RewardEnvironment> toy_env() {
  auto labels = std::make_shared<GraphLabels>(std::vector<std::string>{"a", "b", "c", "d"},
                                              std::vector<std::string>{"r1", "r2"});
  auto g = std::make_shared<const KnowledgeGraph>(
      labels, std::vector<Triple>{{0, 0, 1}, {0, 0, 2}, {3, 1, 2}});
  return std::make_shared<const RewardEnvironment>(g);
}

const std::vector<std::string> kTwoIn = {"[I]", "[r1]", "[a]", "[N]", "[r2]", "[d]"};

int connect_to(const std::string& address) {
  if (address.rfind("unix:", 0) == 0) {
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    const std::string path = address.substr(5);
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) return -1;
    return fd;
  }
  const auto colon = address.rfind(':');
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(address.substr(0, colon).c_str(), address.substr(colon + 1).c_str(), &hints,
                    &res) != 0) {
    return -1;
  }
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int ok = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  return ok == 0 ? fd : -1;
}

std::string round_trip(int fd, const std::string& payload, std::size_t lines) {
  std::size_t sent = 0;
  while (sent < payload.size()) {
    const ssize_t n = ::send(fd, payload.data() + sent, payload.size() - sent, 0);
    if (n <= 0) return {};
    sent += static_cast<std::size_t>(n);
  }
  std::string got;
  char buf[4096];
  while (static_cast<std::size_t>(std::count(got.begin(), got.end(), '\n')) < lines) {
    const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    if (n <= 0) break;
    got.append(buf, static_cast<std::size_t>(n));
  }
  return got;
}

}  // namespace

TEST_CASE("2in rewards on the toy graph") {
  const auto env = toy_env();
  RewardRequest req{1, {1}, kTwoIn};
  auto r = env->score(req);
  CHECK(r.valid);
  CHECK(r.reward == 1.0);
  CHECK(r.conclusion_size == 1);
  CHECK_FALSE(r.error.has_value());

  req.observation = {1, 2};
  r = env->score(req);
  CHECK(r.valid);
  CHECK(r.reward == 0.5);
}

TEST_CASE("invalid sequences score zero with a reason") {
  const auto env = toy_env();
  auto err = [&](std::vector<EntityId> obs, std::vector<std::string> actions) {
    const auto r = env->score({3, std::move(obs), std::move(actions)});
    CHECK_FALSE(r.valid);
    CHECK(r.reward == 0.0);
    CHECK(r.conclusion_size == 0);
    REQUIRE(r.error.has_value());
    return *r.error;
  };
  CHECK(err({1}, {"[I]", "[r1]", "[a]"}) == "incomplete");
  CHECK(err({1}, {}) == "empty");
  CHECK(err({1}, {"[r1]", "[zz]"}) == "unknown_token");
  CHECK(err({1}, {"[r1]", "[a]", "[a]"}) == "trailing");
  CHECK(err({1}, {"[N]", "[r1]", "[a]"}) == "invalid");
  CHECK(err({}, {"[r1]", "[a]"}) == "bad_observation");
  CHECK(err({9}, {"[r1]", "[a]"}) == "bad_observation");
}

TEST_CASE("wire format") {
  const auto env = toy_env();
  const std::string line = R"({"id":7,"obs":[1],"actions":["[I]","[r1]","[a]","[N]","[r2]","[d]"]})";
  const auto req = parse_reward_request(line);
  CHECK(req.id == 7);
  CHECK(req.actions == kTwoIn);
  CHECK(env->handle_line(line) == R"({"id":7,"valid":true,"reward":1.0,"size":1,"err":null})");

  const auto bad = json::parse(env->handle_line("{nope"));
  CHECK(bad["err"] == "malformed");
  CHECK(bad["id"] == -1);
  const auto missing = json::parse(env->handle_line(R"({"id":4,"obs":[1]})"));
  CHECK(missing["err"] == "malformed");
  CHECK(missing["id"] == 4);
  const auto negative = json::parse(env->handle_line(R"({"id":5,"obs":[-3],"actions":["[r1]","[a]"]})"));
  CHECK(negative["err"] == "bad_observation");
  CHECK_THROWS_AS(parse_reward_request("[]"), Error);
}

TEST_CASE("batches answer in request order with per-item validity") {
  const auto env = toy_env();
  json batch = json::array();
  for (int i = 0; i < 64; ++i) {
    json req = {{"id", i}, {"obs", {1}}};
    req["actions"] = i % 3 == 0 ? json(kTwoIn) : json({"[I]", "[r1]"});
    batch.push_back(i % 7 == 6 ? json("garbage") : req);
  }
  for (unsigned workers : {1u, 4u}) {
    const auto out = json::parse(env->handle_line(batch.dump(), workers));
    REQUIRE(out.size() == 64);
    for (int i = 0; i < 64; ++i) {
      if (i % 7 == 6) {
        CHECK(out[i]["err"] == "malformed");
      } else {
        CHECK(out[i]["id"] == i);
        CHECK(out[i]["valid"] == (i % 3 == 0));
      }
    }
  }
}

TEST_CASE("rewards equal library computation and repeat exactly") {
  Rng rng(44);
  auto g = std::make_shared<const KnowledgeGraph>(oracle::random_graph(rng, 30, 4, 200));
  const RewardEnvironment env(g);
  const auto& vocab = env.vocabulary();
  for (int i = 0; i < 200; ++i) {
    const Pattern p = kAllPatterns[rng.below(kAllPatterns.size())];
    const auto s = sample_pair(*g, p, rng);
    auto tokens = to_tokens(hypothesis_to_actions(s.hypothesis), vocab);
    std::vector<EntityId> obs(s.observation.begin(), s.observation.end());
    obs.push_back(static_cast<EntityId>(rng.below(30)));
    if (i % 4 == 1) tokens.pop_back();
    const RewardRequest req{i, obs, tokens};
    const auto a = env.score(req), b = env.score(req);
    CHECK(a == b);
    CHECK(to_json(a) == to_json(b));
    if (i % 4 == 1) {
      CHECK_FALSE(a.valid);
      CHECK(a.reward == 0.0);
    } else {
      REQUIRE(a.valid);
      const auto answers = conclusion(s.hypothesis, *g);
      CHECK(a.reward == jaccard(answers, make_entity_set(obs)));
      CHECK(a.conclusion_size == answers.size());
    }
  }
}

TEST_CASE("stream serving") {
  const auto env = toy_env();
  std::istringstream in(R"({"id":1,"obs":[1],"actions":["[r1]","[a]"]})"
                        "\n\n"
                        R"({"id":2,"obs":[1],"actions":["[I]"]})"
                        "\n");
  std::ostringstream out;
  serve_stream(*env, in, out);
  std::istringstream lines(out.str());
  std::string first, second, extra;
  std::getline(lines, first);
  std::getline(lines, second);
  CHECK_FALSE(std::getline(lines, extra));
  CHECK(json::parse(first)["reward"] == 0.5);
  CHECK(json::parse(second)["err"] == "incomplete");
}

TEST_CASE("socket server on an ephemeral TCP port") {
  EnvServer server(toy_env(), 2);
  server.start("127.0.0.1:0");
  const std::string address = server.address();
  CHECK(address.rfind("127.0.0.1:", 0) == 0);
  CHECK(address != "127.0.0.1:0");

  std::vector<std::thread> clients;
  std::vector<std::string> replies(4);
  for (int c = 0; c < 4; ++c) {
    clients.emplace_back([&, c] {
      const int fd = connect_to(address);
      if (fd < 0) return;
      const std::string payload =
          R"({"id":)" + std::to_string(c) + R"(,"obs":[1],"actions":["[r1]","[a]"]})" + "\n" +
          R"([{"id":10,"obs":[1],"actions":[]},{"id":11,"obs":[2],"actions":["[r2]","[d]"]}])" +
          "\n";
      replies[c] = round_trip(fd, payload, 2);
      ::close(fd);
    });
  }
  for (auto& t : clients) t.join();
  for (int c = 0; c < 4; ++c) {
    std::istringstream lines(replies[c]);
    std::string one, two;
    REQUIRE(std::getline(lines, one));
    REQUIRE(std::getline(lines, two));
    CHECK(json::parse(one)["id"] == c);
    const auto batch = json::parse(two);
    REQUIRE(batch.size() == 2);
    CHECK(batch[0]["err"] == "empty");
    CHECK(batch[1]["reward"] == 1.0);
  }
  server.stop();
}

TEST_CASE("socket server on a unix path") {
  test_support::TempDir dir;
  const std::string address = "unix:" + (dir.path() / "env.sock").string();
  EnvServer server(toy_env());
  server.start(address);
  CHECK(server.address() == address);
  const int fd = connect_to(address);
  REQUIRE(fd >= 0);
  const auto reply = round_trip(fd, "{\"id\":1,\"obs\":[1],\"actions\":[\"[r1]\",\"[a]\"]}\n", 1);
  CHECK(json::parse(reply)["valid"] == true);
  ::close(fd);
  server.stop();
  CHECK_FALSE(std::filesystem::exists(dir.path() / "env.sock"));
}
