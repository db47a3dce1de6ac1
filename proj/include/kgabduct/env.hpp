#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "kgabduct/graph.hpp"
#include "kgabduct/tokenizer.hpp"

namespace kgabduct {

struct RewardRequest {
  std::int64_t id = 0;
  std::vector<EntityId> observation;
  std::vector<std::string> actions;
};

// valid == false implies reward == 0 and error set.
struct RewardResponse {
  std::int64_t id = 0;
  bool valid = false;
  double reward = 0;
  std::size_t conclusion_size = 0;
  std::optional<std::string> error;

  friend bool operator==(const RewardResponse&, const RewardResponse&) = default;
};

// Wire format, one JSON object per line:
//   request  {"id":int,"obs":[int],"actions":[string]}
//   response {"id":int,"valid":bool,"reward":float,"size":int,"err":string|null}
// A line holding a JSON array is a batch and is answered with an array in
// request order.
RewardRequest parse_reward_request(std::string_view line);
std::string to_json(const RewardResponse& response);

// Jaccard reward of generated action sequences against observations on the
// training graph. Pure: equal requests give bit-identical responses.
class RewardEnvironment {
 public:
  explicit RewardEnvironment(std::shared_ptr<const KnowledgeGraph> train);

  RewardResponse score(const RewardRequest& request) const;
  std::vector<RewardResponse> score_batch(std::span<const RewardRequest> requests,
                                          unsigned workers = 1) const;

  // Answers one wire line; malformed input yields an error response with
  // err "malformed" rather than an exception.
  std::string handle_line(std::string_view line, unsigned workers = 1) const;

  const KnowledgeGraph& graph() const { return *graph_; }
  const Vocabulary& vocabulary() const { return vocab_; }

 private:
  std::shared_ptr<const KnowledgeGraph> graph_;
  Vocabulary vocab_;
};

// Line-oriented stream server. Addresses: "unix:/path", "host:port",
// ":port" (loopback). Port 0 picks a free port; `address()` reports it.
class EnvServer {
 public:
  explicit EnvServer(std::shared_ptr<const RewardEnvironment> env, unsigned workers = 1);
  ~EnvServer();

  EnvServer(const EnvServer&) = delete;
  EnvServer& operator=(const EnvServer&) = delete;

  void start(const std::string& listen);
  const std::string& address() const { return address_; }
  void stop();
  void wait();

 private:
  void accept_loop();
  void serve_client(int fd);

  std::shared_ptr<const RewardEnvironment> env_;
  unsigned workers_;
  int listen_fd_ = -1;
  std::string address_;
  std::string unix_path_;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex clients_mutex_;
  std::vector<int> client_fds_;
  std::vector<std::thread> client_threads_;
};

// Serves requests read from `in`, writing responses to `out`, until EOF.
void serve_stream(const RewardEnvironment& env, std::istream& in, std::ostream& out,
                  unsigned workers = 1);

}  // namespace kgabduct
