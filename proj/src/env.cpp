#include "kgabduct/env.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <algorithm>
#include <arpa/inet.h>
#include <cstring>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "kgabduct/error.hpp"
#include "kgabduct/executor.hpp"

namespace kgabduct {

using json = nlohmann::json;

namespace {

RewardRequest request_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kParse, "request must be an object");
  RewardRequest req;
  const auto& id = doc.at("id");
  if (!id.is_number_integer()) throw Error(ErrorKind::kParse, "id must be an integer");
  req.id = id.get<std::int64_t>();
  const auto& obs = doc.at("obs");
  const auto& actions = doc.at("actions");
  if (!obs.is_array() || !actions.is_array()) {
    throw Error(ErrorKind::kParse, "obs and actions must be arrays");
  }
  for (const auto& o : obs) {
    if (!o.is_number_integer()) throw Error(ErrorKind::kParse, "obs entries must be integers");
    const auto v = o.get<std::int64_t>();
    // Out-of-range ids are kept as an invalid sentinel and rejected while
    // scoring, so they do not count as malformed wire input.
    req.observation.push_back(v < 0 || v > UINT32_MAX ? UINT32_MAX : static_cast<EntityId>(v));
  }
  for (const auto& a : actions) {
    if (!a.is_string()) throw Error(ErrorKind::kParse, "actions must be strings");
    req.actions.push_back(a.get<std::string>());
  }
  return req;
}

RewardResponse malformed(const json* doc) {
  RewardResponse r;
  r.id = -1;
  if (doc && doc->is_object()) {
    auto it = doc->find("id");
    if (it != doc->end() && it->is_number_integer()) r.id = it->get<std::int64_t>();
  }
  r.error = "malformed";
  return r;
}

nlohmann::ordered_json response_json(const RewardResponse& r) {
  nlohmann::ordered_json doc;
  doc["id"] = r.id;
  doc["valid"] = r.valid;
  doc["reward"] = r.reward;
  doc["size"] = r.conclusion_size;
  doc["err"] = r.error ? nlohmann::ordered_json(*r.error) : nlohmann::ordered_json(nullptr);
  return doc;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

RewardRequest parse_reward_request(std::string_view line) {
  try {
    return request_from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed request: ") + e.what());
  }
}

std::string to_json(const RewardResponse& response) { return response_json(response).dump(); }

RewardEnvironment::RewardEnvironment(std::shared_ptr<const KnowledgeGraph> train)
    : graph_(std::move(train)), vocab_(graph_->labels()) {}

RewardResponse RewardEnvironment::score(const RewardRequest& request) const {
  RewardResponse r;
  r.id = request.id;
  EntitySet observation = make_entity_set(request.observation);
  if (observation.empty() || observation.back() >= graph_->num_entities()) {
    r.error = "bad_observation";
    return r;
  }
  ParseOutcome parsed = tokens_to_hypothesis(request.actions, vocab_);
  if (!parsed.ok()) {
    r.error = to_string(parsed.error->kind);
    return r;
  }
  try {
    const EntitySet answers = conclusion(*parsed.hypothesis, *graph_);
    r.valid = true;
    r.reward = jaccard(answers, observation);
    r.conclusion_size = answers.size();
  } catch (const Error& e) {
    r.error = e.kind() == ErrorKind::kForeignSymbol ? "foreign_symbol" : "invalid";
  }
  return r;
}

std::vector<RewardResponse> RewardEnvironment::score_batch(std::span<const RewardRequest> requests,
                                                           unsigned workers) const {
  std::vector<RewardResponse> out(requests.size());
  parallel_for(requests.size(), workers, [&](std::size_t i) { out[i] = score(requests[i]); });
  return out;
}

std::string RewardEnvironment::handle_line(std::string_view line, unsigned workers) const {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception&) {
    return to_json(malformed(nullptr));
  }
  if (doc.is_array()) {
    std::vector<RewardRequest> requests(doc.size());
    std::vector<std::optional<RewardResponse>> failures(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      try {
        requests[i] = request_from_json(doc[i]);
      } catch (const std::exception&) {
        failures[i] = malformed(&doc[i]);
      }
    }
    std::vector<RewardResponse> responses(doc.size());
    parallel_for(doc.size(), workers, [&](std::size_t i) {
      responses[i] = failures[i] ? *failures[i] : score(requests[i]);
    });
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : responses) out.push_back(response_json(r));
    return out.dump();
  }
  try {
    return to_json(score(request_from_json(doc)));
  } catch (const std::exception&) {
    return to_json(malformed(&doc));
  }
}

void serve_stream(const RewardEnvironment& env, std::istream& in, std::ostream& out,
                  unsigned workers) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << env.handle_line(line, workers) << '\n';
    out.flush();
  }
}

EnvServer::EnvServer(std::shared_ptr<const RewardEnvironment> env, unsigned workers)
    : env_(std::move(env)), workers_(workers) {}

EnvServer::~EnvServer() { stop(); }

void EnvServer::start(const std::string& listen) {
  if (listen_fd_ >= 0) throw Error(ErrorKind::kInvalidArgument, "server already started");
  if (listen.rfind("unix:", 0) == 0) {
    unix_path_ = listen.substr(5);
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (unix_path_.empty() || unix_path_.size() >= sizeof(addr.sun_path)) {
      throw Error(ErrorKind::kInvalidArgument, "bad unix socket path");
    }
    std::memcpy(addr.sun_path, unix_path_.c_str(), unix_path_.size() + 1);
    ::unlink(unix_path_.c_str());
    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (listen_fd_ < 0 ||
        ::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      const std::string why = std::strerror(errno);
      stop();
      throw Error(ErrorKind::kIo, "cannot bind " + listen + ": " + why);
    }
    address_ = listen;
  } else {
    const auto colon = listen.rfind(':');
    std::string host = colon == std::string::npos ? "127.0.0.1" : listen.substr(0, colon);
    const std::string port = colon == std::string::npos ? listen : listen.substr(colon + 1);
    if (host.empty()) host = "127.0.0.1";
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
      throw Error(ErrorKind::kInvalidArgument, "cannot resolve " + listen);
    }
    listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const int one = 1;
    if (listen_fd_ >= 0) ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    const bool bound = listen_fd_ >= 0 && ::bind(listen_fd_, res->ai_addr, res->ai_addrlen) == 0;
    ::freeaddrinfo(res);
    if (!bound) {
      const std::string why = std::strerror(errno);
      stop();
      throw Error(ErrorKind::kIo, "cannot bind " + listen + ": " + why);
    }
    sockaddr_in actual{};
    socklen_t len = sizeof(actual);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&actual), &len);
    char buf[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &actual.sin_addr, buf, sizeof(buf));
    address_ = std::string(buf) + ":" + std::to_string(ntohs(actual.sin_port));
  }
  if (::listen(listen_fd_, 64) != 0) {
    stop();
    throw Error(ErrorKind::kIo, "listen failed on " + listen);
  }
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void EnvServer::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_ || errno == EBADF || errno == EINVAL) return;
      continue;
    }
    std::lock_guard lock(clients_mutex_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    client_fds_.push_back(fd);
    client_threads_.emplace_back([this, fd] { serve_client(fd); });
  }
}

void EnvServer::serve_client(int fd) {
  std::string pending;
  char buf[65536];
  while (true) {
    const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    if (n <= 0) break;
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = pending.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(pending.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      if (!send_all(fd, env_->handle_line(line, workers_) + "\n")) return;
    }
    pending.erase(0, start);
  }
  ::shutdown(fd, SHUT_WR);
}

void EnvServer::stop() {
  stopping_ = true;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(clients_mutex_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(client_threads_);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
  {
    std::lock_guard lock(clients_mutex_);
    for (int fd : client_fds_) ::close(fd);
    client_fds_.clear();
  }
  if (!unix_path_.empty()) {
    ::unlink(unix_path_.c_str());
    unix_path_.clear();
  }
}

void EnvServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

}  // namespace kgabduct
