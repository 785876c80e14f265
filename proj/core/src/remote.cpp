#include "seqdesign/remote.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include <nlohmann/json.hpp>

#include "seqdesign/error.hpp"

namespace seqdesign {

using nlohmann::json;

FdChannel::FdChannel(int read_fd, int write_fd, bool owns) : read_fd_(read_fd), write_fd_(write_fd), owns_(owns) {}

FdChannel::~FdChannel() {
  if (!owns_) return;
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
}

void FdChannel::write_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      // Pipes: fall back to write(); SIGPIPE is ignored by the process that owns the channel.
      const ssize_t w = ::write(write_fd_, data.data() + off, data.size() - off);
      if (w < 0) {
        if (errno == EINTR) continue;
        throw ScorerError(std::string("write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(w);
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(std::string("send failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> FdChannel::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw ScorerError("peer closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ChildProcessChannel::ChildProcessChannel(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw ScorerError("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ScorerError("pipe failed");
  }
  ::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) throw ScorerError("fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  pid_ = pid;
  io_ = std::make_unique<FdChannel>(from_child[0], to_child[1], true);
}

ChildProcessChannel::~ChildProcessChannel() {
  io_.reset();  // closes the child's stdin, which ends a well-behaved server
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, &status, 0);
  }
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0)
    throw ScorerError("cannot resolve " + host);
  int fd = -1;
  for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ScorerError("cannot connect to " + host + ":" + service);
  return std::make_unique<FdChannel>(fd, fd, true);
}

Endpoint Endpoint::parse(std::string_view text) {
  Endpoint ep;
  if (text.substr(0, 5) == "exec:") {
    ep.kind = Kind::kExec;
    ep.command = std::string(text.substr(5));
    if (ep.command.empty()) throw ConfigError("empty exec endpoint");
    return ep;
  }
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw ConfigError("endpoint must be HOST:PORT or exec:COMMAND");
  ep.kind = Kind::kTcp;
  ep.host = std::string(text.substr(0, colon));
  const auto port_text = std::string(text.substr(colon + 1));
  try {
    const int port = std::stoi(port_text);
    if (port <= 0 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw ConfigError("bad port in endpoint '" + std::string(text) + "'");
  }
  return ep;
}

std::string Endpoint::to_string() const {
  return kind == Kind::kExec ? "exec:" + command : host + ":" + std::to_string(port);
}

std::unique_ptr<LineChannel> Endpoint::open() const {
  if (kind == Kind::kExec) return std::make_unique<ChildProcessChannel>(command);
  return connect_tcp(host, port);
}

std::string encode_request(const WireRequest& request) {
  json j;
  j["id"] = request.id;
  j["sequences"] = request.sequences;
  return j.dump();
}

WireRequest decode_request(std::string_view line) {
  try {
    const auto j = json::parse(line);
    WireRequest r;
    r.id = j.at("id").get<std::uint64_t>();
    r.sequences = j.at("sequences").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("malformed request: ") + e.what());
  }
}

std::string encode_response(const WireResponse& response) {
  json j;
  j["id"] = response.id;
  j["scores"] = response.scores;
  if (response.plddt) j["plddt"] = *response.plddt;
  return j.dump();
}

WireResponse decode_response(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("response is not JSON: ") + e.what());
  }
  try {
    WireResponse r;
    if (!j.is_object() || !j.contains("id") || !j.contains("scores"))
      throw MalformedResponse("response lacks id or scores");
    r.id = j.at("id").get<std::uint64_t>();
    r.scores = j.at("scores").get<std::vector<double>>();
    if (j.contains("plddt") && !j.at("plddt").is_null())
      r.plddt = j.at("plddt").get<std::vector<std::vector<double>>>();
    return r;
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("malformed response: ") + e.what());
  }
}

RemoteScorer::RemoteScorer(ChannelFactory factory, Alphabet alphabet, RemoteOptions options, std::string label)
    : factory_(std::move(factory)), alphabet_(std::move(alphabet)), options_(options), label_(std::move(label)) {
  if (options_.attempts < 1) throw ConfigError("remote scorer needs at least one attempt");
}

RemoteScorer::RemoteScorer(const Endpoint& endpoint, Alphabet alphabet, RemoteOptions options)
    : RemoteScorer([endpoint] { return endpoint.open(); }, std::move(alphabet), options,
                   "remote(" + endpoint.to_string() + ")") {}

std::vector<ScoreReport> RemoteScorer::score(std::span<const Sequence> batch) {
  if (batch.empty()) return {};
  std::lock_guard lock(mu_);
  auto backoff = options_.initial_backoff;
  for (int attempt_no = 1;; ++attempt_no) {
    const std::uint64_t id = next_id_++;
    try {
      return attempt(batch, id);
    } catch (const ScorerError&) {
      channel_.reset();
      if (attempt_no >= options_.attempts) throw;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

std::vector<ScoreReport> RemoteScorer::attempt(std::span<const Sequence> batch, std::uint64_t id) {
  if (!channel_) channel_ = factory_();
  WireRequest req{id, {}};
  req.sequences.reserve(batch.size());
  for (const auto& s : batch) req.sequences.push_back(s.to_string(alphabet_));
  channel_->write_line(encode_request(req));
  ++requests_sent_;

  auto line = channel_->read_line(options_.timeout);
  if (!line) throw ScorerTimeout("remote scorer timed out after " + std::to_string(options_.timeout.count()) + " ms");
  auto resp = decode_response(*line);
  if (resp.id != id)
    throw ProtocolError("response id " + std::to_string(resp.id) + " does not match request id " + std::to_string(id));
  if (resp.scores.size() != batch.size()) throw MalformedResponse("response carries wrong number of scores");
  if (resp.plddt && resp.plddt->size() != batch.size())
    throw MalformedResponse("response carries wrong number of confidence vectors");

  std::vector<ScoreReport> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i].score = resp.scores[i];
    if (resp.plddt) out[i].confidence = std::move((*resp.plddt)[i]);
    validate_report(out[i], batch[i].size());
  }
  return out;
}

void serve_lines(LineChannel& channel, const RequestHandler& handler) {
  while (true) {
    std::optional<std::string> line;
    try {
      line = channel.read_line(std::chrono::hours(24));
    } catch (const ScorerError&) {
      return;  // EOF
    }
    if (!line) continue;
    if (line->empty()) continue;
    const auto req = decode_request(*line);
    channel.write_line(encode_response(handler(req)));
  }
}

void serve_tcp(std::uint16_t port, const RequestHandler& handler, std::size_t max_connections) {
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  if (srv < 0) throw Error("socket failed");
  int one = 1;
  ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(srv, 4) != 0) {
    ::close(srv);
    throw Error("cannot listen on port " + std::to_string(port));
  }
  for (std::size_t served = 0; max_connections == 0 || served < max_connections; ++served) {
    const int fd = ::accept(srv, nullptr, nullptr);
    if (fd < 0) continue;
    FdChannel ch(fd, fd, true);
    serve_lines(ch, handler);
  }
  ::close(srv);
}

RequestHandler constant_handler(double score) {
  return [score](const WireRequest& req) {
    WireResponse r;
    r.id = req.id;
    r.scores.assign(req.sequences.size(), score);
    return r;
  };
}

RequestHandler scorer_handler(Scorer& scorer, const Alphabet& alphabet) {
  return [&scorer, alphabet](const WireRequest& req) {
    std::vector<Sequence> batch;
    batch.reserve(req.sequences.size());
    for (const auto& s : req.sequences) batch.push_back(Sequence::from_string(s, alphabet));
    auto reports = scorer.score(batch);
    WireResponse r;
    r.id = req.id;
    std::vector<std::vector<double>> conf;
    bool have_conf = true;
    for (auto& rep : reports) {
      r.scores.push_back(rep.score);
      have_conf = have_conf && !rep.confidence.empty();
      conf.push_back(std::move(rep.confidence));
    }
    if (have_conf && !conf.empty()) r.plddt = std::move(conf);
    return r;
  };
}

}  // namespace seqdesign
