#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqdesign/scorer.hpp"

namespace seqdesign {

/// Newline-delimited text transport.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  /// Returns std::nullopt on timeout. Throws ScorerError when the peer hangs up.
  virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
};

/// Channel over a pair of POSIX file descriptors (pipes or a socket).
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(std::string_view line) override;
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override;

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
};

/// Runs `/bin/sh -c command` with its stdin/stdout connected to the channel.
class ChildProcessChannel : public LineChannel {
 public:
  explicit ChildProcessChannel(const std::string& command);
  ~ChildProcessChannel() override;
  ChildProcessChannel(const ChildProcessChannel&) = delete;
  ChildProcessChannel& operator=(const ChildProcessChannel&) = delete;

  void write_line(std::string_view line) override { io_->write_line(line); }
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override {
    return io_->read_line(timeout);
  }

 private:
  int pid_ = -1;
  std::unique_ptr<FdChannel> io_;
};

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port);

/// Parsed endpoint: "HOST:PORT" (TCP) or "exec:COMMAND" (child process).
struct Endpoint {
  enum class Kind { kTcp, kExec } kind = Kind::kTcp;
  std::string host;
  std::uint16_t port = 0;
  std::string command;

  static Endpoint parse(std::string_view text);
  std::string to_string() const;
  std::unique_ptr<LineChannel> open() const;
};

struct WireRequest {
  std::uint64_t id = 0;
  std::vector<std::string> sequences;
};

struct WireResponse {
  std::uint64_t id = 0;
  std::vector<double> scores;
  std::optional<std::vector<std::vector<double>>> plddt;
};

std::string encode_request(const WireRequest& request);
WireRequest decode_request(std::string_view line);
std::string encode_response(const WireResponse& response);
/// Throws MalformedResponse for anything that is not a well-formed response document.
WireResponse decode_response(std::string_view line);

struct RemoteOptions {
  std::chrono::milliseconds timeout{30000};
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
};

/// Scores batches through the line protocol. One request per batch; the
/// response must echo the request id and carry one score per sequence.
/// Failed attempts reopen the channel and back off exponentially.
class RemoteScorer : public Scorer {
 public:
  using ChannelFactory = std::function<std::unique_ptr<LineChannel>()>;

  RemoteScorer(ChannelFactory factory, Alphabet alphabet, RemoteOptions options = {}, std::string label = "remote");
  RemoteScorer(const Endpoint& endpoint, Alphabet alphabet, RemoteOptions options = {});

  std::vector<ScoreReport> score(std::span<const Sequence> batch) override;
  std::string describe() const override { return label_; }

  std::uint64_t requests_sent() const { return requests_sent_; }

 private:
  std::vector<ScoreReport> attempt(std::span<const Sequence> batch, std::uint64_t id);

  ChannelFactory factory_;
  Alphabet alphabet_;
  RemoteOptions options_;
  std::string label_;
  std::mutex mu_;
  std::unique_ptr<LineChannel> channel_;
  std::uint64_t next_id_ = 1;
  std::uint64_t requests_sent_ = 0;
};

/// Server loop: answers each request line with handler(request) until EOF.
using RequestHandler = std::function<WireResponse(const WireRequest&)>;
void serve_lines(LineChannel& channel, const RequestHandler& handler);
/// Accepts TCP connections on `port` and serves them one at a time. Never returns
/// unless `max_connections` (when non-zero) have been served.
void serve_tcp(std::uint16_t port, const RequestHandler& handler, std::size_t max_connections = 0);

RequestHandler constant_handler(double score);
/// Scores with `scorer`, decoding sequences with `alphabet`.
RequestHandler scorer_handler(Scorer& scorer, const Alphabet& alphabet);

}  // namespace seqdesign
