#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rassoc::protocol {

// Line-oriented, bidirectional channel to a measurement target.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const std::string& line) = 0;
  // Next line without its newline; nullopt when nothing arrives within
  // `timeout`. Throws ProtocolError once the peer has closed the channel.
  virtual std::optional<std::string> receive(std::chrono::milliseconds timeout) = 0;
};

// Child process started through /bin/sh -c; requests go to its stdin and
// responses are read from its stdout.
class ChildProcessTransport final : public Transport {
 public:
  explicit ChildProcessTransport(const std::string& command);
  ~ChildProcessTransport() override;
  ChildProcessTransport(const ChildProcessTransport&) = delete;
  ChildProcessTransport& operator=(const ChildProcessTransport&) = delete;

  void send(const std::string& line) override;
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override;
  // Closes the child's stdin and reaps it; returns its exit status.
  int close();

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
  int status_ = -1;
};

// Synchronous in-process channel: every sent line is answered by `handler`.
class LoopbackTransport final : public Transport {
 public:
  using Handler = std::function<std::string(const std::string&)>;
  explicit LoopbackTransport(Handler handler) : handler_(std::move(handler)) {}

  void send(const std::string& line) override { pending_.push_back(handler_(line)); }
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override;

 private:
  Handler handler_;
  std::deque<std::string> pending_;
};

// Replays canned response lines, one per receive, and records what was sent.
// When the script runs out, receive times out.
class ScriptedTransport final : public Transport {
 public:
  explicit ScriptedTransport(std::vector<std::string> responses)
      : responses_(responses.begin(), responses.end()) {}

  void send(const std::string& line) override { sent_.push_back(line); }
  std::optional<std::string> receive(std::chrono::milliseconds timeout) override;
  const std::vector<std::string>& sent() const { return sent_; }

 private:
  std::deque<std::string> responses_;
  std::vector<std::string> sent_;
};

}  // namespace rassoc::protocol
