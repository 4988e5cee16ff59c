#include "rassoc/protocol/transport.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "rassoc/errors.hpp"

namespace rassoc::protocol {

namespace {

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

}  // namespace

ChildProcessTransport::ChildProcessTransport(const std::string& command) {
  int in_pipe[2], out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw ProtocolError(sys_error("pipe"));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ProtocolError(sys_error("pipe"));
  }
  pid_ = fork();
  if (pid_ < 0) throw ProtocolError(sys_error("fork"));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  // A dead child must surface as an error on write, not kill the client.
  std::signal(SIGPIPE, SIG_IGN);
}

ChildProcessTransport::~ChildProcessTransport() {
  try {
    close();
  } catch (...) {
  }
}

void ChildProcessTransport::send(const std::string& line) {
  if (to_child_ < 0) throw ProtocolError("channel closed");
  std::string data = line + '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(sys_error("write to target"));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ChildProcessTransport::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (eof_ || from_child_ < 0) throw ProtocolError("target closed the channel");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int r = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(sys_error("poll"));
    }
    if (r == 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(sys_error("read from target"));
    }
    if (n == 0) {
      eof_ = true;
      continue;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

int ChildProcessTransport::close() {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (pid_ > 0) {
    // Give the child a moment to exit on EOF before forcing it.
    for (int i = 0; i < 200; ++i) {
      const pid_t r = waitpid(pid_, &status_, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        break;
      }
      usleep(10000);
    }
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, &status_, 0);
      pid_ = -1;
    }
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  return status_;
}

std::optional<std::string> LoopbackTransport::receive(std::chrono::milliseconds) {
  if (pending_.empty()) return std::nullopt;
  std::string line = std::move(pending_.front());
  pending_.pop_front();
  return line;
}

std::optional<std::string> ScriptedTransport::receive(std::chrono::milliseconds) {
  if (responses_.empty()) return std::nullopt;
  std::string line = std::move(responses_.front());
  responses_.pop_front();
  return line;
}

}  // namespace rassoc::protocol
