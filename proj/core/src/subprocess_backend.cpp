#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "mot/executor.hpp"

namespace mot {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

SubprocessBackend::SubprocessBackend(std::vector<std::string> argv,
                                     std::chrono::milliseconds overhead)
    : argv_(std::move(argv)), overhead_(overhead) {
  if (argv_.empty()) throw Error("worker command is empty");
  // Writes to a dead worker must surface as EPIPE, not kill the process.
  ::signal(SIGPIPE, SIG_IGN);
}

SubprocessBackend::~SubprocessBackend() { stop(); }

void SubprocessBackend::start() {
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BackendUnavailable("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw BackendUnavailable("pipe failed");
  }
  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw BackendUnavailable("fork failed");
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void SubprocessBackend::stop() {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
  buffer_.clear();
}

ExecReport SubprocessBackend::run(const ExecRequest& request) {
  std::lock_guard lock(mutex_);
  if (pid_ < 0) start();
  std::string line = encode_wire_request(request) + "\n";
  if (!write_all(to_child_, line)) {
    stop();
    throw BackendUnavailable("worker is not accepting requests");
  }

  // Budget: every case may use its full timeout, plus fixed overhead.
  auto budget = std::chrono::milliseconds(static_cast<long long>(request.timeout_ms) *
                                          static_cast<long long>(request.cases.size())) +
                overhead_;
  auto deadline = std::chrono::steady_clock::now() + budget;
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string response = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      ExecReport report;
      try {
        report = decode_wire_response(response);
      } catch (const BackendUnavailable&) {
        stop();
        throw;
      }
      if (report.id != request.id) {
        stop();
        throw BackendUnavailable("worker answered '" + report.id + "' for '" + request.id + "'");
      }
      return report;
    }
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      stop();
      throw BackendUnavailable("worker did not answer within " + std::to_string(budget.count()) + " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
    if (rc < 0 && errno != EINTR) {
      stop();
      throw BackendUnavailable(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc <= 0) continue;
    char chunk[4096];
    ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      stop();
      throw BackendUnavailable("worker exited");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

WorkerPool::WorkerPool(std::vector<std::string> argv, int workers) {
  if (workers < 1) workers = 1;
  for (int i = 0; i < workers; ++i) workers_.push_back(std::make_unique<SubprocessBackend>(argv));
}

ExecReport WorkerPool::run(const ExecRequest& request) {
  SubprocessBackend* worker;
  {
    std::lock_guard lock(pick_);
    worker = workers_[next_++ % workers_.size()].get();
  }
  return worker->run(request);
}

}  // namespace mot
