#include "subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include "edgebench/sampler.hpp"

namespace edgebench::detail {

Subprocess::Subprocess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw SpawnError("empty workload command");

  int out[2];
  int err[2];
  if (pipe2(out, O_CLOEXEC) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  if (pipe2(err, O_CLOEXEC) != 0) {
    ::close(out[0]);
    ::close(out[1]);
    throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_ = fork();
  if (pid_ < 0) {
    const int e = errno;
    for (int fd : {out[0], out[1], err[0], err[1]}) ::close(fd);
    throw SpawnError(std::string("fork: ") + std::strerror(e));
  }
  if (pid_ == 0) {
    setpgid(0, 0);
    dup2(out[1], STDOUT_FILENO);
    execvp(args[0], args.data());
    const int e = errno;
    [[maybe_unused]] auto n = ::write(err[1], &e, sizeof e);
    _exit(127);
  }

  setpgid(pid_, pid_);
  ::close(out[1]);
  ::close(err[1]);
  out_fd_ = out[0];

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(err[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(err[0]);
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    wait();
    ::close(out_fd_);
    out_fd_ = -1;
    throw SpawnError("exec " + argv[0] + ": " + std::strerror(child_errno));
  }
}

Subprocess::~Subprocess() {
  if (!exit_ && pid_ > 0) {
    kill();
    wait();
  }
  if (out_fd_ >= 0) ::close(out_fd_);
}

Subprocess::ReadStatus Subprocess::read_line(double deadline_s, std::string& line) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      line.assign(buffer_, 0, nl);
      buffer_.erase(0, nl + 1);
      return ReadStatus::Line;
    }
    if (eof_) {
      if (buffer_.empty()) return ReadStatus::Eof;
      line = std::move(buffer_);
      buffer_.clear();
      return ReadStatus::Line;
    }

    const double remaining = deadline_s - monotonic_seconds();
    if (remaining <= 0) return ReadStatus::Timeout;
    pollfd pfd{out_fd_, POLLIN, 0};
    const int ms = static_cast<int>(std::ceil(remaining * 1000.0));
    const int rc = ::poll(&pfd, 1, ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      eof_ = true;
      continue;
    }
    if (rc == 0) continue;  // re-check the deadline

    char chunk[4096];
    const ssize_t got = ::read(out_fd_, chunk, sizeof chunk);
    if (got > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(got));
    } else if (got == 0 || (errno != EINTR && errno != EAGAIN)) {
      eof_ = true;
    }
  }
}

void Subprocess::kill() {
  if (pid_ > 0 && !exit_) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
  }
}

Subprocess::Exit Subprocess::wait() {
  if (exit_) return *exit_;
  int status = 0;
  pid_t r;
  do {
    r = ::waitpid(pid_, &status, 0);
  } while (r < 0 && errno == EINTR);
  Exit e;
  if (r < 0) {
    e.signaled = true;
    e.code = 0;
  } else if (WIFSIGNALED(status)) {
    e.signaled = true;
    e.code = WTERMSIG(status);
  } else {
    e.code = WEXITSTATUS(status);
  }
  // Reap anything the workload left behind in its group.
  ::kill(-pid_, SIGKILL);
  exit_ = e;
  return e;
}

}  // namespace edgebench::detail
