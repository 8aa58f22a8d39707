#pragma once

#include <sys/types.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgebench::detail {

class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Child process in its own process group with stdout captured through a pipe.
// stderr is inherited. Killing targets the whole group.
class Subprocess {
 public:
  explicit Subprocess(const std::vector<std::string>& argv);
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  enum class ReadStatus { Line, Eof, Timeout };

  // Reads the next stdout line (without the trailing newline), waiting until the
  // absolute monotonic `deadline_s` at most.
  ReadStatus read_line(double deadline_s, std::string& line);

  void kill();

  struct Exit {
    bool signaled = false;
    int code = 0;  // exit code, or signal number when signaled
    bool clean() const { return !signaled && code == 0; }
  };
  Exit wait();

  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::optional<Exit> exit_;
};

}  // namespace edgebench::detail
