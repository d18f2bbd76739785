#include "ilcshape/plant_oracle.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include <fmt/format.h>

#include "ilcshape/errors.hpp"

namespace ilcshape {

PlantOracle::PlantOracle(double sample_rate_hz) : fs_(sample_rate_hz) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw std::invalid_argument("PlantOracle: sample rate must be positive");
}

Sequence PlantOracle::run_trial(const Sequence& input) {
  if (std::abs(input.sample_rate_hz() - fs_) > 1e-12 * fs_)
    throw PlantError("run_trial: input sample rate does not match the plant");
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<double> y = execute(input.values());
  ++trials_;
  if (y.size() != input.size())
    throw PlantError(fmt::format("run_trial: plant returned {} samples for {} inputs", y.size(), input.size()));
  return Sequence(std::move(y), input.anchor(), fs_);
}

std::size_t PlantOracle::trial_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return trials_;
}

SimulatedPlant::SimulatedPlant(RationalTf tf) : PlantOracle(tf.sample_rate_hz()), tf_(std::move(tf)) {
  if (!tf_.is_proper()) throw std::invalid_argument("SimulatedPlant: plant must be proper");
}

std::vector<double> SimulatedPlant::execute(const std::vector<double>& input) {
  return simulate(tf_, Sequence(input, 0, tf_.sample_rate_hz())).values();
}

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PlantError(fmt::format("plant process: write failed: {}", std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

ProcessPlant::ProcessPlant(std::vector<std::string> argv, double sample_rate_hz)
    : PlantOracle(sample_rate_hz), argv_(std::move(argv)) {
  if (argv_.empty()) throw std::invalid_argument("ProcessPlant: empty command");
  spawn();
}

ProcessPlant::~ProcessPlant() { shutdown(); }

void ProcessPlant::spawn() {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw PlantError("plant process: pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw PlantError("plant process: pipe failed");
  }
  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw PlantError("plant process: fork failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::signal(SIGPIPE, SIG_IGN);
}

void ProcessPlant::shutdown() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::vector<double> ProcessPlant::execute(const std::vector<double>& input) {
  if (pid_ <= 0) throw PlantError("plant process: not running");
  std::string request = fmt::format("TRIAL {}\n", input.size());
  for (double v : input) request += fmt::format("{:.17g}\n", v);
  write_all(to_child_, request);

  std::vector<double> out;
  out.reserve(input.size());
  char buf[65536];
  while (out.size() < input.size()) {
    const auto nl = pending_.find('\n');
    if (nl != std::string::npos) {
      const std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(line.c_str(), &end);
      if (end == line.c_str() || errno == ERANGE || !std::isfinite(v))
        throw PlantError(fmt::format("plant process: malformed sample '{}'", line));
      out.push_back(v);
      continue;
    }
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw PlantError("plant process: exited before answering the trial");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

Sequence measure_impulse(PlantOracle& oracle, std::size_t length) {
  return oracle.run_trial(delta(length, 0, oracle.sample_rate_hz()));
}

int probe_relative_order(PlantOracle& oracle, std::size_t length, double threshold) {
  if (length < 2) throw std::invalid_argument("probe_relative_order: length must be at least 2");
  const Sequence y = measure_impulse(oracle, length);
  double peak = 0.0;
  for (double v : y.samples()) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) throw PlantError("probe_relative_order: plant produced an all-zero impulse response");
  for (std::size_t k = 0; k < y.size(); ++k)
    if (std::abs(y[k]) > threshold * peak) return static_cast<int>(k);
  return static_cast<int>(y.size());  // unreachable: the peak sample qualifies
}

}  // namespace ilcshape
