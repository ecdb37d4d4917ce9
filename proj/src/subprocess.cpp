#include "autoform/subprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace autoform {

namespace {

constexpr int kSpawnFailureExit = 127;

} // namespace

std::vector<std::string> split_command(std::string_view command)
{
    std::vector<std::string> out;
    std::string current;
    char quote = '\0';
    bool has_token = false;

    for (char c : command) {
        if (quote != '\0') {
            if (c == quote) {
                quote = '\0';
            } else {
                current.push_back(c);
            }
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
            has_token = true;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (has_token) {
                out.push_back(std::move(current));
                current.clear();
                has_token = false;
            }
            continue;
        }
        current.push_back(c);
        has_token = true;
    }
    if (quote != '\0') {
        throw std::invalid_argument("unbalanced quote in command");
    }
    if (has_token) {
        out.push_back(std::move(current));
    }
    return out;
}

bool executable_exists(const std::string& name)
{
    namespace fs = std::filesystem;
    if (name.find('/') != std::string::npos) {
        return ::access(name.c_str(), X_OK) == 0;
    }
    const char* path_env = std::getenv("PATH");
    if (path_env == nullptr) {
        return false;
    }
    std::string_view path(path_env);
    while (!path.empty()) {
        const auto sep = path.find(':');
        const std::string_view dir =
            sep == std::string_view::npos ? path : path.substr(0, sep);
        path = sep == std::string_view::npos ? std::string_view{}
                                             : path.substr(sep + 1);
        if (dir.empty()) {
            continue;
        }
        const fs::path candidate = fs::path(dir) / name;
        if (::access(candidate.c_str(), X_OK) == 0) {
            return true;
        }
    }
    return false;
}

CommandResult run_command(const std::vector<std::string>& argv,
                          const std::string& workdir, std::int64_t timeout_ms)
{
    if (argv.empty()) {
        throw std::invalid_argument("run_command: empty argv");
    }

    int pipe_fds[2];
    if (::pipe(pipe_fds) != 0) {
        throw std::runtime_error(std::string("pipe failed: ") +
                                 std::strerror(errno));
    }

    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(pipe_fds[0]);
        ::close(pipe_fds[1]);
        throw std::runtime_error(std::string("fork failed: ") +
                                 std::strerror(errno));
    }

    if (pid == 0) {
        ::close(pipe_fds[0]);
        ::dup2(pipe_fds[1], STDOUT_FILENO);
        ::dup2(pipe_fds[1], STDERR_FILENO);
        ::close(pipe_fds[1]);
        if (!workdir.empty() && ::chdir(workdir.c_str()) != 0) {
            _exit(kSpawnFailureExit);
        }
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& a : argv) {
            cargv.push_back(const_cast<char*>(a.c_str()));
        }
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        _exit(kSpawnFailureExit);
    }

    ::close(pipe_fds[1]);
    const int flags = ::fcntl(pipe_fds[0], F_GETFL, 0);
    ::fcntl(pipe_fds[0], F_SETFL, flags | O_NONBLOCK);

    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(timeout_ms);
    bool open = true;
    char buf[4096];

    while (open) {
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            ::kill(pid, SIGKILL);
            break;
        }
        struct pollfd pfd = {pipe_fds[0], POLLIN, 0};
        const int rc = ::poll(
            &pfd, 1, int(std::min<std::int64_t>(remaining.count(), 1000)));
        if (rc < 0 && errno != EINTR) {
            break;
        }
        if (rc > 0) {
            for (;;) {
                const ssize_t n = ::read(pipe_fds[0], buf, sizeof(buf));
                if (n > 0) {
                    result.output.append(buf, std::size_t(n));
                    continue;
                }
                if (n == 0) {
                    open = false;
                }
                break;
            }
        }
    }

    // Drain whatever arrived before the writer went away.
    for (;;) {
        const ssize_t n = ::read(pipe_fds[0], buf, sizeof(buf));
        if (n <= 0) {
            break;
        }
        result.output.append(buf, std::size_t(n));
    }
    ::close(pipe_fds[0]);

    int status = 0;
    ::waitpid(pid, &status, 0);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    result.spawn_failed = !result.timed_out &&
                          result.exit_code == kSpawnFailureExit &&
                          !executable_exists(argv[0]);
    return result;
}

} // namespace autoform
