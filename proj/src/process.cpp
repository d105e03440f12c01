#include "xlb/process.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "xlb/error.hpp"

extern char** environ;

namespace xlb {
namespace {

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::string_view input, const std::map<std::string, std::string>& env) {
    if (argv.empty()) throw Error(ErrorKind::invalid_config, "empty command");
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) || ::pipe2(out_pipe, O_CLOEXEC) || ::pipe2(err_pipe, O_CLOEXEC))
        throw Error(ErrorKind::unreadable_source, std::string("pipe: ") + std::strerror(errno));

    // Build everything the child needs before forking.
    std::vector<std::string> env_strings;
    for (char** e = environ; *e; ++e) {
        std::string_view kv(*e);
        auto eq = kv.find('=');
        if (eq != std::string_view::npos && env.count(std::string(kv.substr(0, eq)))) continue;
        env_strings.emplace_back(kv);
    }
    for (const auto& [k, v] : env) env_strings.push_back(k + "=" + v);
    std::vector<char*> envp, args;
    for (auto& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);
    std::vector<std::string> argv_copy = argv;
    for (auto& a : argv_copy) args.push_back(a.data());
    args.push_back(nullptr);
    std::string dir = cwd.string();

    pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorKind::unreadable_source, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in_pipe[0], 0);
        ::dup2(out_pipe[1], 1);
        ::dup2(err_pipe[1], 2);
        if (!dir.empty() && ::chdir(dir.c_str()) != 0) ::_exit(127);
        ::execvpe(args[0], args.data(), envp.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    int to_child = in_pipe[1], from_out = out_pipe[0], from_err = err_pipe[0];
    if (input.empty()) close_fd(to_child);
    else ::fcntl(to_child, F_SETFL, O_NONBLOCK);

    ProcessResult res;
    size_t written = 0;
    char buf[65536];
    // A child that exits early must not kill us through SIGPIPE.
    static const bool sigpipe_ignored = (::signal(SIGPIPE, SIG_IGN), true);
    (void)sigpipe_ignored;
    while (from_out >= 0 || from_err >= 0) {
        pollfd fds[3];
        int n = 0;
        int out_i = -1, err_i = -1, in_i = -1;
        if (from_out >= 0) fds[out_i = n++] = {from_out, POLLIN, 0};
        if (from_err >= 0) fds[err_i = n++] = {from_err, POLLIN, 0};
        if (to_child >= 0) fds[in_i = n++] = {to_child, POLLOUT, 0};
        if (::poll(fds, static_cast<nfds_t>(n), -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (in_i >= 0 && fds[in_i].revents) {
            if (fds[in_i].revents & POLLOUT) {
                ssize_t w = ::write(to_child, input.data() + written, input.size() - written);
                if (w > 0) written += static_cast<size_t>(w);
                if (w < 0 && errno != EAGAIN) close_fd(to_child);
            } else {
                close_fd(to_child);
            }
            if (written == input.size()) close_fd(to_child);
        }
        for (auto [idx, fd, sink] : {std::tuple{out_i, &from_out, &res.out}, std::tuple{err_i, &from_err, &res.err}}) {
            if (idx < 0 || !fds[idx].revents) continue;
            ssize_t r = ::read(*fd, buf, sizeof buf);
            if (r > 0) sink->append(buf, static_cast<size_t>(r));
            else if (r == 0 || errno != EINTR) close_fd(*fd);
        }
    }
    close_fd(to_child);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return res;
}

}  // namespace xlb
