#include "iga/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <system_error>

namespace iga {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fds, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;
    int read_end() const { return fds[0]; }
    int write_end() const { return fds[1]; }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input) {
    if (argv.empty()) throw std::system_error(EINVAL, std::generic_category(), "empty argv");
    Pipe in, out, err, status_pipe;

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw std::system_error(errno, std::generic_category(), "fork");
    if (pid == 0) {
        ::dup2(in.read_end(), STDIN_FILENO);
        ::dup2(out.write_end(), STDOUT_FILENO);
        ::dup2(err.write_end(), STDERR_FILENO);
        ::execvp(args[0], args.data());
        const int code = errno;
        (void)!::write(status_pipe.write_end(), &code, sizeof code);
        ::_exit(127);
    }
    in.close_read();
    out.close_write();
    err.close_write();

    // the status pipe closes on a successful exec; anything read is the exec errno
    status_pipe.close_write();
    int exec_errno = 0;
    ssize_t got = 0;
    do {
        got = ::read(status_pipe.read_end(), &exec_errno, sizeof exec_errno);
    } while (got < 0 && errno == EINTR);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        int ignored = 0;
        while (::waitpid(pid, &ignored, 0) < 0 && errno == EINTR) {
        }
        throw std::system_error(exec_errno, std::generic_category(), "exec " + argv[0]);
    }

    // a child that exits early must not kill us through SIGPIPE
    static const bool sigpipe_ignored = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;

    ProcessResult result;
    std::size_t written = 0;
    if (input.empty()) in.close_write();
    while (out.read_end() >= 0 || err.read_end() >= 0 || in.write_end() >= 0) {
        pollfd fds[3];
        int n = 0;
        auto add = [&](int fd, short events) {
            if (fd >= 0) fds[n++] = pollfd{fd, events, 0};
        };
        add(in.write_end(), POLLOUT);
        add(out.read_end(), POLLIN);
        add(err.read_end(), POLLIN);
        if (::poll(fds, n, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < n; ++i) {
            if (!fds[i].revents) continue;
            const int fd = fds[i].fd;
            if (fd == in.write_end()) {
                const auto w = ::write(fd, input.data() + written, input.size() - written);
                if (w > 0) written += static_cast<std::size_t>(w);
                if (w < 0 || written == input.size()) in.close_write();
                continue;
            }
            char buf[8192];
            const auto r = ::read(fd, buf, sizeof buf);
            if (r > 0) {
                (fd == out.read_end() ? result.out : result.err).append(buf, static_cast<std::size_t>(r));
            } else if (fd == out.read_end()) {
                out.close_read();
            } else {
                err.close_read();
            }
        }
    }

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

}  // namespace iga
