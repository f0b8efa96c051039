#include "spotlight/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "spotlight/error.hpp"

namespace spotlight {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Waits until fd is ready for `events`; throws on timeout.
void wait_ready(int fd, short events, Timeout timeout) {
    if (timeout.count() <= 0) {
        return;
    }
    pollfd p{fd, events, 0};
    for (;;) {
        const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (rc > 0) {
            return;
        }
        if (rc == 0) {
            throw TransportError("timed out waiting for peer");
        }
        if (errno != EINTR) {
            throw TransportError(errno_text("poll"));
        }
    }
}

class FdTransport final : public Transport {
public:
    FdTransport(int rfd, int wfd, Timeout timeout, pid_t child = -1)
        : rfd_(rfd), wfd_(wfd), timeout_(timeout), child_(child) {}
    ~FdTransport() override { close(); }

    void write_all(std::span<const std::byte> bytes) override {
        if (wfd_ < 0) {
            throw TransportError("transport closed");
        }
        std::size_t off = 0;
        while (off < bytes.size()) {
            wait_ready(wfd_, POLLOUT, timeout_);
            const ssize_t n = send_or_write(bytes.data() + off, bytes.size() - off);
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw TransportError(errno_text("write"));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    void read_exact(std::span<std::byte> out) override {
        if (rfd_ < 0) {
            throw TransportError("transport closed");
        }
        std::size_t off = 0;
        while (off < out.size()) {
            wait_ready(rfd_, POLLIN, timeout_);
            const ssize_t n = ::read(rfd_, out.data() + off, out.size() - off);
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw TransportError(errno_text("read"));
            }
            if (n == 0) {
                throw TransportError("peer closed the connection");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    void close() override {
        if (rfd_ >= 0) {
            ::close(rfd_);
        }
        if (wfd_ >= 0 && wfd_ != rfd_) {
            ::close(wfd_);
        }
        rfd_ = wfd_ = -1;
        if (child_ > 0) {
            int status = 0;
            ::waitpid(child_, &status, 0);
            child_ = -1;
        }
    }

private:
    ssize_t send_or_write(const std::byte* p, std::size_t n) {
        // MSG_NOSIGNAL keeps a closed peer from raising SIGPIPE on sockets.
        const ssize_t rc = ::send(wfd_, p, n, MSG_NOSIGNAL);
        if (rc < 0 && errno == ENOTSOCK) {
            return ::write(wfd_, p, n);
        }
        return rc;
    }

    int rfd_;
    int wfd_;
    Timeout timeout_;
    pid_t child_;
};

// One direction of an in-process pipe.
struct ByteQueue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::byte> bytes;
    bool closed = false;
};

class MemoryTransport final : public Transport {
public:
    MemoryTransport(std::shared_ptr<ByteQueue> in, std::shared_ptr<ByteQueue> out, Timeout timeout)
        : in_(std::move(in)), out_(std::move(out)), timeout_(timeout) {}
    ~MemoryTransport() override { close(); }

    void write_all(std::span<const std::byte> bytes) override {
        std::lock_guard lock(out_->mu);
        if (out_->closed) {
            throw TransportError("peer closed the connection");
        }
        out_->bytes.insert(out_->bytes.end(), bytes.begin(), bytes.end());
        out_->cv.notify_all();
    }

    void read_exact(std::span<std::byte> out) override {
        std::unique_lock lock(in_->mu);
        const auto ready = [&] { return in_->bytes.size() >= out.size() || in_->closed; };
        if (timeout_.count() > 0) {
            if (!in_->cv.wait_for(lock, timeout_, ready)) {
                throw TransportError("timed out waiting for peer");
            }
        } else {
            in_->cv.wait(lock, ready);
        }
        if (in_->bytes.size() < out.size()) {
            throw TransportError("peer closed the connection");
        }
        std::copy_n(in_->bytes.begin(), out.size(), out.begin());
        in_->bytes.erase(in_->bytes.begin(), in_->bytes.begin() + static_cast<std::ptrdiff_t>(out.size()));
    }

    void close() override {
        for (auto* q : {in_.get(), out_.get()}) {
            std::lock_guard lock(q->mu);
            q->closed = true;
            q->cv.notify_all();
        }
    }

private:
    std::shared_ptr<ByteQueue> in_;
    std::shared_ptr<ByteQueue> out_;
    Timeout timeout_;
};

}  // namespace

std::unique_ptr<Transport> make_fd_transport(int read_fd, int write_fd, Timeout timeout) {
    return std::make_unique<FdTransport>(read_fd, write_fd, timeout);
}

std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port, Timeout timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);

    std::string last_error = "no addresses";
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_error = errno_text("socket");
            continue;
        }
        // Non-blocking connect so the timeout applies.
        const int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc < 0 && errno == EINPROGRESS) {
            pollfd p{fd, POLLOUT, 0};
            rc = ::poll(&p, 1, timeout.count() > 0 ? static_cast<int>(timeout.count()) : -1);
            if (rc == 0) {
                ::close(fd);
                throw TransportError("connect to " + host + ":" + service + " timed out");
            }
            int err = 0;
            socklen_t len = sizeof(err);
            ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
            rc = err == 0 ? 0 : -1;
            errno = err;
        }
        if (rc < 0) {
            last_error = errno_text("connect");
            ::close(fd);
            continue;
        }
        ::fcntl(fd, F_SETFL, flags);
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        return std::make_unique<FdTransport>(fd, fd, timeout);
    }
    throw TransportError("cannot connect to " + host + ":" + service + " (" + last_error + ")");
}

std::unique_ptr<Transport> spawn_stdio(const std::string& command, Timeout timeout) {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) {
        throw TransportError(errno_text("pipe"));
    }
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw TransportError(errno_text("pipe"));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) {
            ::close(fd);
        }
        throw TransportError(errno_text("fork"));
    }
    if (pid == 0) {
        // dup2 clears close-on-exec on the standard descriptors only.
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) {
            ::close(fd);
        }
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::signal(SIGPIPE, SIG_IGN);
    return std::make_unique<FdTransport>(from_child[0], to_child[1], timeout, pid);
}

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_memory_pipe(Timeout timeout) {
    auto a_to_b = std::make_shared<ByteQueue>();
    auto b_to_a = std::make_shared<ByteQueue>();
    return {std::make_unique<MemoryTransport>(b_to_a, a_to_b, timeout),
            std::make_unique<MemoryTransport>(a_to_b, b_to_a, timeout)};
}

TcpListener::TcpListener(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) {
        throw TransportError(errno_text("socket"));
    }
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 8) != 0) {
        const std::string msg = errno_text("bind/listen");
        ::close(fd_);
        throw TransportError(msg);
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

std::unique_ptr<Transport> TcpListener::accept(Timeout timeout) {
    wait_ready(fd_, POLLIN, timeout);
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
        throw TransportError(errno_text("accept"));
    }
    return std::make_unique<FdTransport>(fd, fd, Timeout{0});
}

std::unique_ptr<Transport> connect_address(const std::string& address, Timeout timeout) {
    if (address.rfind("exec:", 0) == 0) {
        return spawn_stdio(address.substr(5), timeout);
    }
    std::string rest = address;
    if (rest.rfind("tcp://", 0) == 0) {
        rest = rest.substr(6);
    }
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
        throw InvalidArgument("sidecar address must be host:port, tcp://host:port or exec:<command>");
    }
    const std::string host = rest.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
        throw InvalidArgument("invalid port in sidecar address '" + address + "'");
    }
    if (port <= 0 || port > 65535) {
        throw InvalidArgument("invalid port in sidecar address '" + address + "'");
    }
    return connect_tcp(host, static_cast<std::uint16_t>(port), timeout);
}

}  // namespace spotlight
