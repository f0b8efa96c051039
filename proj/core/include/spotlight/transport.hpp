#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

namespace spotlight {

/// A reliable, ordered byte stream. Failures raise TransportError.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void write_all(std::span<const std::byte> bytes) = 0;
    virtual void read_exact(std::span<std::byte> out) = 0;
    virtual void close() = 0;
};

using Timeout = std::chrono::milliseconds;

// Wraps a pair of POSIX descriptors (the same one twice for sockets). The
// transport owns and closes them. A zero timeout blocks indefinitely.
std::unique_ptr<Transport> make_fd_transport(int read_fd, int write_fd, Timeout timeout = Timeout{0});

// TCP client connection to host:port.
std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port,
                                       Timeout timeout = Timeout{30000});

// Spawns `command` through /bin/sh and talks to its stdin/stdout.
std::unique_ptr<Transport> spawn_stdio(const std::string& command, Timeout timeout = Timeout{0});

// Two connected in-process endpoints.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_memory_pipe(
    Timeout timeout = Timeout{0});

/// Listening TCP socket bound to the loopback interface.
class TcpListener {
public:
    // Port 0 picks an ephemeral port.
    explicit TcpListener(std::uint16_t port = 0);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    std::unique_ptr<Transport> accept(Timeout timeout = Timeout{0});

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

// Parses "host:port" or "tcp://host:port" or "exec:<command>" and connects.
std::unique_ptr<Transport> connect_address(const std::string& address, Timeout timeout);

}  // namespace spotlight
