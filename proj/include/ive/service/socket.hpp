// Copyright 2026 The IVE-PIR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <utility>

#include "ive/common/error.hpp"

namespace ive::service {

/// Transport failure (peer closed, timeout, refused connection).
class NetError : public Error {
 public:
  using Error::Error;
};

/// host:port with the port split off the last colon.
struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  static Endpoint parse(const std::string& s) {
    auto c = s.rfind(':');
    if (c == std::string::npos) throw UsageError("address '" + s + "' is not host:port");
    Endpoint e;
    e.host = s.substr(0, c);
    if (e.host.empty()) e.host = "0.0.0.0";
    try {
      unsigned long p = std::stoul(s.substr(c + 1));
      if (p > 65535) throw std::out_of_range("port");
      e.port = static_cast<std::uint16_t>(p);
    } catch (const std::exception&) {
      throw UsageError("bad port in '" + s + "'");
    }
    return e;
  }
  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Owning TCP socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  /// Wakes any thread blocked on this socket without releasing the descriptor.
  void shutdown() const {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void send_all(std::span<const std::uint8_t> data) const {
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw NetError(std::string("send failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  /// Fills `out` completely. Returns false on a clean close before the first
  /// byte; throws on a close mid-read or when `timeout` (if positive) expires.
  bool recv_exact(std::span<std::uint8_t> out, std::chrono::milliseconds timeout = {}) const {
    std::size_t off = 0;
    while (off < out.size()) {
      if (timeout.count() > 0) {
        pollfd p{fd_, POLLIN, 0};
        int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (r < 0 && errno == EINTR) continue;
        if (r == 0) throw NetError("timed out after " + std::to_string(timeout.count()) + " ms");
      }
      ssize_t n = ::recv(fd_, out.data() + off, out.size() - off, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n == 0 && off == 0) return false;
      if (n <= 0) throw NetError("connection closed mid-message");
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

 private:
  int fd_ = -1;
};

inline sockaddr_in resolve(const Endpoint& e) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(e.host.c_str(), nullptr, &hints, &res); rc != 0)
    throw NetError("cannot resolve " + e.host + ": " + ::gai_strerror(rc));
  sockaddr_in a = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  a.sin_port = htons(e.port);
  return a;
}

/// Listening socket; port 0 picks an ephemeral port, reported through `bound`.
inline Socket listen_on(const Endpoint& e, std::uint16_t* bound = nullptr) {
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw NetError("socket() failed");
  int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in a = resolve(e);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&a), sizeof a) != 0)
    throw NetError("cannot bind " + e.str() + ": " + std::strerror(errno));
  if (::listen(s.fd(), 64) != 0) throw NetError("listen failed");
  if (bound) {
    socklen_t len = sizeof a;
    ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&a), &len);
    *bound = ntohs(a.sin_port);
  }
  return s;
}

inline Socket accept_on(const Socket& listener) {
  for (;;) {
    int fd = ::accept(listener.fd(), nullptr, nullptr);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return Socket(fd);
    }
    if (errno == EINTR) continue;
    return Socket();
  }
}

inline Socket connect_to(const Endpoint& e) {
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw NetError("socket() failed");
  sockaddr_in a = resolve(e);
  if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&a), sizeof a) != 0)
    throw NetError("cannot connect to " + e.str() + ": " + std::strerror(errno));
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

}  // namespace ive::service
