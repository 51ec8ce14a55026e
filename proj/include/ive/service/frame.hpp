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

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>

#include "ive/common/bytes.hpp"
#include "ive/service/socket.hpp"

namespace ive::service {

enum class MsgType : std::uint8_t {
  Hello = 0x01,
  KeyUpload = 0x02,
  Query = 0x03,
  Response = 0x04,
  Partial = 0x05,
  Finalize = 0x06,
  Error = 0x7F,
};

inline constexpr std::uint16_t kProtocolVersion = 0x0001;
inline constexpr std::uint64_t kMaxFramePayload = std::uint64_t{1} << 32;

enum class ErrorCode : std::uint16_t {
  Protocol = 1,
  ParamsMismatch = 2,
  UnknownKey = 3,
  TooLarge = 4,
  Internal = 5,
  WorkerTimeout = 6,
};

struct Frame {
  MsgType type;
  Bytes payload;
};

inline bool known_type(std::uint8_t t) {
  return (t >= 0x01 && t <= 0x06) || t == 0x7F;
}

inline Bytes encode_frame(const Frame& f) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(f.type));
  w.u64(f.payload.size());
  w.raw(f.payload);
  return w.take();
}

/// Blocking read of one frame. std::nullopt on a clean close between frames.
inline std::optional<Frame> recv_frame(const Socket& s, std::uint64_t max_payload = kMaxFramePayload,
                                       std::chrono::milliseconds timeout = {}) {
  std::uint8_t head[9];
  if (!s.recv_exact(head, timeout)) return std::nullopt;
  ByteReader r(head);
  std::uint8_t type = r.u8();
  std::uint64_t len = r.u64();
  if (!known_type(type)) throw ProtocolError("unknown message type " + std::to_string(type));
  if (len > max_payload)
    throw ProtocolError("frame payload of " + std::to_string(len) + " bytes exceeds the limit of " +
                        std::to_string(max_payload));
  Frame f{static_cast<MsgType>(type), Bytes(len)};
  if (len && !s.recv_exact(f.payload, timeout)) throw NetError("connection closed mid-frame");
  return f;
}

/// Socket with serialized frame writes; reads stay with one owning thread.
class Channel {
 public:
  explicit Channel(Socket s) : sock_(std::move(s)) {}
  void send(const Frame& f) {
    Bytes b = encode_frame(f);
    std::lock_guard lk(mu_);
    sock_.send_all(b);
  }
  std::optional<Frame> recv(std::uint64_t max_payload = kMaxFramePayload, std::chrono::milliseconds timeout = {}) {
    return recv_frame(sock_, max_payload, timeout);
  }
  const Socket& socket() const { return sock_; }

 private:
  Socket sock_;
  std::mutex mu_;
};

// Payloads.

struct Hello {
  std::uint16_t version = kProtocolVersion;
  Digest params_digest{};
};

inline Frame hello_frame(const Digest& d) {
  ByteWriter w;
  w.u16(kProtocolVersion);
  w.raw(d);
  return {MsgType::Hello, w.take()};
}

inline Hello parse_hello(const Bytes& b) {
  ByteReader r(b);
  Hello h;
  h.version = r.u16();
  auto d = r.raw(32);
  std::copy(d.begin(), d.end(), h.params_digest.begin());
  if (!r.done()) throw ProtocolError("trailing bytes in HELLO");
  return h;
}

struct ErrorMsg {
  std::uint64_t request_id = 0;  // 0 when not tied to a request
  ErrorCode code = ErrorCode::Protocol;
  std::string message;
};

inline Frame error_frame(std::uint64_t request_id, ErrorCode code, const std::string& msg) {
  ByteWriter w;
  w.u64(request_id);
  w.u16(static_cast<std::uint16_t>(code));
  w.raw(std::string_view(msg));
  return {MsgType::Error, w.take()};
}

inline ErrorMsg parse_error(const Bytes& b) {
  ByteReader r(b);
  ErrorMsg e;
  e.request_id = r.u64();
  e.code = static_cast<ErrorCode>(r.u16());
  auto rest = r.raw(r.remaining());
  e.message.assign(rest.begin(), rest.end());
  return e;
}

/// KEY_UPLOAD: client id, then the serialized key bundle. The receiver acks
/// with a KEY_UPLOAD carrying the client id and the bundle digest.
inline Frame key_upload_frame(std::uint64_t client_id, std::span<const std::uint8_t> bundle) {
  ByteWriter w;
  w.u64(client_id);
  w.raw(bundle);
  return {MsgType::KeyUpload, w.take()};
}

inline Frame key_ack_frame(std::uint64_t client_id, const Digest& d) {
  ByteWriter w;
  w.u64(client_id);
  w.raw(d);
  return {MsgType::KeyUpload, w.take()};
}

/// QUERY: client id, request id, serialized query.
inline Frame query_frame(std::uint64_t client_id, std::uint64_t request_id, std::span<const std::uint8_t> q) {
  ByteWriter w;
  w.u64(client_id);
  w.u64(request_id);
  w.raw(q);
  return {MsgType::Query, w.take()};
}

/// RESPONSE: request id, serialized response.
inline Frame response_frame(std::uint64_t request_id, std::span<const std::uint8_t> r) {
  ByteWriter w;
  w.u64(request_id);
  w.raw(r);
  return {MsgType::Response, w.take()};
}

/// PARTIAL: request id, worker index, serialized ciphertext.
inline Frame partial_frame(std::uint64_t request_id, std::uint32_t worker, std::span<const std::uint8_t> ct) {
  ByteWriter w;
  w.u64(request_id);
  w.u32(worker);
  w.raw(ct);
  return {MsgType::Partial, w.take()};
}

/// FINALIZE: batch id and the number of QUERY frames sent for it. Tells a
/// worker to run the queued batch.
inline Frame finalize_frame(std::uint64_t batch_id, std::uint32_t count) {
  ByteWriter w;
  w.u64(batch_id);
  w.u32(count);
  return {MsgType::Finalize, w.take()};
}

/// Leading ids of a payload, with the remainder as a view.
struct Tagged {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::span<const std::uint8_t> body;
};

inline Tagged split_u64(const Bytes& p) {
  ByteReader r(p);
  Tagged t;
  t.a = r.u64();
  t.body = r.raw(r.remaining());
  return t;
}

inline Tagged split_u64_u64(const Bytes& p) {
  ByteReader r(p);
  Tagged t;
  t.a = r.u64();
  t.b = r.u64();
  t.body = r.raw(r.remaining());
  return t;
}

inline Tagged split_u64_u32(const Bytes& p) {
  ByteReader r(p);
  Tagged t;
  t.a = r.u64();
  t.b = r.u32();
  t.body = r.raw(r.remaining());
  return t;
}

}  // namespace ive::service
