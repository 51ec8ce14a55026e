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
#include <map>
#include <string>
#include <utility>

#include "ive/crypto/container.hpp"
#include "ive/pir/query.hpp"
#include "ive/service/frame.hpp"

namespace ive::service {

/// An ERROR frame received from a peer.
class RemoteError : public ProtocolError {
 public:
  RemoteError(ErrorMsg m)
      : ProtocolError("server error " + std::to_string(static_cast<int>(m.code)) + ": " + m.message), msg_(std::move(m)) {}
  ErrorCode code() const { return msg_.code; }
  std::uint64_t request_id() const { return msg_.request_id; }

 private:
  ErrorMsg msg_;
};

/// Blocking client of the batching server. Queries may be pipelined: send
/// several, then collect responses, which arrive in completion order.
class ServiceClient {
 public:
  ServiceClient(const Endpoint& ep, ParamsPtr params) : params_(std::move(params)), chan_(connect_to(ep)) {
    chan_.send(hello_frame(params_->digest()));
    Frame f = expect();
    if (f.type != MsgType::Hello) throw ProtocolError("expected HELLO from server");
    Hello h = parse_hello(f.payload);
    if (h.params_digest != params_->digest()) throw FormatError("server runs different parameters");
  }

  /// Uploads the bundle; returns the digest the server acknowledged.
  Digest upload_keys(std::uint64_t client_id, const KeyBundle& kb) {
    Bytes raw = serialize_bundle(kb, *params_);
    chan_.send(key_upload_frame(client_id, raw));
    Frame f = expect();
    if (f.type != MsgType::KeyUpload) throw ProtocolError("expected a key acknowledgement");
    Tagged t = split_u64(f.payload);
    Digest d{};
    if (t.a != client_id || t.body.size() != d.size()) throw ProtocolError("malformed key acknowledgement");
    std::copy(t.body.begin(), t.body.end(), d.begin());
    if (d != sha256(raw)) throw ProtocolError("server acknowledged different key bytes");
    return d;
  }

  void send_query(std::uint64_t client_id, std::uint64_t request_id, const PirQuery& q) {
    send_raw_query(client_id, request_id, serialize_query(q, *params_));
  }
  void send_raw_query(std::uint64_t client_id, std::uint64_t request_id, std::span<const std::uint8_t> body) {
    chan_.send(query_frame(client_id, request_id, body));
  }

  /// Next response as (request id, response).
  std::pair<std::uint64_t, PirResponse> recv_response() {
    Frame f = expect();
    if (f.type != MsgType::Response) throw ProtocolError("expected RESPONSE");
    Tagged t = split_u64(f.payload);
    return {t.a, deserialize_response(t.body, *params_)};
  }

  PirResponse query(std::uint64_t client_id, std::uint64_t request_id, const PirQuery& q) {
    send_query(client_id, request_id, q);
    auto [id, r] = recv_response();
    if (id != request_id) throw ProtocolError("response for an unexpected request id");
    return r;
  }

  Channel& channel() { return chan_; }

 private:
  Frame expect() {
    auto f = chan_.recv();
    if (!f) throw NetError("server closed the connection");
    if (f->type == MsgType::Error) throw RemoteError(parse_error(f->payload));
    return std::move(*f);
  }

  ParamsPtr params_;
  Channel chan_;
};

}  // namespace ive::service
