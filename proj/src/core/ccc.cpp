// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The depcage authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing,
// software distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions
// and limitations under the License.

#include "ccc.hpp"

#include <atomic>
#include <map>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "errors.hpp"
#include "version.hpp"

namespace depcage::ccc {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

std::string envelope(std::string_view type, std::uint64_t seq, std::int64_t tick, const Json& payload) {
  Json e = {{"type", type}, {"seq", seq}, {"tick", tick}, {"payload", payload}};
  return e.dump();
}

Json telemetry_payload(const pipeline::TickFrame& f, std::span<const double> score_history) {
  Json lists = Json::array();
  for (const auto& l : f.ai_lists) lists.push_back(encode(l));
  Json incidents = Json::array();
  if (f.open_incident) incidents.push_back({{"start_tick", *f.open_incident}});
  Json fused = f.actions.switch_position == reactor::SwitchPosition::ai ? encode(f.output) : Json(nullptr);
  return {
      {"tick", f.fm.tick},
      {"ego", encode(f.truth.ego)},
      {"safe_zone", encode(f.fm.zone_used)},
      {"lists", std::move(lists)},
      {"fused", std::move(fused)},
      {"fallback", encode(f.fallback_list)},
      {"output", encode(f.output)},
      {"fm", encode(f.fm)},
      {"am", f.am ? encode(*f.am) : Json(nullptr)},
      {"mode", encode(f.mode)},
      {"actions", encode(f.actions)},
      {"active_incidents", std::move(incidents)},
      {"score_history", std::vector<double>(score_history.begin(), score_history.end())},
  };
}

// --- CommandGate ------------------------------------------------------------

reactor::CommandResult CommandGate::submit(const Json& payload) {
  reactor::CommandResult r;
  if (payload.is_object()) {
    auto it = payload.find("command_id");
    if (it != payload.end() && it->is_string()) r.command_id = it->get<std::string>();
  }
  reactor::OperatorCommand cmd;
  try {
    cmd = decode_command(payload, "payload");
  } catch (const Error& e) {
    r.reason = std::string("malformed: ") + e.what();
    return r;
  }
  const auto kind = reactor::command_kind_from(cmd.kind);
  if (!kind) {
    r.reason = "malformed: payload/kind: unknown command kind '" + cmd.kind + "'";
    return r;
  }

  std::lock_guard lock(mutex_);
  if (!seen_ids_.insert(cmd.command_id).second) {
    r.reason = "duplicate command_id";
    return r;
  }
  if (*kind == reactor::CommandKind::resume) {
    const bool handover_state = mode_.state == reactor::State::MinimalRisk ||
                                mode_.state == reactor::State::RemoteOperated;
    if (handover_state && !mode_.handover_acked && !ack_pending_) {
      r.reason = "resume requires ack_handover";
      return r;
    }
  }
  if (*kind == reactor::CommandKind::ack_handover) ack_pending_ = true;
  pending_.push_back(std::move(cmd));
  r.accepted = true;
  r.reason = "queued";
  return r;
}

void CommandGate::observe(const reactor::SystemMode& mode) {
  std::lock_guard lock(mutex_);
  mode_ = mode;
  ack_pending_ = std::any_of(pending_.begin(), pending_.end(), [](const auto& c) {
    return c.kind == reactor::to_string(reactor::CommandKind::ack_handover);
  });
}

std::vector<reactor::OperatorCommand> CommandGate::drain() {
  std::lock_guard lock(mutex_);
  return std::exchange(pending_, {});
}

// --- Service ----------------------------------------------------------------

namespace {

using Message = std::shared_ptr<const std::string>;

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else if (s[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::map<std::string, std::string> query_params(std::string_view target) {
  std::map<std::string, std::string> out;
  const auto q = target.find('?');
  if (q == std::string_view::npos) return out;
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    try {
      if (eq == std::string_view::npos) {
        out[percent_decode(pair)] = "";
      } else {
        out[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
      }
    } catch (const std::exception&) {
      // bad escape: ignore the pair
    }
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return out;
}

std::string_view path_of(std::string_view target) { return target.substr(0, target.find('?')); }

}  // namespace

class WsSession;

struct Service::Impl {
  ServiceConfig config;
  net::io_context ioc{1};
  net::executor_work_guard<net::io_context::executor_type> work{ioc.get_executor()};
  tcp::acceptor acceptor{ioc};
  std::thread thread;

  CommandGate gate;
  std::atomic<std::uint64_t> seq{0};

  mutable std::mutex mutex;  // guards everything below
  std::vector<std::weak_ptr<WsSession>> sessions;
  std::map<std::string, std::weak_ptr<WsSession>> origins;
  std::string run_id;
  std::int64_t last_tick{-1};

  std::deque<double> scores;  // tick thread only

  explicit Impl(ServiceConfig c) : config(std::move(c)) {}

  void accept();
  void on_command(const std::shared_ptr<WsSession>& from, std::string_view text);
  Json health() const {
    std::lock_guard lock(mutex);
    return {{"status", "ok"}, {"version", kVersion}, {"run_id", run_id.empty() ? Json(nullptr) : Json(run_id)}};
  }
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Service::Impl& service)
      : ws_(std::move(socket)), service_(service), outbound_(service.config.client_queue) {}

  void start(http::request<http::string_body> req) {
    ws_.text(true);
    ws_.read_message_max(64 * 1024);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->close();
      {
        std::lock_guard lock(self->service_.mutex);
        self->service_.sessions.push_back(self);
      }
      Json hello = {{"version", kVersion}, {"protocol", 1}};
      {
        std::lock_guard lock(self->service_.mutex);
        hello["run_id"] = self->service_.run_id.empty() ? Json(nullptr) : Json(self->service_.run_id);
        hello["last_tick"] = self->service_.last_tick;
      }
      self->send_control(std::make_shared<const std::string>(
          envelope("hello", self->service_.seq++, -1, hello)));
      self->read();
    });
  }

  void send_telemetry(Message m) { enqueue(std::move(m), false); }
  void send_control(Message m) { enqueue(std::move(m), true); }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

  void shutdown() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      self->ws_.next_layer().close(ec);
      self->close();
    });
  }

 private:
  void enqueue(Message m, bool control) {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    if (control) {
      outbound_.push_control(std::move(m));
    } else {
      outbound_.push_droppable(std::move(m));
    }
    if (!writing_) {
      writing_ = true;
      net::post(ws_.get_executor(), [self = shared_from_this()] { self->write_next(); });
    }
  }

  void write_next() {
    Message m;
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      if (auto next = outbound_.pop()) {
        m = std::move(*next);
      } else {
        writing_ = false;
        return;
      }
    }
    ws_.async_write(net::buffer(*m), [self = shared_from_this(), m](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->write_next();
    });
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->service_.on_command(self, text);
      self->read();
    });
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    outbound_.clear();
  }

  websocket::stream<tcp::socket> ws_;
  Service::Impl& service_;
  beast::flat_buffer buffer_;

  mutable std::mutex mutex_;
  OutboundQueue<Message> outbound_;  // hello and acks are never dropped
  bool writing_{false};
  bool closed_{false};
};

namespace {

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Service::Impl& service) : socket_(std::move(socket)), service_(service) {}

  void start() {
    parser_.body_limit(8 * 1024);
    http::async_read(socket_, buffer_, parser_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (!ec) self->route();
    });
  }

 private:
  void route() {
    auto req = parser_.release();
    const std::string target(req.target());
    const auto path = path_of(target);
    if (websocket::is_upgrade(req)) {
      if (path != "/ws") return respond(http::status::not_found, {{"error", "not found"}}, req);
      std::string token;
      const auto params = query_params(target);
      if (auto it = params.find("token"); it != params.end()) token = it->second;
      if (auto auth = req.find(http::field::authorization); auth != req.end()) {
        const std::string value(auth->value());
        if (value.rfind("Bearer ", 0) == 0) token = value.substr(7);
      }
      if (token != service_.config.token) {
        return respond(http::status::unauthorized, {{"error", "invalid token"}}, req);
      }
      std::make_shared<WsSession>(std::move(socket_), service_)->start(std::move(req));
      return;
    }
    if (req.method() == http::verb::get && path == "/health") {
      return respond(http::status::ok, service_.health(), req);
    }
    respond(http::status::not_found, {{"error", "not found"}}, req);
  }

  void respond(http::status status, const Json& body, const http::request<http::string_body>& req) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req.version());
    res->set(http::field::server, std::string("depcage/") + std::string(kVersion));
    res->set(http::field::content_type, "application/json");
    res->keep_alive(false);
    res->body() = body.dump();
    res->prepare_payload();
    http::async_write(socket_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ec;
      self->socket_.shutdown(tcp::socket::shutdown_send, ec);
    });
  }

  tcp::socket socket_;
  Service::Impl& service_;
  beast::flat_buffer buffer_;
  http::request_parser<http::string_body> parser_;
};

}  // namespace

void Service::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec == net::error::operation_aborted) return;
    } else {
      std::make_shared<HttpSession>(std::move(socket), *this)->start();
    }
    accept();
  });
}

void Service::Impl::on_command(const std::shared_ptr<WsSession>& from, std::string_view text) {
  reactor::CommandResult r;
  std::int64_t tick = -1;
  bool queued = false;
  try {
    const Json e = parse_record_line(text, 1);
    if (!e.is_object()) throw ValidationError("", "expected an envelope object");
    const auto type = e.find("type");
    if (type == e.end() || !type->is_string()) throw ValidationError("type", "expected a string");
    if (*type != "command") throw ValidationError("type", "unsupported message type '" + type->get<std::string>() + "'");
    const auto payload = e.find("payload");
    if (payload == e.end()) throw ValidationError("payload", "missing");
    if (auto t = e.find("tick"); t != e.end() && t->is_number_integer()) tick = t->get<std::int64_t>();
    // register the origin before the tick thread can apply the command
    std::optional<std::string> registered;
    if (payload->is_object()) {
      if (auto id = payload->find("command_id"); id != payload->end() && id->is_string()) {
        std::lock_guard lock(mutex);
        if (origins.try_emplace(id->get<std::string>(), from).second) registered = id->get<std::string>();
      }
    }
    r = gate.submit(*payload);
    queued = r.accepted;
    if (!queued && registered) {
      std::lock_guard lock(mutex);
      origins.erase(*registered);
    }
  } catch (const Error& err) {
    r.accepted = false;
    r.reason = std::string("malformed: ") + err.what();
  }
  if (!queued) {
    from->send_control(std::make_shared<const std::string>(envelope("ack", seq++, tick, encode(r))));
  }
}

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  auto& i = *impl_;
  beast::error_code ec;
  const auto address = net::ip::make_address(i.config.host, ec);
  if (ec) throw ValidationError("host", "invalid address '" + i.config.host + "'");
  const tcp::endpoint endpoint(address, i.config.port);
  i.acceptor.open(endpoint.protocol(), ec);
  if (!ec) i.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) i.acceptor.bind(endpoint, ec);
  if (!ec) i.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw IoError("cannot listen on " + i.config.host + ":" + std::to_string(i.config.port) + ": " + ec.message());
  }
  i.accept();
  i.thread = std::thread([&i] { i.ioc.run(); });
}

Service::~Service() {
  auto& i = *impl_;
  net::post(i.ioc, [&i] {
    beast::error_code ec;
    i.acceptor.close(ec);
  });
  {
    std::lock_guard lock(i.mutex);
    for (auto& w : i.sessions) {
      if (auto s = w.lock()) s->shutdown();
    }
  }
  i.work.reset();
  // give sessions a chance to close cleanly, then stop
  net::post(i.ioc, [&i] { i.ioc.stop(); });
  if (i.thread.joinable()) i.thread.join();
}

std::uint16_t Service::port() const { return impl_->acceptor.local_endpoint().port(); }

void Service::set_run_id(const std::string& run_id) {
  std::lock_guard lock(impl_->mutex);
  impl_->run_id = run_id;
}

CommandGate& Service::gate() { return impl_->gate; }

std::size_t Service::client_count() const {
  std::lock_guard lock(impl_->mutex);
  std::size_t n = 0;
  for (const auto& w : impl_->sessions) {
    if (auto s = w.lock(); s && !s->closed()) ++n;
  }
  return n;
}

std::vector<reactor::OperatorCommand> Service::drain_commands() { return impl_->gate.drain(); }

void Service::publish(const pipeline::TickFrame& frame) {
  auto& i = *impl_;
  i.gate.observe(frame.mode);
  if (frame.am) {
    i.scores.push_back(frame.am->score);
    if (i.scores.size() > kScoreHistory) i.scores.pop_front();
  }
  const std::vector<double> history(i.scores.begin(), i.scores.end());
  const std::int64_t tick = frame.fm.tick;

  std::vector<std::shared_ptr<WsSession>> live;
  std::vector<std::pair<std::shared_ptr<WsSession>, reactor::CommandResult>> acks;
  {
    std::lock_guard lock(i.mutex);
    if (tick <= i.last_tick) {
      throw StateError("telemetry tick " + std::to_string(tick) + " is not after " + std::to_string(i.last_tick));
    }
    i.last_tick = tick;
    std::erase_if(i.sessions, [&](const std::weak_ptr<WsSession>& w) {
      auto s = w.lock();
      if (!s || s->closed()) return true;
      live.push_back(std::move(s));
      return false;
    });
    for (const auto& r : frame.actions.command_results) {
      auto it = i.origins.find(r.command_id);
      if (it == i.origins.end()) continue;
      if (auto s = it->second.lock()) acks.emplace_back(std::move(s), r);
      i.origins.erase(it);
    }
  }
  if (live.empty()) return;

  auto text = std::make_shared<const std::string>(envelope("telemetry", i.seq++, tick, telemetry_payload(frame, history)));
  if (text->size() <= i.config.max_message_bytes) {
    for (auto& s : live) s->send_telemetry(text);
  }
  for (auto& [s, r] : acks) {
    s->send_control(std::make_shared<const std::string>(envelope("ack", i.seq++, tick, encode(r))));
  }
}

pipeline::RunHooks Service::hooks() {
  pipeline::RunHooks h;
  h.drain_commands = [this](std::int64_t) { return drain_commands(); };
  h.telemetry = [this](const pipeline::TickFrame& f) { publish(f); };
  return h;
}

}  // namespace depcage::ccc
