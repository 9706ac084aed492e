#include "xcap/bridge/hub.hpp"

#include <algorithm>

namespace xcap::bridge {

void ClientQueue::push(WireMessage m) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    const bool tele = is_telemetry(m.type);
    if (tele && telemetry_ >= limit_) {
      auto it = std::find_if(q_.begin(), q_.end(), [](const WireMessage& x) { return is_telemetry(x.type); });
      if (it != q_.end()) {
        q_.erase(it);
        --telemetry_;
        ++dropped_;
      }
    }
    telemetry_ += tele;
    q_.push_back(std::move(m));
  }
  cv_.notify_one();
}

std::optional<WireMessage> ClientQueue::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [this] { return !q_.empty() || closed_; });
  if (q_.empty()) return std::nullopt;
  WireMessage m = std::move(q_.front());
  q_.pop_front();
  telemetry_ -= is_telemetry(m.type);
  return m;
}

void ClientQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool ClientQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t ClientQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::size_t ClientQueue::size() const {
  std::lock_guard lock(mu_);
  return q_.size();
}

Connection Hub::connect() {
  std::lock_guard lock(mu_);
  Connection c;
  c.id = next_client_++;
  c.queue = std::make_shared<ClientQueue>(limit_);
  clients_[c.id] = c.queue;
  if (!operator_) operator_ = c.id;
  c.is_operator = operator_ == c.id;
  publish_locked(MessageType::Hello,
                 {{"schema_version", kSchemaVersion},
                  {"server", "xcap"},
                  {"client_id", c.id},
                  {"role", c.is_operator ? "operator" : "viewer"}},
                 c.id);
  if (!last_state_.is_null()) publish_locked(MessageType::StateUpdate, last_state_, c.id);
  return c;
}

ClientId Hub::connect_local_operator() {
  std::lock_guard lock(mu_);
  const ClientId id = next_client_++;
  operator_ = id;
  return id;
}

void Hub::disconnect(ClientId id) {
  std::lock_guard lock(mu_);
  if (auto it = clients_.find(id); it != clients_.end()) {
    it->second->close();
    clients_.erase(it);
  }
  last_inbound_.erase(id);
  if (operator_ == id) operator_.reset();
}

bool Hub::is_operator(ClientId id) const {
  std::lock_guard lock(mu_);
  return operator_ == id;
}

std::size_t Hub::connections() const {
  std::lock_guard lock(mu_);
  return clients_.size();
}

std::uint64_t Hub::publish_locked(MessageType type, nlohmann::json payload, std::optional<ClientId> to) {
  if (type == MessageType::StateUpdate && !to) last_state_ = payload;
  WireMessage m{type, next_seq_++, std::move(payload)};
  if (to) {
    if (auto it = clients_.find(*to); it != clients_.end()) it->second->push(std::move(m));
  } else {
    for (auto& [id, q] : clients_) q->push(m);
  }
  return next_seq_ - 1;
}

std::uint64_t Hub::publish(MessageType type, nlohmann::json payload, std::optional<ClientId> to) {
  std::lock_guard lock(mu_);
  return publish_locked(type, std::move(payload), to);
}

nlohmann::json Hub::last_state() const {
  std::lock_guard lock(mu_);
  return last_state_;
}

void Hub::submit(ClientId from, WireMessage m) {
  std::lock_guard lock(mu_);
  auto it = last_inbound_.find(from);
  if (it != last_inbound_.end() && m.seq <= it->second) {
    publish_locked(MessageType::Error,
                   {{"reply_to", m.seq}, {"message", "seq must increase (last " + std::to_string(it->second) + ")"}},
                   from);
    return;
  }
  last_inbound_[from] = m.seq;
  inbox_.push_back({from, std::move(m)});
}

std::vector<Inbound> Hub::drain() {
  std::lock_guard lock(mu_);
  std::vector<Inbound> out(std::make_move_iterator(inbox_.begin()), std::make_move_iterator(inbox_.end()));
  inbox_.clear();
  return out;
}

}  // namespace xcap::bridge
