#include "xcap/capture/trigger.hpp"

#include <cmath>

#include "xcap/error.hpp"

namespace xcap::capture {

void validate(const TriggerConfig& cfg) {
  if (cfg.targets_n.empty()) throw ArgumentError("trigger: no targets");
  for (std::size_t i = 1; i < cfg.targets_n.size(); ++i)
    if (!(cfg.targets_n[i] > cfg.targets_n[i - 1]))
      throw ArgumentError("trigger: targets must be strictly increasing");
  if (!(cfg.window_n > 0.0)) throw ArgumentError("trigger: window must be positive");
  if (cfg.debounce_samples < 1) throw ArgumentError("trigger: debounce must be >= 1");
}

TriggerEngine::TriggerEngine(TriggerConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

void TriggerEngine::reset() {
  next_ = 0;
  run_ = 0;
}

std::optional<TriggerFire> TriggerEngine::push(std::int64_t timestamp_ns, double force_n) {
  // Skip targets the press has already risen past.
  while (next_ < cfg_.targets_n.size() && force_n > cfg_.targets_n[next_] + cfg_.window_n) {
    ++next_;
    run_ = 0;
  }
  if (exhausted()) return std::nullopt;
  const double target = cfg_.targets_n[next_];
  if (std::abs(force_n - target) > cfg_.window_n) {
    run_ = 0;
    return std::nullopt;
  }
  if (++run_ < cfg_.debounce_samples) return std::nullopt;
  ++next_;
  run_ = 0;
  return TriggerFire{timestamp_ns, target, force_n};
}

std::vector<TriggerFire> trigger_snapshots(std::span<const ForcePoint> stream,
                                           const TriggerConfig& cfg) {
  TriggerEngine engine(cfg);
  std::vector<TriggerFire> out;
  for (const auto& p : stream)
    if (auto fire = engine.push(p.timestamp_ns, p.force_n)) out.push_back(*fire);
  return out;
}

}  // namespace xcap::capture
