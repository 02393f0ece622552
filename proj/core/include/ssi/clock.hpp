#pragma once

#include <cstdint>

namespace ssi {

/// Logical tick clock. Scenario steps advance it explicitly; one tick is
/// treated as one second where durations matter (grant TTLs, cert expiry).
class SimClock {
  public:
    uint64_t now() const { return tick_; }
    void advance(uint64_t ticks = 1) { tick_ += ticks; }

  private:
    uint64_t tick_ = 0;
};

}  // namespace ssi
