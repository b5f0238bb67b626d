#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csdsim/error.hpp"

namespace csdsim {

// ---------------------------------------------------------------------------
// Clock and events
// ---------------------------------------------------------------------------

/// Simulated time in days, continuous.
struct SimClock {
  double now = 0.0;
  double horizon = 60.0;
};

enum class EventKind : std::uint8_t {
  TaskArrival,
  AgentArrival,
  RegistrationAttempt,
  SubmissionAttempt,
  Deadline,
  Review,
  DailySample,
};

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::TaskArrival: return "task-arrival";
    case EventKind::AgentArrival: return "agent-arrival";
    case EventKind::RegistrationAttempt: return "registration-attempt";
    case EventKind::SubmissionAttempt: return "submission-attempt";
    case EventKind::Deadline: return "deadline";
    case EventKind::Review: return "review";
    case EventKind::DailySample: return "daily-sample";
  }
  return "?";
}

struct EventRecord {
  double timestamp = 0.0;
  EventKind kind = EventKind::TaskArrival;
  std::uint64_t subject = 0;
  std::uint64_t seq = 0;  // assigned by the queue
};

/// Future-event list. Equal timestamps pop in insertion order; events past the
/// horizon are never delivered.
class EventQueue {
 public:
  explicit EventQueue(double horizon = 60.0) { clock_.horizon = horizon; }

  const SimClock& clock() const noexcept { return clock_; }
  double now() const noexcept { return clock_.now; }
  double horizon() const noexcept { return clock_.horizon; }
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

  /// Returns false (and drops the event) when it lies beyond the horizon.
  bool schedule(double timestamp, EventKind kind, std::uint64_t subject) {
    if (!(timestamp >= clock_.now)) {
      throw ModelInvariantError("event '" + std::string(to_string(kind)) + "' scheduled at " +
                                std::to_string(timestamp) + " before clock " +
                                std::to_string(clock_.now));
    }
    if (timestamp > clock_.horizon) return false;
    heap_.push(EventRecord{timestamp, kind, subject, next_seq_++});
    return true;
  }

  bool schedule(const EventRecord& ev) { return schedule(ev.timestamp, ev.kind, ev.subject); }

  /// Pops the earliest event and advances the clock to it.
  EventRecord pop() {
    if (heap_.empty()) throw std::out_of_range("pop on empty event queue");
    EventRecord ev = heap_.top();
    heap_.pop();
    clock_.now = ev.timestamp;
    return ev;
  }

  const EventRecord& peek() const { return heap_.top(); }

 private:
  struct Later {
    bool operator()(const EventRecord& a, const EventRecord& b) const noexcept {
      if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
      return a.seq > b.seq;
    }
  };

  SimClock clock_;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<EventRecord, std::vector<EventRecord>, Later> heap_;
};

/// Running FNV-1a digest of processed events, used to compare replays.
class TraceHash {
 public:
  void add(const EventRecord& ev) noexcept {
    mix(std::bit_cast<std::uint64_t>(ev.timestamp));
    mix(static_cast<std::uint64_t>(ev.kind));
    mix(ev.subject);
    ++count_;
  }
  void mix(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffU;
      h_ *= 1099511628211ULL;
    }
  }
  std::uint64_t value() const noexcept { return h_; }
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
  std::uint64_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

enum class Stream : std::uint8_t {
  TaskArrival,
  AgentArrival,
  Similarity,
  Duration,
  Experience,
  Registration,
  Submission,
  Quality,
  Reliability,
  Attraction,
  Skills,
  Award,
  Selection,
  kCount
};

inline constexpr std::size_t kStreamCount = static_cast<std::size_t>(Stream::kCount);

inline std::string_view to_string(Stream s) {
  constexpr std::array<std::string_view, kStreamCount> names = {
      "task-arrival", "agent-arrival", "similarity", "duration",  "experience",
      "registration", "submission",    "quality",    "reliability", "attraction",
      "skills",       "award",         "selection"};
  return names[static_cast<std::size_t>(s)];
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// One independent generator. Continuous draws come straight from the raw
/// 64-bit output; only Poisson counts go through <random>.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(uniform() * span) % span);
  }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::uint64_t poisson(double mean) {
    if (mean <= 0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }

  template <class Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(c[i - 1], c[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// One stream per stochastic process, each seeded from (master seed, stream
/// name), so draws on one stream never shift draws on another.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t master_seed) : master_(master_seed) {
    for (std::size_t i = 0; i < kStreamCount; ++i)
      streams_[i] = RandomStream(seed_for(master_seed, static_cast<Stream>(i)));
  }

  RandomStream& operator[](Stream s) { return streams_[static_cast<std::size_t>(s)]; }
  std::uint64_t master_seed() const noexcept { return master_; }

  static std::uint64_t seed_for(std::uint64_t master, Stream s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : to_string(s)) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return splitmix64(splitmix64(master) ^ h);
  }

 private:
  std::uint64_t master_;
  std::array<RandomStream, kStreamCount> streams_;
};

/// Renewal process with exponential gaps: a decision "at a rate of r per day".
class RateProcess {
 public:
  RateProcess(double rate, Stream stream) : rate_(rate), stream_(stream) {
    if (!(rate > 0) || !std::isfinite(rate))
      throw std::invalid_argument("rate process needs a positive finite rate");
  }
  double rate() const noexcept { return rate_; }
  Stream stream() const noexcept { return stream_; }
  double next_gap(RngStreams& rng) const { return rng[stream_].exponential(rate_); }

 private:
  double rate_;
  Stream stream_;
};

inline RateProcess spawn_rate_process(double rate, Stream stream) { return RateProcess(rate, stream); }

}  // namespace csdsim
