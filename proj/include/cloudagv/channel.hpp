#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cloudagv/kinematics.hpp"

namespace cloudagv {

namespace outage {

struct Perfect {};

/// A lost window [start_k, start_k + length).
struct Burst {
  std::size_t start_k = 0;
  std::size_t length = 0;
};

struct DeterministicBursts {
  std::vector<Burst> bursts;  // sorted, non-overlapping
};

struct Bernoulli {
  double p_loss = 0.0;
};

/// Two-state Markov channel. Transition probabilities are evaluated once per
/// slot before the loss draw.
struct GilbertElliott {
  double p_good_to_bad = 0.0;
  double p_bad_to_good = 1.0;
  double loss_good = 0.0;
  double loss_bad = 1.0;
};

}  // namespace outage

struct OutageModel {
  std::variant<outage::Perfect, outage::DeterministicBursts, outage::Bernoulli,
               outage::GilbertElliott>
      variant = outage::Perfect{};
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on probabilities outside [0,1] or on
  /// unsorted / overlapping bursts.
  void validate() const;
  [[nodiscard]] std::string name() const;
};

/// Stateful per-run realization of an OutageModel. Deterministic given the
/// model's seed; one instance per simulation run.
class OutageProcess {
 public:
  explicit OutageProcess(OutageModel model);

  /// Whether the uplink packet of slot k is lost. Stochastic variants draw
  /// once per call, so call it exactly once per slot, in increasing k.
  [[nodiscard]] bool is_outage(std::size_t k);

  [[nodiscard]] const OutageModel& model() const noexcept { return model_; }

 private:
  OutageModel model_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  bool bad_state_ = false;
  std::size_t burst_cursor_ = 0;
};

/// Cloud-side view of the uplink: last delivered plant state and the number
/// of consecutive losses since then.
struct UplinkBuffer {
  Pose last_received;
  std::size_t last_received_k = 0;
  std::size_t n_ul = 0;
};

/// Buffer primed with the initial state, which is always delivered.
[[nodiscard]] UplinkBuffer make_uplink_buffer(const Pose& initial_state) noexcept;

/// Delivery refreshes the state and clears n_ul; an outage freezes the state
/// and increments n_ul.
[[nodiscard]] UplinkBuffer uplink_step(const UplinkBuffer& buffer, const Pose& true_state,
                                       std::size_t k, bool outage) noexcept;

}  // namespace cloudagv
