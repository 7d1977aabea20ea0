#include "cloudagv/channel.hpp"

#include <stdexcept>

namespace cloudagv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string("outage model: ") + what + " must lie in [0, 1]");
  }
}

}  // namespace

void OutageModel::validate() const {
  std::visit(Overloaded{
                 [](const outage::Perfect&) {},
                 [](const outage::DeterministicBursts& m) {
                   std::size_t end = 0;
                   for (std::size_t i = 0; i < m.bursts.size(); ++i) {
                     const auto& b = m.bursts[i];
                     if (b.length == 0) {
                       throw std::invalid_argument("outage model: burst length must be >= 1");
                     }
                     if (i > 0 && b.start_k < end) {
                       throw std::invalid_argument(
                           "outage model: bursts must be sorted and non-overlapping");
                     }
                     end = b.start_k + b.length;
                   }
                 },
                 [](const outage::Bernoulli& m) { require_probability(m.p_loss, "p_loss"); },
                 [](const outage::GilbertElliott& m) {
                   require_probability(m.p_good_to_bad, "p_good_to_bad");
                   require_probability(m.p_bad_to_good, "p_bad_to_good");
                   require_probability(m.loss_good, "loss_good");
                   require_probability(m.loss_bad, "loss_bad");
                 },
             },
             variant);
}

std::string OutageModel::name() const {
  return std::visit(Overloaded{
                        [](const outage::Perfect&) { return std::string("perfect"); },
                        [](const outage::DeterministicBursts&) { return std::string("bursts"); },
                        [](const outage::Bernoulli&) { return std::string("bernoulli"); },
                        [](const outage::GilbertElliott&) {
                          return std::string("gilbert-elliott");
                        },
                    },
                    variant);
}

OutageProcess::OutageProcess(OutageModel model) : model_(std::move(model)), rng_(model_.seed) {
  model_.validate();
}

bool OutageProcess::is_outage(std::size_t k) {
  return std::visit(
      Overloaded{
          [](const outage::Perfect&) { return false; },
          [&](const outage::DeterministicBursts& m) {
            // Monotone cursor for the common in-order case, full scan otherwise.
            while (burst_cursor_ < m.bursts.size() &&
                   m.bursts[burst_cursor_].start_k + m.bursts[burst_cursor_].length <= k) {
              ++burst_cursor_;
            }
            if (burst_cursor_ < m.bursts.size() && m.bursts[burst_cursor_].start_k <= k) {
              return true;
            }
            for (const auto& b : m.bursts) {
              if (k >= b.start_k && k < b.start_k + b.length) return true;
            }
            return false;
          },
          [&](const outage::Bernoulli& m) { return uniform_(rng_) < m.p_loss; },
          [&](const outage::GilbertElliott& m) {
            const double flip = uniform_(rng_);
            if (bad_state_) {
              if (flip < m.p_bad_to_good) bad_state_ = false;
            } else {
              if (flip < m.p_good_to_bad) bad_state_ = true;
            }
            return uniform_(rng_) < (bad_state_ ? m.loss_bad : m.loss_good);
          },
      },
      model_.variant);
}

UplinkBuffer make_uplink_buffer(const Pose& initial_state) noexcept {
  return {initial_state, 0, 0};
}

UplinkBuffer uplink_step(const UplinkBuffer& buffer, const Pose& true_state, std::size_t k,
                         bool outage) noexcept {
  if (!outage) return {true_state, k, 0};
  UplinkBuffer next = buffer;
  next.n_ul = k - buffer.last_received_k;
  return next;
}

}  // namespace cloudagv
