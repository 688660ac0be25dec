// Recovers one group-sparse instance with AMP, BAMP and BOSSAMP and prints
// the resulting NMSE side by side.

#include <cstdio>

#include "bossamp/bench.hpp"
#include "bossamp/metrics.hpp"
#include "bossamp/model.hpp"
#include "bossamp/recover.hpp"

int main() {
  using namespace bossamp;

  const Index m = 590, n = 1000, k = 160, group_size = 8;
  const double snr_db = 25.0;
  const auto inst = make_instance(m, n, k, group_size, PriorKind::SparseBinary, snr_db, 42);

  const StoppingRule stop;
  const auto amp_result = amp(inst.y, inst.a, default_amp_lambda(k), stop);
  const auto bamp_result = bamp(inst.y, inst.a, inst.prior, stop);
  const auto boss_result = bossamp_group(inst.y, inst.a, inst.prior, inst.groups, stop);

  std::printf("group-sparse binary instance: M=%td N=%td K=%td |G|=%td SNR=%.0f dB\n",
              m, n, k, group_size, snr_db);
  std::printf("  %-14s nmse = %10.3e dB = %8.2f  iterations = %d\n", "amp",
              nmse(inst.x_true, amp_result.x_hat), 10.0 * std::log10(nmse(inst.x_true, amp_result.x_hat)),
              amp_result.iterations);
  std::printf("  %-14s nmse = %10.3e dB = %8.2f  iterations = %d\n", "bamp",
              nmse(inst.x_true, bamp_result.x_hat), 10.0 * std::log10(nmse(inst.x_true, bamp_result.x_hat)),
              bamp_result.iterations);
  std::printf("  %-14s nmse = %10.3e dB = %8.2f  iterations = %d\n", "bossamp-group",
              nmse(inst.x_true, boss_result.x_hat), 10.0 * std::log10(nmse(inst.x_true, boss_result.x_hat)),
              boss_result.iterations);
  return 0;
}
