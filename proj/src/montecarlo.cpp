#include "merton/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "merton/analytics.hpp"
#include "merton/errors.hpp"

namespace merton {

PortfolioOutcome summarize_portfolio(const TerminalValues& terminal, const ContractSpec& contract) {
  const auto& values = terminal.values;
  if (values.empty()) throw DomainError("summarize_portfolio: empty portfolio");
  const auto firms = static_cast<double>(values.size());

  PortfolioOutcome out;
  out.x_m = terminal.market_return;
  double loss_sum = 0.0;
  for (double v : values) {
    if (v < contract.face_value) ++out.n_default;
    loss_sum += individual_loss(v, contract.face_value);
  }
  out.pd_hat = out.n_default / firms;
  out.loss_hat = loss_sum / firms;
  if (out.n_default > 0) {
    const double recovery = 1.0 - firms * out.loss_hat / out.n_default;
    out.recovery_hat = std::clamp(recovery, 0.0, 1.0);
  }
  return out;
}

PortfolioOutcome run_realization(const ContractSpec& contract, const ProcessParams& params,
                                 int firms, const RngStream& realization) {
  return summarize_portfolio(simulate(contract, params, firms, realization), contract);
}

void SimulationConfig::validate() const {
  contract.validate();
  process.validate();
  if (firms < 1) throw ConfigError("portfolio size must be >= 1");
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (chunk_size < 1) throw ConfigError("chunk size must be >= 1");
}

RngStream realization_stream(std::uint64_t seed, std::int64_t realization) {
  return RngStream(seed, static_cast<std::uint64_t>(realization), 0);
}

namespace {

std::vector<PortfolioOutcome> run_chunk(const SimulationConfig& config, std::int64_t first,
                                        std::int64_t count) {
  std::vector<PortfolioOutcome> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t m = first; m < first + count; ++m) {
    out.push_back(run_realization(config.contract, config.process, config.firms,
                                  realization_stream(config.seed, m)));
  }
  return out;
}

std::string describe(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

int run_simulation_streaming(const SimulationConfig& config, const OutcomeSink& sink,
                             const ProgressHook& progress) {
  config.validate();
  const std::int64_t total = config.realizations;
  const std::int64_t chunk = config.chunk_size;
  const std::int64_t chunks = (total + chunk - 1) / chunk;
  auto chunk_len = [&](std::int64_t c) { return std::min(chunk, total - c * chunk); };

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::int64_t>(threads, chunks));

  if (threads == 1) {
    std::int64_t done = 0;
    for (std::int64_t c = 0; c < chunks; ++c) {
      std::vector<PortfolioOutcome> block;
      try {
        block = run_chunk(config, c * chunk, chunk_len(c));
      } catch (const std::exception& e) {
        throw SimulationError(std::string("simulation failed: ") + e.what(), done);
      }
      sink(c * chunk, block);
      done += static_cast<std::int64_t>(block.size());
      if (progress) progress(done, total);
    }
    return 1;
  }

  std::mutex mutex;
  std::condition_variable cv;
  std::map<std::int64_t, std::vector<PortfolioOutcome>> ready;
  std::int64_t next_claim = 0;
  std::int64_t next_deliver = 0;
  bool stop = false;
  std::exception_ptr worker_error;
  const std::int64_t max_in_flight = 4 * static_cast<std::int64_t>(threads);

  auto worker = [&] {
    for (;;) {
      std::int64_t c;
      {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return stop || next_claim < next_deliver + max_in_flight; });
        if (stop || next_claim >= chunks) return;
        c = next_claim++;
      }
      try {
        auto block = run_chunk(config, c * chunk, chunk_len(c));
        std::lock_guard lock(mutex);
        ready.emplace(c, std::move(block));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!worker_error) worker_error = std::current_exception();
        stop = true;
      }
      cv.notify_all();
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);

  std::int64_t done = 0;
  std::exception_ptr sink_error;
  while (next_deliver < chunks) {
    std::vector<PortfolioOutcome> block;
    {
      std::unique_lock lock(mutex);
      cv.wait(lock, [&] { return stop || ready.contains(next_deliver); });
      auto it = ready.find(next_deliver);
      if (it == ready.end()) break;
      block = std::move(it->second);
      ready.erase(it);
    }
    try {
      sink(next_deliver * chunk, block);
    } catch (...) {
      sink_error = std::current_exception();
      std::lock_guard lock(mutex);
      stop = true;
    }
    if (sink_error) break;
    {
      std::lock_guard lock(mutex);
      ++next_deliver;
    }
    cv.notify_all();
    done += static_cast<std::int64_t>(block.size());
    if (progress) progress(done, total);
  }
  {
    std::lock_guard lock(mutex);
    stop = true;
  }
  cv.notify_all();
  pool.clear();

  if (sink_error) std::rethrow_exception(sink_error);
  if (worker_error) {
    throw SimulationError("simulation failed: " + describe(worker_error), done);
  }
  return threads;
}

SimulationResult run_simulation(const SimulationConfig& config, const ProgressHook& progress) {
  SimulationResult result;
  result.config = config;
  result.outcomes.reserve(static_cast<std::size_t>(std::max<std::int64_t>(config.realizations, 0)));
  const auto start = std::chrono::steady_clock::now();
  result.threads_used = run_simulation_streaming(
      config,
      [&](std::int64_t, std::span<const PortfolioOutcome> block) {
        result.outcomes.insert(result.outcomes.end(), block.begin(), block.end());
      },
      progress);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::optional<double> axis_value(const PortfolioOutcome& outcome, CurveAxis axis) {
  switch (axis) {
    case CurveAxis::PdHat: return outcome.pd_hat;
    case CurveAxis::MarketReturn: return outcome.x_m;
    case CurveAxis::RecoveryHat: return outcome.recovery_hat;
    case CurveAxis::LossHat: return outcome.loss_hat;
  }
  return std::nullopt;
}

BinnedCurve bin_curve(std::span<const PortfolioOutcome> outcomes, CurveAxis x_axis,
                      CurveAxis y_axis, std::span<const double> edges) {
  BinnedCurve curve;
  if (edges.size() < 2) return curve;
  if (!std::is_sorted(edges.begin(), edges.end())) throw DomainError("bin_curve: edges must ascend");
  const std::size_t bins = edges.size() - 1;
  std::vector<double> x_sum(bins, 0.0);
  std::vector<double> y_sum(bins, 0.0);
  std::vector<std::int64_t> counts(bins, 0);

  for (const auto& o : outcomes) {
    const auto x = axis_value(o, x_axis);
    const auto y = axis_value(o, y_axis);
    if (!x || !y) continue;
    if (*x < edges.front() || *x > edges.back()) continue;
    auto bin = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), *x) - edges.begin());
    bin = std::min(bin == 0 ? 0 : bin - 1, bins - 1);
    x_sum[bin] += *x;
    y_sum[bin] += *y;
    ++counts[bin];
  }
  for (std::size_t i = 0; i < bins; ++i) {
    if (counts[i] == 0) continue;
    const auto n = static_cast<double>(counts[i]);
    curve.lower.push_back(edges[i]);
    curve.upper.push_back(edges[i + 1]);
    curve.centers.push_back(0.5 * (edges[i] + edges[i + 1]));
    curve.x_means.push_back(x_sum[i] / n);
    curve.y_means.push_back(y_sum[i] / n);
    curve.counts.push_back(counts[i]);
  }
  return curve;
}

Histogram empirical_histogram(std::span<const double> samples, std::span<const double> edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
    throw DomainError("empirical_histogram: need at least two ascending edges");
  }
  const std::size_t bins = edges.size() - 1;
  Histogram h;
  h.total = static_cast<std::int64_t>(samples.size());
  h.lower.assign(edges.begin(), edges.end() - 1);
  h.upper.assign(edges.begin() + 1, edges.end());
  h.counts.assign(bins, 0);
  for (double s : samples) {
    if (!(s >= edges.front() && s <= edges.back())) continue;
    auto bin = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), s) - edges.begin());
    bin = std::min(bin == 0 ? 0 : bin - 1, bins - 1);
    ++h.counts[bin];
    ++h.in_range;
  }
  h.density.assign(bins, 0.0);
  if (h.in_range > 0) {
    for (std::size_t i = 0; i < bins; ++i) {
      const double width = h.upper[i] - h.lower[i];
      h.density[i] = static_cast<double>(h.counts[i]) / (static_cast<double>(h.in_range) * width);
    }
  }
  return h;
}

Histogram empirical_histogram(std::span<const double> samples, int bins) {
  if (bins < 1) throw DomainError("empirical_histogram: bins must be >= 1");
  if (samples.empty()) throw DomainError("empirical_histogram: no samples");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double s : samples) {
    if (s > 0.0) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  if (!(hi >= lo)) {
    // No positive samples: a single bin around the (common) non-positive value.
    lo = hi = *std::min_element(samples.begin(), samples.end());
  }
  if (lo == hi || bins == 1) {
    const double half = std::max(std::abs(lo) * 1e-9, 1e-300);
    const double edges[] = {lo - half, hi + half};
    return empirical_histogram(samples, edges);
  }
  std::vector<double> edges = log_grid(lo, hi, bins + 1);
  return empirical_histogram(samples, edges);
}

}  // namespace merton
