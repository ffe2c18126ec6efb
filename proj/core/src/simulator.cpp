#include "eclat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "eclat/rng.hpp"

namespace eclat {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Stream tags for derive_seed; each concern owns its own stream so that
// policies sharing a seed see the same arrival epochs.
enum StreamTag : std::uint64_t { kArrivals = 1, kSelection = 2, kService = 3, kProbe = 4 };

struct Task {
  std::uint32_t job = kNone;
  std::uint32_t next = kNone;  // next task in the server's FIFO
  std::uint32_t server = kNone;
  double service = 0.0;
  bool cancelled = false;
  bool in_service = false;
  bool finished = false;
};

struct Job {
  double arrival = 0.0;
  std::int64_t index = 0;
  int needed = 0;
  int done = 0;
  double max_completed_service = 0.0;
  std::vector<std::uint32_t> tasks;  // kept only when tasks can be cancelled
};

struct Server {
  std::uint32_t head = kNone;  // in service when busy
  std::uint32_t tail = kNone;
  int active = 0;              // queued + in service, excluding cancelled
  std::uint32_t epoch = 0;     // bumps when an in-service task is cancelled
  bool busy = false;
};

struct Event {
  double time;
  std::uint64_t seq;
  std::int32_t server;  // -1 for an arrival
  std::uint32_t epoch;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const noexcept {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

template <class T>
class Pool {
 public:
  std::uint32_t acquire() {
    if (!free_.empty()) {
      const std::uint32_t id = free_.back();
      free_.pop_back();
      return id;
    }
    items_.emplace_back();
    return static_cast<std::uint32_t>(items_.size() - 1);
  }
  void release(std::uint32_t id) { free_.push_back(id); }
  T& operator[](std::uint32_t id) { return items_[id]; }

 private:
  std::vector<T> items_;
  std::vector<std::uint32_t> free_;
};

class Engine {
 public:
  explicit Engine(const ClusterConfig& config)
      : config_(config),
        servers_(static_cast<std::size_t>(config.servers)),
        permutation_(static_cast<std::size_t>(config.servers)),
        arrival_rng_(derive_seed(config.seed, kArrivals)),
        selection_rng_(derive_seed(config.seed, kSelection)),
        service_rng_(derive_seed(config.seed, kService)),
        probe_rng_(derive_seed(config.seed, kProbe)),
        task_law_(chunk_dist(config.service, chunk_divisor(config.policy))) {
    std::iota(permutation_.begin(), permutation_.end(), 0u);
    const int tasks = tasks_per_job(config.policy);
    needed_ = std::holds_alternative<RedundantRequest>(config.policy)
                  ? std::get<RedundantRequest>(config.policy).k
                  : tasks;
    track_tasks_ = needed_ < tasks;
    arrival_rate_ = config.lambda * config.servers;
    if (const auto* b = std::get_if<BatchSampling>(&config.policy)) arrival_rate_ /= b->k;
    total_arrivals_ = config.warmup_jobs + config.measured_jobs;
    latencies_.assign(static_cast<std::size_t>(config.measured_jobs), 0.0);
    picks_.reserve(static_cast<std::size_t>(probed_servers(config.policy)));
    chosen_.reserve(static_cast<std::size_t>(tasks));
  }

  LatencyStats run() {
    schedule_arrival(0.0);
    while (measured_done_ < config_.measured_jobs) {
      const Event ev = events_.top();
      events_.pop();
      now_ = ev.time;
      if (ev.server < 0) {
        on_arrival();
      } else {
        Server& s = servers_[static_cast<std::size_t>(ev.server)];
        if (ev.epoch != s.epoch || !s.busy) continue;  // cancelled service
        on_departure(static_cast<std::uint32_t>(ev.server));
      }
    }
    return finish();
  }

 private:
  void schedule_arrival(double from) {
    if (arrivals_ >= total_arrivals_) return;
    events_.push({from + arrival_rng_.exponential(arrival_rate_), seq_++, -1, 0});
  }

  void sample_servers(int count) {
    picks_.clear();
    const auto n = static_cast<std::uint64_t>(permutation_.size());
    for (int i = 0; i < count; ++i) {
      const auto ui = static_cast<std::uint64_t>(i);
      const std::uint64_t j = ui + selection_rng_.below(n - ui);
      std::swap(permutation_[ui], permutation_[j]);
      picks_.push_back(permutation_[ui]);
    }
  }

  // Stable ordering by queue length: ties keep the (random) sampling order.
  void least_loaded(int count) {
    std::stable_sort(picks_.begin(), picks_.end(), [&](std::uint32_t a, std::uint32_t b) {
      return servers_[a].active < servers_[b].active;
    });
    chosen_.assign(picks_.begin(), picks_.begin() + count);
  }

  void select() {
    chosen_.clear();
    std::visit(overloaded{
                   [&](const NaiveReplication& p) {
                     sample_servers(p.d);
                     least_loaded(1);
                   },
                   [&](const KSplit& p) {
                     sample_servers(p.k * p.d);
                     for (int batch = 0; batch < p.k; ++batch) {
                       std::uint32_t best = picks_[static_cast<std::size_t>(batch * p.d)];
                       for (int j = 1; j < p.d; ++j) {
                         const std::uint32_t s = picks_[static_cast<std::size_t>(batch * p.d + j)];
                         if (servers_[s].active < servers_[best].active) best = s;
                       }
                       chosen_.push_back(best);
                     }
                   },
                   [&](const LeastKOfN& p) {
                     sample_servers(p.n);
                     least_loaded(p.k);
                   },
                   [&](const BatchSampling& p) {
                     sample_servers(p.n);
                     least_loaded(p.k);
                   },
                   [&](const RedundantRequest& p) {
                     sample_servers(p.k + p.delta);
                     chosen_.assign(picks_.begin(), picks_.end());
                   },
               },
               config_.policy);
  }

  void on_arrival() {
    const std::int64_t index = arrivals_++;
    const std::uint32_t jid = jobs_.acquire();
    Job& job = jobs_[jid];
    job.arrival = now_;
    job.index = index;
    job.needed = needed_;
    job.done = 0;
    job.max_completed_service = 0.0;
    job.tasks.clear();

    if (is_measured(index)) {
      const auto probe = probe_rng_.below(permutation_.size());
      const int q = servers_[probe].active;
      if (static_cast<std::size_t>(q) >= queue_hist_.size()) {
        queue_hist_.resize(static_cast<std::size_t>(q) + 1, 0);
      }
      ++queue_hist_[static_cast<std::size_t>(q)];
    }

    select();
    for (const std::uint32_t sid : chosen_) {
      const std::uint32_t tid = tasks_.acquire();
      Task& t = tasks_[tid];
      t.job = jid;
      t.next = kNone;
      t.server = sid;
      t.service = task_law_.sample(service_rng_);
      t.cancelled = false;
      t.in_service = false;
      t.finished = false;
      if (track_tasks_) jobs_[jid].tasks.push_back(tid);
      enqueue(sid, tid);
    }
    schedule_arrival(now_);
  }

  void enqueue(std::uint32_t sid, std::uint32_t tid) {
    Server& s = servers_[sid];
    if (s.tail == kNone) {
      s.head = tid;
    } else {
      tasks_[s.tail].next = tid;
    }
    s.tail = tid;
    ++s.active;
    if (!s.busy) start_next(sid);
    check_server(sid);
  }

  // Drops cancelled tasks at the head and starts the next live one.
  void start_next(std::uint32_t sid) {
    Server& s = servers_[sid];
    while (s.head != kNone && tasks_[s.head].cancelled) {
      const std::uint32_t dead = s.head;
      s.head = tasks_[dead].next;
      tasks_.release(dead);
    }
    if (s.head == kNone) {
      s.tail = kNone;
      s.busy = false;
      return;
    }
    Task& t = tasks_[s.head];
    t.in_service = true;
    s.busy = true;
    events_.push({now_ + t.service, seq_++, static_cast<std::int32_t>(sid), s.epoch});
  }

  // Removes the in-service head of a server without completing it.
  std::uint32_t pop_head(std::uint32_t sid) {
    Server& s = servers_[sid];
    const std::uint32_t tid = s.head;
    s.head = tasks_[tid].next;
    if (s.head == kNone) s.tail = kNone;
    --s.active;
    s.busy = false;
    return tid;
  }

  void on_departure(std::uint32_t sid) {
    const std::uint32_t tid = pop_head(sid);
    Task& t = tasks_[tid];
    t.in_service = false;
    t.finished = true;
    const std::uint32_t jid = t.job;
    Job& job = jobs_[jid];
    ++job.done;
    job.max_completed_service = std::max(job.max_completed_service, t.service);
    if (!track_tasks_) tasks_.release(tid);
    start_next(sid);
    check_server(sid);
    if (job.done == job.needed) complete(jid);
  }

  void complete(std::uint32_t jid) {
    Job& job = jobs_[jid];
    const double latency = now_ - job.arrival;
    if (config_.check_invariants && latency + 1e-12 < job.max_completed_service) {
      ++violations_;
    }
    if (is_measured(job.index)) {
      latencies_[static_cast<std::size_t>(job.index - config_.warmup_jobs)] = latency;
      ++measured_done_;
    }
    ++completions_;
    if (track_tasks_) {
      for (const std::uint32_t tid : job.tasks) {
        Task& t = tasks_[tid];
        if (t.finished) {
          tasks_.release(tid);
          continue;
        }
        const std::uint32_t sid = t.server;
        Server& s = servers_[sid];
        if (t.in_service) {
          ++s.epoch;
          pop_head(sid);
          tasks_.release(tid);
          start_next(sid);
        } else {
          // Unlinked lazily when it reaches the head.
          t.cancelled = true;
          --s.active;
        }
        check_server(sid);
      }
    }
    jobs_.release(jid);
  }

  void check_server(std::uint32_t sid) {
    if (!config_.check_invariants) return;
    const Server& s = servers_[sid];
    if (s.busy != (s.active > 0) || s.active < 0) ++violations_;
  }

  bool is_measured(std::int64_t index) const noexcept {
    return index >= config_.warmup_jobs && index < total_arrivals_;
  }

  LatencyStats finish() {
    LatencyStats stats;
    stats.job_count = config_.measured_jobs;
    stats.arrivals = arrivals_;
    stats.completions = completions_;
    stats.in_flight = arrivals_ - completions_;
    stats.invariant_violations = violations_;
    stats.simulated_time = now_;

    const double n = static_cast<double>(latencies_.size());
    stats.mean = std::accumulate(latencies_.begin(), latencies_.end(), 0.0) / n;
    stats.std_err = batch_means_std_err(latencies_);

    stats.samples = std::move(latencies_);
    std::sort(stats.samples.begin(), stats.samples.end());
    stats.min = stats.samples.front();
    stats.max = stats.samples.back();
    for (const double p : {0.5, 0.9, 0.99}) {
      const auto rank = static_cast<std::size_t>(std::ceil(p * n));
      stats.quantiles[p] = stats.samples[std::max<std::size_t>(rank, 1) - 1];
    }
    constexpr int kGrid = 100;
    for (int i = 0; i <= kGrid; ++i) {
      const double t = stats.max * i / kGrid;
      stats.ccdf.emplace_back(t, stats.ccdf_at(t));
    }
    std::int64_t probes = 0;
    for (const auto c : queue_hist_) probes += c;
    std::int64_t at_least = probes;
    for (std::size_t r = 0; r < queue_hist_.size(); ++r) {
      stats.queue_ccdf.emplace_back(static_cast<int>(r),
                                    probes ? static_cast<double>(at_least) / probes : 0.0);
      at_least -= queue_hist_[r];
    }
    return stats;
  }

  const ClusterConfig& config_;
  std::vector<Server> servers_;
  std::vector<std::uint32_t> permutation_;
  Rng arrival_rng_;
  Rng selection_rng_;
  Rng service_rng_;
  Rng probe_rng_;
  ServiceDistribution task_law_;
  int needed_ = 0;
  bool track_tasks_ = false;
  double arrival_rate_ = 0.0;
  std::int64_t total_arrivals_ = 0;

  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  Pool<Task> tasks_;
  Pool<Job> jobs_;
  std::vector<std::uint32_t> picks_;
  std::vector<std::uint32_t> chosen_;
  std::vector<double> latencies_;
  std::vector<std::int64_t> queue_hist_;

  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::int64_t arrivals_ = 0;
  std::int64_t completions_ = 0;
  std::int64_t measured_done_ = 0;
  std::int64_t violations_ = 0;
};

}  // namespace

std::string describe(const Policy& policy) {
  char buf[96];
  std::visit(overloaded{
                 [&](const NaiveReplication& p) {
                   std::snprintf(buf, sizeof buf, "NaiveReplication{d=%d}", p.d);
                 },
                 [&](const KSplit& p) {
                   std::snprintf(buf, sizeof buf, "KSplit{k=%d, d=%d}", p.k, p.d);
                 },
                 [&](const LeastKOfN& p) {
                   std::snprintf(buf, sizeof buf, "LeastKOfN{n=%d, k=%d}", p.n, p.k);
                 },
                 [&](const BatchSampling& p) {
                   std::snprintf(buf, sizeof buf, "BatchSampling{n=%d, k=%d}", p.n, p.k);
                 },
                 [&](const RedundantRequest& p) {
                   std::snprintf(buf, sizeof buf, "RedundantRequest{k=%d, delta=%d}", p.k,
                                 p.delta);
                 },
             },
             policy);
  return buf;
}

int probed_servers(const Policy& policy) {
  return std::visit(overloaded{
                        [](const NaiveReplication& p) { return p.d; },
                        [](const KSplit& p) { return p.k * p.d; },
                        [](const LeastKOfN& p) { return p.n; },
                        [](const BatchSampling& p) { return p.n; },
                        [](const RedundantRequest& p) { return p.k + p.delta; },
                    },
                    policy);
}

int tasks_per_job(const Policy& policy) {
  return std::visit(overloaded{
                        [](const NaiveReplication&) { return 1; },
                        [](const KSplit& p) { return p.k; },
                        [](const LeastKOfN& p) { return p.k; },
                        [](const BatchSampling& p) { return p.k; },
                        [](const RedundantRequest& p) { return p.k + p.delta; },
                    },
                    policy);
}

int chunk_divisor(const Policy& policy) {
  return std::visit(overloaded{
                        [](const NaiveReplication&) { return 1; },
                        [](const KSplit& p) { return p.k; },
                        [](const LeastKOfN& p) { return p.k; },
                        [](const BatchSampling&) { return 1; },
                        [](const RedundantRequest& p) { return p.k; },
                    },
                    policy);
}

void ClusterConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(lambda > 0.0)) fail("lambda must be positive");
  if (!(lambda < 1.0)) fail("unstable configuration: lambda must be < 1");
  if (measured_jobs < 1) fail("measured_jobs must be >= 1");
  if (warmup_jobs < 0) fail("warmup_jobs must be >= 0");
  if (measured_jobs + warmup_jobs > std::int64_t{1} << 40) fail("job budget too large");
  std::visit(overloaded{
                 [&](const NaiveReplication& p) {
                   if (p.d < 1) fail("naive replication needs d >= 1");
                 },
                 [&](const KSplit& p) {
                   if (p.k < 1 || p.d < 1) fail("k-split needs k >= 1 and d >= 1");
                 },
                 [&](const LeastKOfN& p) {
                   if (p.k < 1 || p.n < p.k) fail("least-k-of-n needs n >= k >= 1");
                 },
                 [&](const BatchSampling& p) {
                   if (p.k < 1 || !(p.n > p.k && p.n < 2 * p.k)) {
                     fail("batch sampling needs 1 < n/k < 2");
                   }
                 },
                 [&](const RedundantRequest& p) {
                   if (p.k < 1 || p.delta < 0) fail("redundant request needs k >= 1, delta >= 0");
                 },
             },
             policy);
  if (servers < probed_servers(policy)) {
    fail("policy/L mismatch: " + describe(policy) + " probes " +
         std::to_string(probed_servers(policy)) + " servers but L = " +
         std::to_string(servers));
  }
  // Throws for invalid family parameters.
  (void)chunk_dist(service, chunk_divisor(policy));
}

int default_server_count(int k) { return std::max(2000, 200 * k); }

double LatencyStats::ccdf_at(double t) const {
  if (samples.empty()) return 0.0;
  const auto it = std::upper_bound(samples.begin(), samples.end(), t);
  return static_cast<double>(samples.end() - it) / static_cast<double>(samples.size());
}

double LatencyStats::queue_ccdf_at(int r) const {
  if (r <= 0) return queue_ccdf.empty() ? 0.0 : queue_ccdf.front().second;
  if (static_cast<std::size_t>(r) >= queue_ccdf.size()) return 0.0;
  return queue_ccdf[static_cast<std::size_t>(r)].second;
}

double batch_means_std_err(const std::vector<double>& values, int batches) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(batches), n);
  const std::size_t size = n / b;
  std::vector<double> means(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < size; ++j) sum += values[i * size + j];
    means[i] = sum / static_cast<double>(size);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(b);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

LatencyStats run(const ClusterConfig& config) {
  config.validate();
  Engine engine(config);
  return engine.run();
}

GainResult gain_experiment(int k, int d, double lambda, const DistFamily& family,
                           std::uint64_t seed, const GainSizes& sizes) {
  if (k < 1 || d < 1) throw std::invalid_argument("gain experiment needs k, d >= 1");
  ClusterConfig base;
  base.servers = sizes.servers > 0 ? sizes.servers : default_server_count(k);
  base.lambda = lambda;
  base.service = family;
  base.seed = seed;
  base.warmup_jobs = sizes.warmup_jobs >= 0 ? sizes.warmup_jobs : 20LL * base.servers;
  base.measured_jobs = sizes.measured_jobs;

  ClusterConfig naive = base;
  naive.policy = NaiveReplication{d};
  ClusterConfig coded = base;
  coded.policy = LeastKOfN{d * k, k};

  GainResult result{0.0, 0.0, run(naive), run(coded)};
  result.gain = result.naive.mean - result.coded.mean;
  result.std_err = std::hypot(result.naive.std_err, result.coded.std_err);
  return result;
}

}  // namespace eclat
