#include "gmbp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "gmbp/error.hpp"

namespace gmbp {

namespace {

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

// Runs body(i, counter) for i in [0, n) on up to `threads` workers with
// contiguous chunks; per-worker counters are merged in chunk order.
template <typename Body>
void parallel_for(std::size_t n, int threads, OpCounter* counter, Body&& body) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads), n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i, counter);
    return;
  }
  std::vector<OpCounter> counters(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) {
          body(i, counter ? &counters[w] : nullptr);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (counter) {
    for (const auto& c : counters) counter->merge(c);
  }
}

std::size_t working_cap(const EngineConfig& config, const Mixture& potential) {
  if (config.working_components > 0) return config.working_components;
  return config.max_components * std::max<std::size_t>(1, potential.size());
}

// potential_i times the incoming messages from every neighbor except `skip`.
Mixture fold_incoming(const CliqueGraph& graph, std::span<const Mixture> potentials,
                      const MessageStore& messages, int clique, int skip,
                      const EngineConfig& config, OpCounter* counter) {
  const Mixture& potential = potentials[static_cast<std::size_t>(clique)];
  const std::size_t cap = working_cap(config, potential);
  Mixture acc = potential;
  for (int k : graph.adjacency[static_cast<std::size_t>(clique)]) {
    if (k == skip) continue;
    const Message& incoming = messages.get(k, clique);
    if (is_uniform(incoming.mixture)) continue;
    acc = product(acc, incoming.mixture, config.weight_mode, counter);
    if (acc.size() > cap) acc = prune(acc, cap);
  }
  return acc;
}

struct PixelSlot {
  VarId id;
  int x, y;
  std::vector<int> cliques;  // ascending ids containing this pixel
};

}  // namespace

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::NothingToDo: return "nothing_to_do";
    case StopReason::Converged: return "converged";
    case StopReason::IterationCap: return "iteration_cap";
    case StopReason::ExactSchedule: return "exact_schedule";
  }
  return "unknown";
}

void EngineConfig::validate() const {
  if (max_components < 1) throw Error(ErrorKind::InvalidArgument, "max_components must be >= 1");
  if (iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 1");
  if (!(convergence_tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative convergence_tol");
  if (!(ridge >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative ridge");
  if (threads < 1) throw Error(ErrorKind::InvalidArgument, "threads must be >= 1");
}

MessageStore::MessageStore(const CliqueGraph& graph)
    : senders_(graph.adjacency), incoming_(graph.adjacency.size()) {
  for (std::size_t to = 0; to < senders_.size(); ++to) {
    for (int from : senders_[to]) {
      Message m;
      m.from = from;
      m.to = static_cast<int>(to);
      m.over = graph.separator(from, m.to);
      m.mixture = uniform_mixture<double>(m.over);
      incoming_[to].push_back(std::move(m));
    }
  }
}

std::size_t MessageStore::slot(int from, int to) const {
  const auto& s = senders_.at(static_cast<std::size_t>(to));
  auto it = std::lower_bound(s.begin(), s.end(), from);
  if (it == s.end() || *it != from) {
    throw Error(ErrorKind::InvalidArgument,
                "no message slot " + std::to_string(from) + "->" + std::to_string(to));
  }
  return static_cast<std::size_t>(it - s.begin());
}

const Message& MessageStore::get(int from, int to) const {
  return incoming_[static_cast<std::size_t>(to)][slot(from, to)];
}

void MessageStore::set(Message message) {
  const std::size_t s = slot(message.from, message.to);
  incoming_[static_cast<std::size_t>(message.to)][s] = std::move(message);
}

std::vector<Mixture> condition_potentials(const CliqueGraph& graph, const Mixture& potential,
                                          OpCounter* counter) {
  if (potential.vars.size() != 4) {
    throw Error(ErrorKind::InvalidArgument, "clique potential must cover a 2x2 window");
  }
  std::vector<Mixture> out;
  out.reserve(graph.cliques.size());
  for (const auto& c : graph.cliques) {
    const VarSet window({c.window[0], c.window[1], c.window[2], c.window[3]});
    Mixture local = relabel(potential, window);
    if (!c.observed.empty()) {
      std::vector<VarId> ids;
      std::vector<double> values;
      for (const auto& [id, v] : c.observed) {
        ids.push_back(id);
        values.push_back(v);
      }
      local = condition(local, VarSet(ids), values, counter);
    }
    out.push_back(std::move(local));
  }
  return out;
}

Message send_message(const CliqueGraph& graph, std::span<const Mixture> potentials,
                     const MessageStore& messages, DirectedEdge edge, const EngineConfig& config,
                     OpCounter* counter) {
  try {
    Message m;
    m.from = edge.from;
    m.to = edge.to;
    m.over = graph.separator(edge.from, edge.to);
    const Mixture acc =
        fold_incoming(graph, potentials, messages, edge.from, edge.to, config, counter);
    m.mixture = prune(marginalize(acc, m.over, config.weight_mode, config.ridge, counter),
                      config.max_components);
    return m;
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(e.what()) + " [clique " + std::to_string(edge.from) +
                              ", edge " + std::to_string(edge.from) + "->" +
                              std::to_string(edge.to) + "]");
  }
}

Mixture clique_belief(const CliqueGraph& graph, std::span<const Mixture> potentials,
                      const MessageStore& messages, int clique, const EngineConfig& config,
                      OpCounter* counter) {
  return fold_incoming(graph, potentials, messages, clique, -1, config, counter);
}

OpCounter RunStats::total_ops() const {
  if (!iterations.empty()) return iterations.back().cumulative;
  return conditioning_ops;
}

RunResult run(const GrayImage& image, const InpaintMask& mask, const PriorModel& model,
              const EngineConfig& config, const IterationObserver& observer) {
  config.validate();
  const CliqueGraph graph = build_graph(image, mask);
  if (graph.cliques.empty()) return run_on_graph(image, graph, Mixture{}, config, observer);
  return run_on_graph(image, graph, build_clique_potential(model, config.weight_mode), config,
                      observer);
}

RunResult run_on_graph(const GrayImage& image, const CliqueGraph& graph, const Mixture& potential,
                       const EngineConfig& config, const IterationObserver& observer) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  RunResult result{image, {}};
  RunStats& stats = result.stats;
  stats.cliques = graph.cliques.size();
  stats.edges = graph.edges.size();
  stats.potential_components = potential.size();
  if (graph.cliques.empty()) return result;

  // Pixel bookkeeping: every unknown pixel and the cliques that hold it.
  std::map<VarId, std::vector<int>> holders;
  for (const auto& c : graph.cliques) {
    for (VarId v : c.vars) holders[v].push_back(c.id);
  }
  std::vector<PixelSlot> pixels;
  pixels.reserve(holders.size());
  for (auto& [id, cliques] : holders) {
    pixels.push_back({id, static_cast<int>(id % graph.width), static_cast<int>(id / graph.width),
                      std::move(cliques)});
  }
  stats.unknown_pixels = pixels.size();

  const std::vector<Mixture> potentials =
      condition_potentials(graph, potential, &stats.conditioning_ops);
  const Schedule schedule = make_schedule(graph, config.schedule, 1);
  stats.schedule = schedule.kind;
  const CliqueGraph& flow = schedule.graph;
  MessageStore messages(flow);

  // Cliques whose beliefs are needed, and per clique the pixels they estimate.
  std::map<int, std::vector<std::size_t>> estimates_from;
  for (std::size_t p = 0; p < pixels.size(); ++p) {
    if (config.reduction == PixelReduction::LowestClique) {
      estimates_from[pixels[p].cliques.front()].push_back(p);
    } else {
      for (int c : pixels[p].cliques) estimates_from[c].push_back(p);
    }
  }
  std::vector<std::pair<int, std::vector<std::size_t>>> belief_jobs(estimates_from.begin(),
                                                                    estimates_from.end());

  OpCounter cumulative = stats.conditioning_ops;
  const bool exact = schedule.kind == ScheduleKind::TwoPass;
  const int max_iterations = exact ? 1 : config.iterations;
  for (int iteration = 1; iteration <= max_iterations; ++iteration) {
    const auto start = Clock::now();
    IterationStats it;
    it.iteration = iteration;

    for (const auto& pass : schedule.passes) {
      if (config.update == UpdateOrder::Sequential) {
        for (const DirectedEdge& e : pass) {
          messages.set(send_message(flow, potentials, messages, e, config, &it.ops));
        }
      } else {
        std::vector<Message> fresh(pass.size());
        parallel_for(pass.size(), config.threads, &it.ops, [&](std::size_t i, OpCounter* c) {
          fresh[i] = send_message(flow, potentials, messages, pass[i], config, c);
        });
        for (auto& m : fresh) messages.set(std::move(m));
      }
      it.messages += pass.size();
    }

    // Per-pixel modes from the clique beliefs.
    std::vector<std::vector<int>> modes(pixels.size());
    std::vector<std::vector<std::pair<std::size_t, int>>> job_modes(belief_jobs.size());
    parallel_for(belief_jobs.size(), config.threads, &it.ops, [&](std::size_t j, OpCounter* c) {
      const auto& [clique, targets] = belief_jobs[j];
      try {
        const Mixture belief = clique_belief(flow, potentials, messages, clique, config, c);
        for (std::size_t p : targets) {
          const Mixture marginal =
              marginalize(belief, VarSet({pixels[p].id}), config.weight_mode, config.ridge, c);
          job_modes[j].emplace_back(p, mode_scan(marginal));
        }
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " [belief of clique " +
                                  std::to_string(clique) + "]");
      }
    });
    for (const auto& jm : job_modes) {
      for (const auto& [p, level] : jm) modes[p].push_back(level);
    }

    double total_change = 0.0;
    for (std::size_t p = 0; p < pixels.size(); ++p) {
      double estimate = 0.0;
      for (int level : modes[p]) estimate += level;
      estimate /= static_cast<double>(modes[p].size());
      if (config.reduction == PixelReduction::MeanOfModes) estimate = std::round(estimate);
      double& pixel = result.image(pixels[p].x, pixels[p].y);
      const double change = std::abs(estimate - pixel);
      total_change += change;
      it.max_change = std::max(it.max_change, change);
      pixel = estimate;
    }
    it.mean_change = total_change / static_cast<double>(pixels.size());
    it.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    cumulative.merge(it.ops);
    it.cumulative = cumulative;
    stats.iterations.push_back(it);
    if (observer) observer(stats.iterations.back(), result.image);

    if (exact) {
      stats.stop = StopReason::ExactSchedule;
      break;
    }
    if (it.max_change < config.convergence_tol) {
      stats.stop = StopReason::Converged;
      break;
    }
    stats.stop = StopReason::IterationCap;
  }
  return result;
}

std::vector<OpRow> count_ops(const RunStats& stats) {
  std::vector<OpRow> rows;
  const OpCounter total = stats.total_ops();
  for (const auto& [n, c] : total.by_dimension()) {
    rows.push_back({n, c.multiplications, c.inversions});
  }
  return rows;
}

std::string format_stats(const RunStats& stats, bool include_timing) {
  std::ostringstream out;
  out << "# gmbp-run-stats 1\n";
  out << "schedule " << to_string(stats.schedule) << '\n';
  out << "stop " << to_string(stats.stop) << '\n';
  out << "unknown_pixels " << stats.unknown_pixels << '\n';
  out << "cliques " << stats.cliques << '\n';
  out << "edges " << stats.edges << '\n';
  out << "potential_components " << stats.potential_components << '\n';
  out << "# iteration <k> <mean_change> <max_change> <messages>"
      << (include_timing ? " <seconds>" : "") << '\n';
  for (const auto& it : stats.iterations) {
    out << "iteration " << it.iteration << ' ' << format_double(it.mean_change) << ' '
        << format_double(it.max_change) << ' ' << it.messages;
    if (include_timing) out << ' ' << format_double(it.seconds);
    out << '\n';
  }
  out << "# iteration_ops <k> <n> <multiplications> <inversions>\n";
  for (const auto& it : stats.iterations) {
    for (const auto& [n, c] : it.ops.by_dimension()) {
      out << "iteration_ops " << it.iteration << ' ' << n << ' ' << c.multiplications << ' '
          << c.inversions << '\n';
    }
  }
  out << "# ops <n> <multiplications> <inversions> (whole run, including conditioning)\n";
  for (const auto& row : count_ops(stats)) {
    out << "ops " << row.dimension << ' ' << row.multiplications << ' ' << row.inversions << '\n';
  }
  out << "end\n";
  return out.str();
}

}  // namespace gmbp
