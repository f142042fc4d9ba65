#ifndef GMBP_ENGINE_HPP_
#define GMBP_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gmbp/gaussmix.hpp"
#include "gmbp/graph.hpp"
#include "gmbp/image.hpp"
#include "gmbp/prior.hpp"

namespace gmbp {

// Which clique belief supplies a pixel's estimate.
enum class PixelReduction { LowestClique, MeanOfModes };

// Sequential: in-place sweep, later messages in a pass see earlier updates.
// Synchronous: every message of a pass reads the previous pass's values;
// this is the mode that may use several threads.
enum class UpdateOrder { Sequential, Synchronous };

enum class StopReason { NothingToDo, Converged, IterationCap, ExactSchedule };
const char* to_string(StopReason reason);

struct EngineConfig {
  WeightMode weight_mode = WeightMode::Exact;
  std::size_t max_components = 1;
  // Cap for intermediate products while folding incoming messages;
  // 0 means max_components * (components of the clique potential).
  std::size_t working_components = 0;
  int iterations = 3;
  double convergence_tol = 0.1;
  double ridge = 1e-6;
  ScheduleKind schedule = ScheduleKind::Auto;
  PixelReduction reduction = PixelReduction::LowestClique;
  UpdateOrder update = UpdateOrder::Sequential;
  int threads = 1;

  void validate() const;
};

struct Message {
  int from = 0;
  int to = 0;
  VarSet over;
  Mixture mixture;
};

// One message per directed edge of a graph, initialized to uniform.
class MessageStore {
 public:
  explicit MessageStore(const CliqueGraph& graph);

  const Message& get(int from, int to) const;
  void set(Message message);
  std::span<const int> senders(int to) const { return senders_[to]; }

 private:
  std::size_t slot(int from, int to) const;

  std::vector<std::vector<int>> senders_;
  std::vector<std::vector<Message>> incoming_;
};

// Per clique: the shared potential relabeled onto the window's pixel ids and
// conditioned on the clique's observed pixels.
std::vector<Mixture> condition_potentials(const CliqueGraph& graph, const Mixture& potential,
                                          OpCounter* counter = nullptr);

// M_{i->j}: potential_i times all incoming messages except from j,
// marginalized onto the separator, pruned and normalized.
Message send_message(const CliqueGraph& graph, std::span<const Mixture> potentials,
                     const MessageStore& messages, DirectedEdge edge, const EngineConfig& config,
                     OpCounter* counter = nullptr);

// D_i: potential_i times every incoming message.
Mixture clique_belief(const CliqueGraph& graph, std::span<const Mixture> potentials,
                      const MessageStore& messages, int clique, const EngineConfig& config,
                      OpCounter* counter = nullptr);

struct IterationStats {
  int iteration = 0;
  double mean_change = 0.0;
  double max_change = 0.0;
  double seconds = 0.0;
  std::size_t messages = 0;
  OpCounter ops;         // this iteration only
  OpCounter cumulative;  // conditioning plus iterations 1..iteration
};

struct RunStats {
  ScheduleKind schedule = ScheduleKind::Loopy;
  StopReason stop = StopReason::NothingToDo;
  std::size_t unknown_pixels = 0;
  std::size_t cliques = 0;
  std::size_t edges = 0;
  std::size_t potential_components = 0;
  OpCounter conditioning_ops;
  std::vector<IterationStats> iterations;

  OpCounter total_ops() const;
};

struct RunResult {
  GrayImage image;
  RunStats stats;
};

using IterationObserver = std::function<void(const IterationStats&, const GrayImage&)>;

RunResult run(const GrayImage& image, const InpaintMask& mask, const PriorModel& model,
              const EngineConfig& config, const IterationObserver& observer = {});

// Same, on an already built graph and clique potential over 4 window variables.
RunResult run_on_graph(const GrayImage& image, const CliqueGraph& graph, const Mixture& potential,
                       const EngineConfig& config, const IterationObserver& observer = {});

struct OpRow {
  Eigen::Index dimension = 0;
  std::uint64_t multiplications = 0;
  std::uint64_t inversions = 0;
  friend bool operator==(const OpRow&, const OpRow&) = default;
};

// Totals over the whole run, one row per dimension, ascending.
std::vector<OpRow> count_ops(const RunStats& stats);

// Structured text; wall times only when include_timing is set, so that
// repeated runs produce identical files.
std::string format_stats(const RunStats& stats, bool include_timing = false);

}  // namespace gmbp

#endif  // GMBP_ENGINE_HPP_
