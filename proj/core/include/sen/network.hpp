#ifndef SEN_NETWORK_HPP
#define SEN_NETWORK_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sen {

/// Times are plain reals in the caller's units (e.g. fractional years) with
/// the network-local origin shifted to 0 at construction.
using Timestamp = double;

struct Event {
  int target = -1;
  int source = -1;
  Timestamp time = 0.0;
};

struct Dyad {
  int target = -1;
  int source = -1;
  friend bool operator==(const Dyad&, const Dyad&) = default;
};

/// Packs a dyad into a single key for hashed sets.
inline std::int64_t dyad_key(int target, int source) {
  return (static_cast<std::int64_t>(target) << 32) |
         static_cast<std::uint32_t>(source);
}
inline std::int64_t dyad_key(const Dyad& d) { return dyad_key(d.target, d.source); }

/// Raw inputs for network construction, prior to validation/normalization.
struct NetworkData {
  std::vector<std::string> target_ids;
  std::vector<Timestamp> target_times;
  std::vector<std::string> source_ids;
  std::vector<Timestamp> source_times;
  std::vector<Event> events;
  std::optional<Timestamp> horizon;
};

/// A directed bipartite single-event network: target (cited) and source
/// (citing) node roles, at most one timed event per (target, source) dyad,
/// all times inside [0, horizon]. Construction normalizes times so the
/// earliest publication sits at 0, orders targets by publication time, and
/// validates every invariant. Instances are immutable afterwards.
class SingleEventNetwork {
 public:
  /// Validates, normalizes and indexes raw data.
  /// Throws DuplicateEvent, CausalityViolation, EventTimeMismatch or
  /// InvalidParams when an invariant cannot hold.
  static SingleEventNetwork build(NetworkData data);

  int num_targets() const { return static_cast<int>(target_times_.size()); }
  int num_sources() const { return static_cast<int>(source_times_.size()); }
  std::int64_t num_events() const { return static_cast<std::int64_t>(events_.size()); }
  Timestamp horizon() const { return horizon_; }

  Timestamp target_time(int i) const { return target_times_[i]; }
  Timestamp source_time(int j) const { return source_times_[j]; }
  const std::string& target_id(int i) const { return target_ids_[i]; }
  const std::string& source_id(int j) const { return source_ids_[j]; }
  const std::vector<std::string>& target_ids() const { return target_ids_; }
  const std::vector<std::string>& source_ids() const { return source_ids_; }
  const std::vector<Event>& events() const { return events_; }

  /// Events of one target, ordered by source index.
  std::span<const Event> events_of_target(int i) const;
  bool has_event(int target, int source) const;
  int in_degree(int i) const;
  int out_degree(int j) const;

  /// Source indices ordered by publication time (ties by index).
  const std::vector<int>& sources_by_time() const { return sources_by_time_; }

  /// Position in sources_by_time() of the first source published strictly
  /// after target i; sources from there on form i's admissible dyads.
  int first_admissible(int i) const { return first_admissible_[i]; }
  std::int64_t admissible_count(int i) const {
    return num_sources() - first_admissible_[i];
  }
  std::int64_t total_admissible() const { return total_admissible_; }

  /// Same nodes and horizon, different event set (used by the splitter).
  SingleEventNetwork with_events(std::vector<Event> new_events) const;

  int target_index(const std::string& id) const;  // -1 when absent
  int source_index(const std::string& id) const;

  /// TSV edge list `source_id<TAB>target_id<TAB>time` with `#` comments.
  /// The optional node file `node_id<TAB>pub_time<TAB>role` supplies
  /// publication times; without it target publication defaults to the
  /// earliest incoming event and source publication to its event time.
  static SingleEventNetwork load(const std::string& edge_path,
                                 const std::optional<std::string>& node_path,
                                 std::optional<Timestamp> horizon_override = {});
  void save(const std::string& edge_path, const std::string& node_path) const;

 private:
  SingleEventNetwork() = default;
  void build_indexes();

  std::vector<std::string> target_ids_;
  std::vector<Timestamp> target_times_;
  std::vector<std::string> source_ids_;
  std::vector<Timestamp> source_times_;
  std::vector<Event> events_;  // sorted by (target, source)
  Timestamp horizon_ = 0.0;

  std::vector<std::int64_t> target_row_start_;  // CSR over events_
  std::vector<int> sources_by_time_;
  std::vector<int> first_admissible_;
  std::vector<int> out_degree_;
  std::int64_t total_admissible_ = 0;
};

/// Returns a copy whose targets are ordered by publication time (stable in
/// the original index on ties). Idempotent; networks from build() already
/// satisfy the ordering.
SingleEventNetwork relabel_by_time(const SingleEventNetwork& net);

/// Stable sort permutation of times: result[k] = original index of the k-th
/// node after ordering by (time, original index).
std::vector<int> sort_permutation_by_time(const std::vector<Timestamp>& times);

}  // namespace sen

#endif  // SEN_NETWORK_HPP
