#include "sen/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "sen/errors.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {

std::unordered_map<std::string, int> index_ids(const std::vector<std::string>& ids,
                                               const char* role) {
  std::unordered_map<std::string, int> m;
  m.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty()) throw ParseError(std::string(role) + " id is empty");
    if (!m.emplace(ids[i], static_cast<int>(i)).second)
      throw ParseError(std::string("duplicate ") + role + " id: " + ids[i]);
  }
  return m;
}

}  // namespace

std::vector<int> sort_permutation_by_time(const std::vector<Timestamp>& times) {
  std::vector<int> perm(times.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return times[a] < times[b]; });
  return perm;
}

SingleEventNetwork SingleEventNetwork::build(NetworkData data) {
  if (data.target_ids.size() != data.target_times.size() ||
      data.source_ids.size() != data.source_times.size())
    throw InvalidParams("node id/time lists must have equal lengths");

  SingleEventNetwork net;
  net.target_ids_ = std::move(data.target_ids);
  net.target_times_ = std::move(data.target_times);
  net.source_ids_ = std::move(data.source_ids);
  net.source_times_ = std::move(data.source_times);
  net.events_ = std::move(data.events);

  for (Timestamp t : net.target_times_)
    if (!std::isfinite(t)) throw InvalidParams("non-finite publication time");
  for (Timestamp t : net.source_times_)
    if (!std::isfinite(t)) throw InvalidParams("non-finite publication time");

  // Shift the origin so the earliest publication is at 0.
  double min_time = std::numeric_limits<double>::infinity();
  for (Timestamp t : net.target_times_) min_time = std::min(min_time, t);
  for (Timestamp t : net.source_times_) min_time = std::min(min_time, t);
  if (net.target_times_.empty() && net.source_times_.empty()) min_time = 0.0;
  for (Timestamp& t : net.target_times_) t -= min_time;
  for (Timestamp& t : net.source_times_) t -= min_time;
  for (Event& e : net.events_) e.time -= min_time;

  // Relabel targets by publication time, stable in the original index.
  const auto perm = sort_permutation_by_time(net.target_times_);
  std::vector<int> old_to_new(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) old_to_new[perm[k]] = static_cast<int>(k);
  {
    std::vector<std::string> ids(perm.size());
    std::vector<Timestamp> times(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
      ids[k] = std::move(net.target_ids_[perm[k]]);
      times[k] = net.target_times_[perm[k]];
    }
    net.target_ids_ = std::move(ids);
    net.target_times_ = std::move(times);
  }

  const int n_targets = net.num_targets();
  const int n_sources = net.num_sources();
  for (Event& e : net.events_) {
    if (e.target < 0 || e.target >= n_targets || e.source < 0 || e.source >= n_sources)
      throw InvalidParams("event references an unknown node index");
    e.target = old_to_new[e.target];
  }

  std::sort(net.events_.begin(), net.events_.end(), [](const Event& a, const Event& b) {
    if (a.target != b.target) return a.target < b.target;
    return a.source < b.source;
  });
  for (std::size_t k = 1; k < net.events_.size(); ++k) {
    if (net.events_[k].target == net.events_[k - 1].target &&
        net.events_[k].source == net.events_[k - 1].source)
      throw DuplicateEvent("duplicate event for dyad (" +
                           net.target_ids_[net.events_[k].target] + ", " +
                           net.source_ids_[net.events_[k].source] + ")");
  }

  double max_time = 0.0;
  for (Timestamp t : net.target_times_) max_time = std::max(max_time, t);
  for (Timestamp t : net.source_times_) max_time = std::max(max_time, t);
  for (const Event& e : net.events_) {
    if (!std::isfinite(e.time)) throw InvalidParams("non-finite event time");
    if (e.time < net.target_times_[e.target])
      throw CausalityViolation("event on (" + net.target_ids_[e.target] + ", " +
                               net.source_ids_[e.source] +
                               ") precedes the target's publication");
    if (e.time != net.source_times_[e.source])
      throw EventTimeMismatch("event time for source " + net.source_ids_[e.source] +
                              " differs from its publication time");
    max_time = std::max(max_time, e.time);
  }

  // Horizon covers every publication and event; the default is the largest
  // observed time (an isolated node published last can push it past the last
  // event).
  if (data.horizon) {
    net.horizon_ = *data.horizon - min_time;
    if (net.horizon_ < max_time)
      throw InvalidParams("horizon is earlier than the latest observed time");
  } else {
    net.horizon_ = max_time;
  }

  net.build_indexes();
  return net;
}

void SingleEventNetwork::build_indexes() {
  const int n_targets = num_targets();
  const int n_sources = num_sources();

  target_row_start_.assign(n_targets + 1, 0);
  for (const Event& e : events_) ++target_row_start_[e.target + 1];
  for (int i = 0; i < n_targets; ++i) target_row_start_[i + 1] += target_row_start_[i];

  sources_by_time_.resize(n_sources);
  std::iota(sources_by_time_.begin(), sources_by_time_.end(), 0);
  std::stable_sort(sources_by_time_.begin(), sources_by_time_.end(),
                   [&](int a, int b) { return source_times_[a] < source_times_[b]; });

  std::vector<Timestamp> sorted_times(n_sources);
  for (int k = 0; k < n_sources; ++k) sorted_times[k] = source_times_[sources_by_time_[k]];

  first_admissible_.resize(n_targets);
  total_admissible_ = 0;
  for (int i = 0; i < n_targets; ++i) {
    const auto it = std::upper_bound(sorted_times.begin(), sorted_times.end(),
                                     target_times_[i]);
    first_admissible_[i] = static_cast<int>(it - sorted_times.begin());
    total_admissible_ += n_sources - first_admissible_[i];
  }

  out_degree_.assign(n_sources, 0);
  for (const Event& e : events_) ++out_degree_[e.source];
}

std::span<const Event> SingleEventNetwork::events_of_target(int i) const {
  const auto lo = static_cast<std::size_t>(target_row_start_[i]);
  const auto hi = static_cast<std::size_t>(target_row_start_[i + 1]);
  return {events_.data() + lo, hi - lo};
}

bool SingleEventNetwork::has_event(int target, int source) const {
  const auto row = events_of_target(target);
  auto it = std::lower_bound(row.begin(), row.end(), source,
                             [](const Event& e, int s) { return e.source < s; });
  return it != row.end() && it->source == source;
}

int SingleEventNetwork::in_degree(int i) const {
  return static_cast<int>(target_row_start_[i + 1] - target_row_start_[i]);
}

int SingleEventNetwork::out_degree(int j) const { return out_degree_[j]; }

SingleEventNetwork SingleEventNetwork::with_events(std::vector<Event> new_events) const {
  NetworkData data;
  data.target_ids = target_ids_;
  data.target_times = target_times_;
  data.source_ids = source_ids_;
  data.source_times = source_times_;
  data.events = std::move(new_events);
  data.horizon = horizon_;
  return build(std::move(data));
}

int SingleEventNetwork::target_index(const std::string& id) const {
  for (int i = 0; i < num_targets(); ++i)
    if (target_ids_[i] == id) return i;
  return -1;
}

int SingleEventNetwork::source_index(const std::string& id) const {
  for (int j = 0; j < num_sources(); ++j)
    if (source_ids_[j] == id) return j;
  return -1;
}

SingleEventNetwork relabel_by_time(const SingleEventNetwork& net) {
  NetworkData data;
  data.target_ids = net.target_ids();
  data.target_times.resize(net.num_targets());
  for (int i = 0; i < net.num_targets(); ++i) data.target_times[i] = net.target_time(i);
  data.source_ids = net.source_ids();
  data.source_times.resize(net.num_sources());
  for (int j = 0; j < net.num_sources(); ++j) data.source_times[j] = net.source_time(j);
  data.events = net.events();
  data.horizon = net.horizon();
  return SingleEventNetwork::build(std::move(data));
}

namespace {

struct EdgeRow {
  std::string source_id;
  std::string target_id;
  double time;
};

std::vector<EdgeRow> read_edge_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge file: " + path);
  std::vector<EdgeRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const auto fields = split_fields(sv, '\t');
    if (fields.size() != 3)
      throw ParseError("edge file line " + std::to_string(line_no) +
                       ": expected 3 tab-separated fields");
    const auto t = parse_double(trim(fields[2]));
    if (!t)
      throw ParseError("edge file line " + std::to_string(line_no) +
                       ": unparseable time '" + std::string(fields[2]) + "'");
    rows.push_back({std::string(trim(fields[0])), std::string(trim(fields[1])), *t});
    if (rows.back().source_id.empty() || rows.back().target_id.empty())
      throw ParseError("edge file line " + std::to_string(line_no) + ": empty node id");
  }
  return rows;
}

struct NodeRow {
  std::string id;
  double time;
  bool is_target;
};

std::vector<NodeRow> read_node_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open node file: " + path);
  std::vector<NodeRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const auto fields = split_fields(sv, '\t');
    if (fields.size() != 3)
      throw ParseError("node file line " + std::to_string(line_no) +
                       ": expected 3 tab-separated fields");
    const auto t = parse_double(trim(fields[1]));
    if (!t)
      throw ParseError("node file line " + std::to_string(line_no) +
                       ": unparseable time '" + std::string(fields[1]) + "'");
    const auto role = trim(fields[2]);
    if (role != "target" && role != "source")
      throw ParseError("node file line " + std::to_string(line_no) +
                       ": role must be 'target' or 'source'");
    rows.push_back({std::string(trim(fields[0])), *t, role == "target"});
  }
  return rows;
}

}  // namespace

SingleEventNetwork SingleEventNetwork::load(const std::string& edge_path,
                                            const std::optional<std::string>& node_path,
                                            std::optional<Timestamp> horizon_override) {
  const auto rows = read_edge_rows(edge_path);
  NetworkData data;
  data.horizon = horizon_override;

  std::unordered_map<std::string, int> target_idx;
  std::unordered_map<std::string, int> source_idx;

  if (node_path) {
    const auto nodes = read_node_rows(*node_path);
    for (const auto& n : nodes) {
      if (n.is_target) {
        if (!target_idx.emplace(n.id, static_cast<int>(data.target_ids.size())).second)
          throw ParseError("duplicate target node id: " + n.id);
        data.target_ids.push_back(n.id);
        data.target_times.push_back(n.time);
      } else {
        if (!source_idx.emplace(n.id, static_cast<int>(data.source_ids.size())).second)
          throw ParseError("duplicate source node id: " + n.id);
        data.source_ids.push_back(n.id);
        data.source_times.push_back(n.time);
      }
    }
    for (const auto& r : rows) {
      const auto ti = target_idx.find(r.target_id);
      if (ti == target_idx.end())
        throw ParseError("edge references unknown target node: " + r.target_id);
      const auto si = source_idx.find(r.source_id);
      if (si == source_idx.end())
        throw ParseError("edge references unknown source node: " + r.source_id);
      data.events.push_back({ti->second, si->second, r.time});
    }
  } else {
    // Publication times inferred from the edges: a target appears at its
    // earliest incoming event, a source at its (single) event time.
    for (const auto& r : rows) {
      auto [ti, t_new] = target_idx.emplace(r.target_id,
                                            static_cast<int>(data.target_ids.size()));
      if (t_new) {
        data.target_ids.push_back(r.target_id);
        data.target_times.push_back(r.time);
      } else {
        data.target_times[ti->second] = std::min(data.target_times[ti->second], r.time);
      }
      auto [si, s_new] = source_idx.emplace(r.source_id,
                                            static_cast<int>(data.source_ids.size()));
      if (s_new) {
        data.source_ids.push_back(r.source_id);
        data.source_times.push_back(r.time);
      } else if (data.source_times[si->second] != r.time) {
        throw EventTimeMismatch("source " + r.source_id +
                                " appears with two different event times");
      }
      data.events.push_back({ti->second, si->second, r.time});
    }
  }
  return build(std::move(data));
}

void SingleEventNetwork::save(const std::string& edge_path,
                              const std::string& node_path) const {
  std::ostringstream edges;
  edges << "# source_id\ttarget_id\ttime\n";
  for (const Event& e : events_) {
    edges << source_ids_[e.source] << '\t' << target_ids_[e.target] << '\t'
          << format_double(e.time) << '\n';
  }
  write_file(edge_path, edges.str());

  std::ostringstream nodes;
  nodes << "# node_id\tpub_time\trole\n";
  for (int i = 0; i < num_targets(); ++i)
    nodes << target_ids_[i] << '\t' << format_double(target_times_[i]) << "\ttarget\n";
  for (int j = 0; j < num_sources(); ++j)
    nodes << source_ids_[j] << '\t' << format_double(source_times_[j]) << "\tsource\n";
  write_file(node_path, nodes.str());
}

}  // namespace sen
