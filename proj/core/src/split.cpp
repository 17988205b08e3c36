#include "sen/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sen/errors.hpp"
#include "sen/random.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {

using json = nlohmann::ordered_json;

// Union-find over target vertices [0, T) and source vertices [T, T+S).
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

int count_components(const SingleEventNetwork& net) {
  const int n = net.num_targets() + net.num_sources();
  UnionFind uf(n);
  std::vector<char> active(n, 0);
  for (const Event& e : net.events()) {
    const int u = e.target;
    const int v = net.num_targets() + e.source;
    active[u] = active[v] = 1;
    uf.unite(u, v);
  }
  std::unordered_set<int> roots;
  for (int x = 0; x < n; ++x)
    if (active[x]) roots.insert(uf.find(x));
  return static_cast<int>(roots.size());
}

SplitResult train_test_split(const SingleEventNetwork& net, double fraction,
                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InvalidParams("split fraction must lie in (0, 1)");

  const auto& events = net.events();
  const std::int64_t n_events = net.num_events();
  const std::int64_t n_remove = std::llround(fraction * static_cast<double>(n_events));

  // Random spanning forest of the undirected projection: edges visited in a
  // seeded shuffle order, forest edges fixed, the rest removable.
  std::vector<std::int64_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  Rng forest_rng(mix_seed(seed, fnv1a64("split/forest")));
  for (std::size_t k = order.size(); k > 1; --k)
    std::swap(order[k - 1], order[forest_rng.uniform_index(k)]);

  UnionFind uf(net.num_targets() + net.num_sources());
  std::vector<std::int64_t> removable;
  for (std::int64_t idx : order) {
    const Event& e = events[static_cast<std::size_t>(idx)];
    if (!uf.unite(e.target, net.num_targets() + e.source)) removable.push_back(idx);
  }

  if (static_cast<std::int64_t>(removable.size()) < n_remove)
    throw InsufficientRemovableEdges(
        "requested " + std::to_string(n_remove) + " removals but only " +
        std::to_string(removable.size()) + " edges lie outside the spanning forest");

  // Uniform choice among removable edges; sort for a canonical draw order.
  std::sort(removable.begin(), removable.end());
  Rng pick_rng(mix_seed(seed, fnv1a64("split/pick")));
  for (std::int64_t k = 0; k < n_remove; ++k) {
    const auto r = k + static_cast<std::int64_t>(
                           pick_rng.uniform_index(removable.size() - k));
    std::swap(removable[k], removable[r]);
  }

  std::vector<char> removed(events.size(), 0);
  SplitResult out;
  out.fraction = fraction;
  out.seed = seed;
  out.test_positives.reserve(static_cast<std::size_t>(n_remove));
  for (std::int64_t k = 0; k < n_remove; ++k)
    removed[static_cast<std::size_t>(removable[k])] = 1;
  std::vector<Event> train_events;
  train_events.reserve(events.size() - static_cast<std::size_t>(n_remove));
  for (std::size_t idx = 0; idx < events.size(); ++idx) {
    if (removed[idx])
      out.test_positives.push_back(events[idx]);
    else
      train_events.push_back(events[idx]);
  }
  out.train = net.with_events(std::move(train_events));

  std::unordered_set<std::int64_t> exclude;  // events already excluded by sampler
  out.test_negatives = sample_negatives(net, n_remove, exclude,
                                        mix_seed(seed, fnv1a64("split/neg")));
  return out;
}

std::vector<Dyad> sample_negatives(const SingleEventNetwork& net, std::int64_t count,
                                   const std::unordered_set<std::int64_t>& exclude,
                                   std::uint64_t seed) {
  const int n_targets = net.num_targets();

  // Population: admissible dyads minus strictly-admissible events minus the
  // admissible part of the exclude set.
  std::int64_t population = net.total_admissible();
  for (const Event& e : net.events())
    if (net.source_time(e.source) > net.target_time(e.target)) --population;
  for (std::int64_t key : exclude) {
    const int i = static_cast<int>(key >> 32);
    const int j = static_cast<int>(key & 0xffffffff);
    if (i < 0 || i >= n_targets || j < 0 || j >= net.num_sources()) continue;
    if (net.source_time(j) > net.target_time(i) && !net.has_event(i, j)) --population;
  }

  if (count > population)
    throw NotEnoughNegatives("requested " + std::to_string(count) +
                             " negatives from a population of " +
                             std::to_string(population));

  std::vector<Dyad> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 0) return out;

  Rng rng(seed);
  auto admissible_at = [&](int i, std::int64_t offset) {
    return net.sources_by_time()[net.first_admissible(i) + offset];
  };

  // Prefix sums over per-target admissible counts map a uniform draw in
  // [0, total) onto a dyad.
  std::vector<std::int64_t> prefix(n_targets + 1, 0);
  for (int i = 0; i < n_targets; ++i)
    prefix[i + 1] = prefix[i] + net.admissible_count(i);
  const std::int64_t total = prefix[n_targets];

  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(count) * 2);

  if (count * 2 > population) {
    // Dense request: enumerate the population and partial-shuffle.
    std::vector<Dyad> pool;
    pool.reserve(static_cast<std::size_t>(population));
    for (int i = 0; i < n_targets; ++i) {
      for (std::int64_t o = 0; o < net.admissible_count(i); ++o) {
        const int j = admissible_at(i, o);
        if (net.has_event(i, j)) continue;
        if (exclude.count(dyad_key(i, j))) continue;
        pool.push_back({i, j});
      }
    }
    for (std::int64_t k = 0; k < count; ++k) {
      const auto r = k + static_cast<std::int64_t>(rng.uniform_index(pool.size() - k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(r)]);
      out.push_back(pool[static_cast<std::size_t>(k)]);
    }
    return out;
  }

  while (static_cast<std::int64_t>(out.size()) < count) {
    const auto r = static_cast<std::int64_t>(rng.uniform_index(total));
    const int i = static_cast<int>(
        std::upper_bound(prefix.begin(), prefix.end(), r) - prefix.begin() - 1);
    const int j = admissible_at(i, r - prefix[i]);
    const std::int64_t key = dyad_key(i, j);
    if (net.has_event(i, j) || exclude.count(key) || chosen.count(key)) continue;
    chosen.insert(key);
    out.push_back({i, j});
  }
  return out;
}

void save_split_manifest(const SplitResult& split, const std::string& path) {
  json doc;
  doc["seed"] = split.seed;
  doc["fraction"] = split.fraction;
  doc["horizon"] = split.train.horizon();
  json pos = json::array();
  for (const Event& e : split.test_positives) {
    pos.push_back({{"target", split.train.target_id(e.target)},
                   {"source", split.train.source_id(e.source)},
                   {"time", e.time}});
  }
  doc["positives"] = std::move(pos);
  json neg = json::array();
  for (const Dyad& d : split.test_negatives) {
    neg.push_back({{"target", split.train.target_id(d.target)},
                   {"source", split.train.source_id(d.source)}});
  }
  doc["negatives"] = std::move(neg);
  write_file(path, doc.dump(2) + "\n");
}

SplitManifest load_split_manifest(const std::string& path) {
  const auto doc = json::parse(read_file(path));
  SplitManifest m;
  m.seed = doc.at("seed").get<std::uint64_t>();
  m.fraction = doc.at("fraction").get<double>();
  m.horizon = doc.at("horizon").get<double>();
  for (const auto& p : doc.at("positives")) {
    m.positives.emplace_back(p.at("target").get<std::string>(),
                             p.at("source").get<std::string>());
    m.positive_times.push_back(p.at("time").get<double>());
  }
  for (const auto& p : doc.at("negatives")) {
    m.negatives.emplace_back(p.at("target").get<std::string>(),
                             p.at("source").get<std::string>());
  }
  return m;
}

std::vector<Dyad> resolve_dyads(
    const SingleEventNetwork& net,
    const std::vector<std::pair<std::string, std::string>>& ids) {
  std::unordered_map<std::string, int> target_idx;
  for (int i = 0; i < net.num_targets(); ++i) target_idx[net.target_id(i)] = i;
  std::unordered_map<std::string, int> source_idx;
  for (int j = 0; j < net.num_sources(); ++j) source_idx[net.source_id(j)] = j;

  std::vector<Dyad> out;
  out.reserve(ids.size());
  for (const auto& [t, s] : ids) {
    const auto ti = target_idx.find(t);
    const auto si = source_idx.find(s);
    if (ti == target_idx.end() || si == source_idx.end())
      throw ParseError("split manifest references unknown node (" + t + ", " + s + ")");
    out.push_back({ti->second, si->second});
  }
  return out;
}

}  // namespace sen
