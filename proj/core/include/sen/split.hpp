#ifndef SEN_SPLIT_HPP
#define SEN_SPLIT_HPP

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "sen/network.hpp"

namespace sen {

/// Held-out link-prediction split. The train network keeps every node and
/// the original horizon; test positives are the removed events and test
/// negatives an equal count of time-admissible never-linked dyads.
struct SplitResult {
  SingleEventNetwork train;
  std::vector<Event> test_positives;
  std::vector<Dyad> test_negatives;
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Removes round(fraction * |events|) events chosen uniformly among the
/// non-forest edges of a seeded random spanning forest of the undirected
/// projection, so the residual projection keeps every connected component
/// intact. Throws InsufficientRemovableEdges when the candidate set is too
/// small. Negatives are sampled uniformly from admissible non-dyads of the
/// full network.
SplitResult train_test_split(const SingleEventNetwork& net, double fraction,
                             std::uint64_t seed);

/// Uniform sample without replacement from {(i,j): source pub time > target
/// pub time} minus the network's events and the exclude set (dyad_key form).
/// Throws NotEnoughNegatives when count exceeds the population.
std::vector<Dyad> sample_negatives(const SingleEventNetwork& net,
                                   std::int64_t count,
                                   const std::unordered_set<std::int64_t>& exclude,
                                   std::uint64_t seed);

/// Number of components of the undirected projection over nodes that carry
/// at least one event.
int count_components(const SingleEventNetwork& net);

/// JSON manifest for a split: seed, fraction, horizon, dyad lists by id.
void save_split_manifest(const SplitResult& split, const std::string& path);

struct SplitManifest {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::vector<std::pair<std::string, std::string>> positives;  // (target, source)
  std::vector<double> positive_times;
  std::vector<std::pair<std::string, std::string>> negatives;
};

SplitManifest load_split_manifest(const std::string& path);

/// Maps manifest dyads onto a network's indices; unknown ids raise ParseError.
std::vector<Dyad> resolve_dyads(
    const SingleEventNetwork& net,
    const std::vector<std::pair<std::string, std::string>>& ids);

}  // namespace sen

#endif  // SEN_SPLIT_HPP
