#ifndef SEN_CHECKPOINT_HPP
#define SEN_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "sen/model.hpp"

namespace sen {

/// A fitted model with the node identities its rows refer to. Serialized as
/// versioned JSON (`*.disee.json`): header fields (format version, variant,
/// impact kind, dim, horizon, bounds, node ids) plus flat parameter arrays.
struct Checkpoint {
  ModelParameters params;
  std::vector<std::string> target_ids;
  std::vector<std::string> source_ids;
};

void save_checkpoint(const ModelParameters& params, const SingleEventNetwork& net,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sen

#endif  // SEN_CHECKPOINT_HPP
