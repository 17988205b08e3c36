#include "sen/checkpoint.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "sen/errors.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {

using json = nlohmann::ordered_json;
constexpr int kFormatVersion = 1;

json slice(const std::vector<double>& data, std::size_t lo, std::size_t n) {
  json arr = json::array();
  for (std::size_t s = 0; s < n; ++s) arr.push_back(data[lo + s]);
  return arr;
}

}  // namespace

void save_checkpoint(const ModelParameters& params, const SingleEventNetwork& net,
                     const std::string& path) {
  if (params.num_targets() != net.num_targets() ||
      params.num_sources() != net.num_sources())
    throw InvalidParams("checkpoint: parameter shape does not match the network");

  const std::size_t nz = static_cast<std::size_t>(params.num_targets()) * params.dim();
  const std::size_t nw = static_cast<std::size_t>(params.num_sources()) * params.dim();
  const std::size_t ni =
      static_cast<std::size_t>(params.num_targets()) * params.impact_slots_per_target();

  json doc;
  doc["format_version"] = kFormatVersion;
  doc["variant"] = model_variant_name(params.variant());
  doc["impact_family"] = impact_family_name(params.spec().family);
  doc["impact_kind"] = impact_kind_name(params.impact_kind());
  doc["dim"] = params.dim();
  doc["mixture_k"] = params.mixture_k();
  doc["horizon"] = params.horizon();
  doc["lower_bound"] = params.lower_bound();
  if (std::isfinite(params.upper_bound()))
    doc["upper_bound"] = params.upper_bound();
  else
    doc["upper_bound"] = nullptr;
  doc["n_targets"] = params.num_targets();
  doc["n_sources"] = params.num_sources();
  doc["target_ids"] = net.target_ids();
  doc["source_ids"] = net.source_ids();
  doc["z"] = slice(params.data(), params.offset_z(), nz);
  doc["w"] = slice(params.data(), params.offset_w(), nw);
  doc["alpha"] = slice(params.data(), params.offset_alpha(),
                       static_cast<std::size_t>(params.num_targets()));
  doc["beta"] = slice(params.data(), params.offset_beta(),
                      static_cast<std::size_t>(params.num_sources()));
  doc["impact"] = slice(params.data(), params.offset_impact(), ni);
  write_file(path, doc.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  const auto doc = json::parse(read_file(path));
  if (doc.at("format_version").get<int>() != kFormatVersion)
    throw ParseError("unsupported checkpoint format version");

  ModelSpec spec;
  spec.variant = model_variant_from_name(doc.at("variant").get<std::string>());
  spec.family = impact_family_from_name(doc.at("impact_family").get<std::string>());
  spec.dim = doc.at("dim").get<int>();
  const int mix_k = doc.at("mixture_k").get<int>();
  if (mix_k > 0) spec.mixture_k = mix_k;

  const int n_targets = doc.at("n_targets").get<int>();
  const int n_sources = doc.at("n_sources").get<int>();
  const double horizon = doc.at("horizon").get<double>();

  Checkpoint ck{ModelParameters(spec, n_targets, n_sources, horizon), {}, {}};
  ck.target_ids = doc.at("target_ids").get<std::vector<std::string>>();
  ck.source_ids = doc.at("source_ids").get<std::vector<std::string>>();
  if (static_cast<int>(ck.target_ids.size()) != n_targets ||
      static_cast<int>(ck.source_ids.size()) != n_sources)
    throw ParseError("checkpoint node id lists do not match the declared shape");

  auto fill = [&](const char* key, std::size_t off, std::size_t n) {
    const auto& arr = doc.at(key);
    if (arr.size() != n)
      throw ParseError(std::string("checkpoint field '") + key +
                       "' has unexpected length");
    for (std::size_t s = 0; s < n; ++s)
      ck.params.data()[off + s] = arr[s].get<double>();
  };
  fill("z", ck.params.offset_z(), static_cast<std::size_t>(n_targets) * spec.dim);
  fill("w", ck.params.offset_w(), static_cast<std::size_t>(n_sources) * spec.dim);
  fill("alpha", ck.params.offset_alpha(), static_cast<std::size_t>(n_targets));
  fill("beta", ck.params.offset_beta(), static_cast<std::size_t>(n_sources));
  fill("impact", ck.params.offset_impact(),
       static_cast<std::size_t>(n_targets) * ck.params.impact_slots_per_target());
  return ck;
}

}  // namespace sen
