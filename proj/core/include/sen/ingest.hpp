#ifndef SEN_INGEST_HPP
#define SEN_INGEST_HPP

#include <functional>
#include <string>
#include <vector>

#include "sen/network.hpp"

namespace sen {

/// Query against the OpenAlex works endpoint: one concept filter, a date
/// window, and the citation threshold that defines target nodes.
struct IngestSpec {
  std::string concept_id;      // e.g. "C119857082"
  std::string from_date;       // ISO date, inclusive
  std::string to_date;
  int min_citations = 10;      // in-corpus threshold for target nodes
  int max_works = 10000;
  std::string polite_email;
  std::string cache_dir = "openalex-cache";
};

/// Editable starting points for the ML / physics / social-science corpora.
IngestSpec ingest_preset(const std::string& name);

struct WorkRecord {
  std::string id;
  double pub_time = 0.0;  // fractional years
  std::vector<std::string> referenced;
  long long cited_by_count = 0;
};

struct HttpResponse {
  int status = 0;  // <= 0 means transport failure
  std::string body;
};

/// Pluggable HTTP GET; the default performs TLS requests against
/// api.openalex.org. Tests inject canned responders.
using Transport = std::function<HttpResponse(const std::string& url)>;

struct FetchResult {
  std::vector<WorkRecord> records;
  int skipped = 0;        // malformed records dropped with a warning count
  int requests_made = 0;  // zero on a fully warm cache
};

/// Cursor-paginated retrieval with an on-disk page cache (line-delimited
/// JSON keyed by the request hash; the first line stores the cursor chain).
/// Requests are rate limited to 10/s with exponential backoff on 429/5xx;
/// persistent failures raise IngestError.
FetchResult fetch_works(const IngestSpec& spec, Transport transport = {});

struct BuildStats {
  int dropped_noncausal = 0;  // citing date precedes cited date (data noise)
};

/// Builds the citation network: targets are works with at least
/// spec.min_citations causally-valid in-corpus citations, sources the works
/// citing them, event time the citing work's publication date. Throws
/// EmptyNetwork when no work clears the threshold.
SingleEventNetwork build_sen(const std::vector<WorkRecord>& records,
                             const IngestSpec& spec, BuildStats* stats = nullptr);

/// "YYYY[-MM[-DD]]" to fractional years at day resolution; a missing day
/// defaults to mid-month, a missing month and day to July 1.
double date_to_fractional_year(std::string_view date);

}  // namespace sen

#endif  // SEN_INGEST_HPP
