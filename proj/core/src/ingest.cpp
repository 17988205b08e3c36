#include "sen/ingest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#ifdef SEN_HAVE_OPENSSL
#include <httplib.h>
#endif

#include "sen/errors.hpp"
#include "sen/random.hpp"
#include "sen/text_io.hpp"

namespace sen {

namespace {

using json = nlohmann::json;

constexpr const char* kHost = "https://api.openalex.org";
constexpr int kPerPage = 200;
constexpr int kMaxRetries = 5;
constexpr auto kMinRequestGap = std::chrono::milliseconds(100);  // <= 10 req/s

std::string build_url(const IngestSpec& spec, const std::string& cursor) {
  std::ostringstream url;
  url << "/works?filter=concepts.id:" << spec.concept_id;
  if (!spec.from_date.empty()) url << ",from_publication_date:" << spec.from_date;
  if (!spec.to_date.empty()) url << ",to_publication_date:" << spec.to_date;
  url << "&select=id,publication_date,referenced_works,cited_by_count";
  url << "&per-page=" << kPerPage;
  url << "&cursor=" << cursor;
  if (!spec.polite_email.empty()) url << "&mailto=" << spec.polite_email;
  return url.str();
}

std::string cache_path(const IngestSpec& spec, const std::string& url) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(url)));
  return (std::filesystem::path(spec.cache_dir) / (std::string(hex) + ".jsonl"))
      .string();
}

struct Page {
  std::string next_cursor;  // empty when the listing is exhausted
  std::vector<json> works;
};

Page parse_response_body(const std::string& body) {
  Page page;
  const auto doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw IngestError("unparseable response body");
  if (doc.contains("meta") && doc["meta"].contains("next_cursor") &&
      doc["meta"]["next_cursor"].is_string())
    page.next_cursor = doc["meta"]["next_cursor"].get<std::string>();
  if (!doc.contains("results") || !doc["results"].is_array())
    throw IngestError("response body has no results array");
  for (const auto& work : doc["results"]) page.works.push_back(work);
  return page;
}

void write_cache(const std::string& path, const std::string& url, const Page& page) {
  std::ostringstream out;
  json meta;
  meta["url"] = url;
  meta["next_cursor"] = page.next_cursor;
  out << meta.dump() << '\n';
  for (const auto& work : page.works) out << work.dump() << '\n';
  write_file(path, out.str());
}

bool read_cache(const std::string& path, Page* page) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line)) return false;
  const auto meta = json::parse(line, nullptr, false);
  if (meta.is_discarded()) return false;
  page->next_cursor = meta.value("next_cursor", std::string());
  page->works.clear();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto work = json::parse(line, nullptr, false);
    if (work.is_discarded()) return false;
    page->works.push_back(std::move(work));
  }
  return true;
}

#ifdef SEN_HAVE_OPENSSL
HttpResponse https_get(const std::string& url) {
  httplib::Client client(kHost);
  client.set_connection_timeout(15);
  client.set_read_timeout(60);
  client.set_follow_location(true);
  const auto res = client.Get(url);
  if (!res) return {0, {}};
  return {res->status, res->body};
}
#else
HttpResponse https_get(const std::string&) {
  throw IngestError("library built without TLS support; supply a transport");
}
#endif

// Converts one raw work object; false when required fields are missing.
bool parse_work(const json& work, WorkRecord* record) {
  if (!work.contains("id") || !work["id"].is_string()) return false;
  record->id = work["id"].get<std::string>();
  if (record->id.empty()) return false;
  if (!work.contains("publication_date") || !work["publication_date"].is_string())
    return false;
  try {
    record->pub_time = date_to_fractional_year(work["publication_date"].get<std::string>());
  } catch (const ParseError&) {
    return false;
  }
  record->referenced.clear();
  if (work.contains("referenced_works") && work["referenced_works"].is_array())
    for (const auto& ref : work["referenced_works"])
      if (ref.is_string()) record->referenced.push_back(ref.get<std::string>());
  record->cited_by_count = 0;
  if (work.contains("cited_by_count") && work["cited_by_count"].is_number())
    record->cited_by_count = work["cited_by_count"].get<long long>();
  return true;
}

}  // namespace

double date_to_fractional_year(std::string_view date) {
  const auto fields = split_fields(date, '-');
  if (fields.empty() || fields.size() > 3)
    throw ParseError("invalid date: " + std::string(date));
  const auto year_v = parse_double(fields[0]);
  if (!year_v || *year_v != std::floor(*year_v))
    throw ParseError("invalid year in date: " + std::string(date));
  const int year = static_cast<int>(*year_v);

  int month = 7, day = 1;  // missing month and day: July 1
  if (fields.size() >= 2) {
    const auto m = parse_double(fields[1]);
    if (!m || *m < 1 || *m > 12) throw ParseError("invalid month: " + std::string(date));
    month = static_cast<int>(*m);
    day = 15;  // missing day: mid-month
  }
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const int month_days = kDays[month - 1] + (leap && month == 2 ? 1 : 0);
  if (fields.size() == 3) {
    const auto d = parse_double(fields[2]);
    if (!d || *d < 1 || *d > month_days)
      throw ParseError("invalid day: " + std::string(date));
    day = static_cast<int>(*d);
  }
  int day_of_year = day - 1;
  for (int m = 1; m < month; ++m)
    day_of_year += kDays[m - 1] + (leap && m == 2 ? 1 : 0);
  const double year_len = leap ? 366.0 : 365.0;
  return static_cast<double>(year) + (day_of_year + 0.5) / year_len;
}

IngestSpec ingest_preset(const std::string& name) {
  // Concept ids and windows are starting points, not a reproduction recipe.
  IngestSpec spec;
  if (name == "ml") {
    spec.concept_id = "C119857082";
    spec.from_date = "1990-01-01";
    spec.to_date = "2023-12-31";
    return spec;
  }
  if (name == "phys") {
    spec.concept_id = "C121332964";
    spec.from_date = "1980-01-01";
    spec.to_date = "2023-12-31";
    return spec;
  }
  if (name == "sosci") {
    spec.concept_id = "C144024400";
    spec.from_date = "1980-01-01";
    spec.to_date = "2023-12-31";
    return spec;
  }
  throw InvalidParams("unknown ingest preset: " + name);
}

FetchResult fetch_works(const IngestSpec& spec, Transport transport) {
  if (spec.concept_id.empty()) throw InvalidParams("ingest: concept_id is required");
  if (spec.min_citations < 0) throw InvalidParams("ingest: min_citations must be >= 0");
  if (!spec.from_date.empty() && !spec.to_date.empty() && spec.from_date > spec.to_date)
    throw InvalidParams("ingest: from_date must not exceed to_date");
  if (!transport) transport = https_get;
  std::filesystem::create_directories(spec.cache_dir);

  FetchResult result;
  std::string cursor = "*";
  auto last_request = std::chrono::steady_clock::now() - kMinRequestGap;

  while (!cursor.empty() &&
         static_cast<int>(result.records.size()) < spec.max_works) {
    const std::string url = build_url(spec, cursor);
    const std::string path = cache_path(spec, url);

    Page page;
    if (!read_cache(path, &page)) {
      HttpResponse response;
      int attempt = 0;
      for (;;) {
        const auto gap = std::chrono::steady_clock::now() - last_request;
        if (gap < kMinRequestGap) std::this_thread::sleep_for(kMinRequestGap - gap);
        last_request = std::chrono::steady_clock::now();
        response = transport(url);
        ++result.requests_made;
        if (response.status == 200) break;
        const bool retryable =
            response.status <= 0 || response.status == 429 || response.status >= 500;
        if (!retryable || ++attempt >= kMaxRetries)
          throw IngestError("request failed with status " +
                            std::to_string(response.status) + ": " + url);
        std::this_thread::sleep_for(std::chrono::milliseconds(500 << (attempt - 1)));
      }
      page = parse_response_body(response.body);
      write_cache(path, url, page);
    }

    for (const auto& work : page.works) {
      if (static_cast<int>(result.records.size()) >= spec.max_works) break;
      WorkRecord record;
      if (parse_work(work, &record))
        result.records.push_back(std::move(record));
      else
        ++result.skipped;
    }
    if (page.works.empty()) break;  // defensive: empty page ends the listing
    cursor = page.next_cursor;
  }
  return result;
}

SingleEventNetwork build_sen(const std::vector<WorkRecord>& records,
                             const IngestSpec& spec, BuildStats* stats) {
  std::unordered_map<std::string, int> corpus;
  corpus.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k)
    corpus.emplace(records[k].id, static_cast<int>(k));

  // Causally-valid in-corpus citations per work; self references and edges
  // whose citing date precedes the cited date are noise and never emitted.
  int dropped = 0;
  std::unordered_map<std::string, int> incoming;
  for (const auto& citing : records) {
    std::unordered_set<std::string> seen;  // dedupe repeated references
    for (const auto& ref : citing.referenced) {
      const auto it = corpus.find(ref);
      if (it == corpus.end() || !seen.insert(ref).second) continue;
      if (ref == citing.id || citing.pub_time < records[it->second].pub_time) {
        ++dropped;
        continue;
      }
      ++incoming[ref];
    }
  }
  if (stats) stats->dropped_noncausal = dropped;

  NetworkData data;
  std::unordered_map<std::string, int> target_of;
  for (const auto& record : records) {
    const auto it = incoming.find(record.id);
    if (it == incoming.end() || it->second < spec.min_citations) continue;
    target_of.emplace(record.id, static_cast<int>(data.target_ids.size()));
    data.target_ids.push_back(record.id);
    data.target_times.push_back(record.pub_time);
  }
  if (data.target_ids.empty())
    throw EmptyNetwork("no work reaches " + std::to_string(spec.min_citations) +
                       " in-corpus citations");

  std::unordered_map<std::string, int> source_of;
  for (const auto& citing : records) {
    std::unordered_set<std::string> seen;
    for (const auto& ref : citing.referenced) {
      const auto target_it = target_of.find(ref);
      if (target_it == target_of.end() || !seen.insert(ref).second) continue;
      if (ref == citing.id) continue;
      const int cited_idx = corpus.at(ref);
      if (citing.pub_time < records[cited_idx].pub_time) continue;
      auto [src_it, fresh] =
          source_of.emplace(citing.id, static_cast<int>(data.source_ids.size()));
      if (fresh) {
        data.source_ids.push_back(citing.id);
        data.source_times.push_back(citing.pub_time);
      }
      data.events.push_back({target_it->second, src_it->second, citing.pub_time});
    }
  }
  return SingleEventNetwork::build(std::move(data));
}

}  // namespace sen
