#include "transrate/report.hpp"

#include <cstdio>

#include <json.hpp>

namespace transrate {

namespace {

// JSON is assembled by hand so numbers keep exactly 17 significant digits.
std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

std::string score_object(const TransferScore& s, const char* indent) {
  std::string out;
  out += indent;
  out += "{\"model\": " + quote(s.model_name) + ", \"method\": " + quote(s.method) +
         ", \"score\": " + format_double(s.value) +
         ", \"config_fingerprint\": " + quote(s.config_fingerprint) +
         ", \"n\": " + std::to_string(s.n) + ", \"d\": " + std::to_string(s.d) +
         ", \"classes\": " + std::to_string(s.num_classes) + "}";
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string scores_csv(std::span<const TransferScore> scores) {
  std::string out = "method,score\n";
  for (const auto& s : scores) out += s.method + "," + format_double(s.value) + "\n";
  return out;
}

std::string scores_json(std::span<const TransferScore> scores) {
  std::string out = "{\"scores\": [\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out += score_object(scores[i], "  ");
    out += i + 1 < scores.size() ? ",\n" : "\n";
  }
  out += "]}\n";
  return out;
}

std::string rankings_csv(std::span<const Ranking> rankings) {
  std::string out = "method,rank,model,score\n";
  for (const auto& r : rankings)
    for (const auto& e : r.entries)
      out += r.method + "," + std::to_string(e.rank) + "," + e.model_name + "," +
             format_double(e.score) + "\n";
  return out;
}

std::string rankings_json(std::span<const Ranking> rankings) {
  std::string out = "{\"rankings\": [\n";
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const auto& r = rankings[i];
    out += "  {\"method\": " + quote(r.method) +
           ", \"config_fingerprint\": " + quote(r.config_fingerprint) + ", \"entries\": [\n";
    for (std::size_t k = 0; k < r.entries.size(); ++k) {
      const auto& e = r.entries[k];
      out += "    {\"rank\": " + std::to_string(e.rank) + ", \"model\": " + quote(e.model_name) +
             ", \"score\": " + format_double(e.score) + "}";
      out += k + 1 < r.entries.size() ? ",\n" : "\n";
    }
    out += "  ]}";
    out += i + 1 < rankings.size() ? ",\n" : "\n";
  }
  out += "]}\n";
  return out;
}

std::string correlations_csv(std::span<const CorrelationReport> reports) {
  std::string out = "method,count,pearson,kendall_tau,weighted_tau\n";
  for (const auto& r : reports)
    out += r.method + "," + std::to_string(r.count) + "," + format_double(r.pearson) + "," +
           format_double(r.kendall_tau) + "," + format_double(r.weighted_tau) + "\n";
  return out;
}

std::string correlations_json(std::span<const CorrelationReport> reports) {
  std::string out = "{\"correlations\": [\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += "  {\"method\": " + quote(r.method) + ", \"count\": " + std::to_string(r.count) +
           ", \"pearson\": " + format_double(r.pearson) +
           ", \"kendall_tau\": " + format_double(r.kendall_tau) +
           ", \"weighted_tau\": " + format_double(r.weighted_tau) + "}";
    out += i + 1 < reports.size() ? ",\n" : "\n";
  }
  out += "]}\n";
  return out;
}

}  // namespace transrate
