#pragma once

#include <optional>
#include <string>
#include <vector>

#include "claimnet/csv.hpp"
#include "claimnet/date.hpp"
#include "claimnet/graph.hpp"

namespace claimnet {

enum class ClaimLabel : std::uint8_t { Fraud = 0, NonFraud = 1, Unknown = 2 };

inline constexpr const char* to_string(ClaimLabel l) {
  switch (l) {
    case ClaimLabel::Fraud: return "fraud";
    case ClaimLabel::NonFraud: return "nonfraud";
    case ClaimLabel::Unknown: return "unknown";
  }
  return "?";
}

inline std::optional<ClaimLabel> parse_claim_label(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "fraud" || lower == "yes") return ClaimLabel::Fraud;
  if (lower == "nonfraud" || lower == "non-fraud" || lower == "no") return ClaimLabel::NonFraud;
  if (lower == "unknown" || lower.empty()) return ClaimLabel::Unknown;
  return std::nullopt;
}

struct LabelRecord {
  std::string claim_id;
  ClaimLabel label = ClaimLabel::Unknown;
  std::optional<Date> filing_date;
};

// Per-claim labels and filing dates aligned to a graph's dense claim indices.
// Claims absent from the label input are Unknown with no filing date.
class LabelMap {
 public:
  LabelMap() = default;

  LabelMap(const BipartiteGraph& g, std::span<const LabelRecord> records)
      : labels_(g.claim_count(), ClaimLabel::Unknown), filing_(g.claim_count(), std::nullopt) {
    for (const LabelRecord& rec : records) {
      auto idx = g.find_claim(rec.claim_id);
      if (!idx) throw DataError("label references unknown claim id '" + rec.claim_id + "'");
      labels_[*idx] = rec.label;
      filing_[*idx] = rec.filing_date;
    }
  }

  std::size_t size() const { return labels_.size(); }

  ClaimLabel label(std::uint32_t claim) const { return labels_.at(claim); }
  std::optional<Date> filing_date(std::uint32_t claim) const { return filing_.at(claim); }

  const std::vector<ClaimLabel>& labels() const { return labels_; }

  std::size_t count(ClaimLabel l) const {
    std::size_t n = 0;
    for (ClaimLabel x : labels_) n += x == l;
    return n;
  }

  std::optional<Date> min_filing_date() const { return fold_filing(true); }
  std::optional<Date> max_filing_date() const { return fold_filing(false); }

 private:
  std::optional<Date> fold_filing(bool minimum) const {
    std::optional<Date> best;
    for (const auto& d : filing_) {
      if (!d) continue;
      if (!best || (minimum ? *d < *best : *best < *d)) best = d;
    }
    return best;
  }

  std::vector<ClaimLabel> labels_;
  std::vector<std::optional<Date>> filing_;
};

/// Reads `claim_id,label,filing_date` (filing_date may be empty).
inline std::vector<LabelRecord> load_label_csv(const std::string& path) {
  CsvReader reader(path);
  const std::size_t c_id = reader.require_column("claim_id");
  const std::size_t c_label = reader.require_column("label");
  const auto c_date = reader.column("filing_date");

  std::vector<LabelRecord> records;
  std::vector<std::string> f;
  while (reader.read_row(f)) {
    LabelRecord rec;
    rec.claim_id = f[c_id];
    auto label = parse_claim_label(f[c_label]);
    if (!label) {
      throw DataError("'" + path + "' row " + std::to_string(reader.row_number()) + ": unknown label '" +
                      f[c_label] + "'");
    }
    rec.label = *label;
    if (c_date && !f[*c_date].empty()) rec.filing_date = parse_date(f[*c_date]);
    records.push_back(std::move(rec));
  }
  return records;
}

inline void write_label_csv(const std::string& path, std::span<const LabelRecord> records) {
  CsvWriter w(path);
  w.write_row({"claim_id", "label", "filing_date"});
  for (const auto& rec : records) {
    w.write_row({rec.claim_id, to_string(rec.label), rec.filing_date ? format_date(*rec.filing_date) : ""});
  }
  w.close();
}

}  // namespace claimnet
