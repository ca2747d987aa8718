#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "claimnet/csv.hpp"
#include "claimnet/graph.hpp"

namespace claimnet {

/// Reads `claim_id,party_id,party_kind[,weight][,is_company]`.
/// An empty weight field means 1; is_company accepts 0/1/true/false/yes/no.
inline std::vector<EdgeRecord> load_edge_csv(const std::string& path) {
  CsvReader reader(path);
  const std::size_t c_claim = reader.require_column("claim_id");
  const std::size_t c_party = reader.require_column("party_id");
  const std::size_t c_kind = reader.require_column("party_kind");
  const auto c_weight = reader.column("weight");
  const auto c_company = reader.column("is_company");

  std::vector<EdgeRecord> records;
  std::vector<std::string> f;
  while (reader.read_row(f)) {
    EdgeRecord rec;
    rec.claim_id = f[c_claim];
    rec.party_id = f[c_party];
    auto kind = parse_party_kind(f[c_kind]);
    if (!kind) {
      throw DataError("'" + path + "' row " + std::to_string(reader.row_number()) +
                      ": unknown party_kind '" + f[c_kind] + "'");
    }
    rec.party_kind = *kind;
    if (c_weight && !f[*c_weight].empty()) {
      rec.weight = parse_double(f[*c_weight], "weight");
    }
    if (c_company && !f[*c_company].empty()) {
      const std::string& v = f[*c_company];
      if (v == "1" || v == "true" || v == "yes") {
        rec.is_company = true;
      } else if (v == "0" || v == "false" || v == "no") {
        rec.is_company = false;
      } else {
        throw DataError("'" + path + "' row " + std::to_string(reader.row_number()) +
                        ": bad is_company value '" + v + "'");
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline void write_edge_csv(const std::string& path, std::span<const EdgeRecord> records) {
  CsvWriter w(path);
  w.write_row({"claim_id", "party_id", "party_kind", "weight"});
  for (const auto& rec : records) {
    w.write_row({rec.claim_id, rec.party_id, to_string(rec.party_kind), format_double(rec.weight)});
  }
  w.close();
}

namespace detail {

inline constexpr char kGraphMagic[8] = {'C', 'N', 'E', 'T', 'G', 'R', '4', '1'};

class Fnv1a {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001B3ull;
    }
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

class SnapshotWriter {
 public:
  explicit SnapshotWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
  }
  template <typename T>
  void put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    raw(&v, sizeof(T));
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  template <typename T>
  void put_vector(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    put(static_cast<std::uint64_t>(v.size()));
    raw(v.data(), v.size() * sizeof(T));
  }
  void finish() {
    const std::uint64_t digest = hash_.digest();
    out_.write(reinterpret_cast<const char*>(&digest), sizeof(digest));
    out_.close();
    if (!out_) throw IoError("failed writing graph snapshot");
  }

 private:
  void raw(const void* data, std::size_t n) {
    hash_.update(data, n);
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  std::ofstream out_;
  Fnv1a hash_;
};

class SnapshotReader {
 public:
  explicit SnapshotReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path + "' for reading");
  }
  template <typename T>
  T get() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  template <typename T>
  std::vector<T> get_vector() {
    const auto n = get<std::uint64_t>();
    if (n > (1ull << 33)) throw CorruptFileError("'" + path_ + "': implausible array length");
    std::vector<T> v(n);
    raw(v.data(), n * sizeof(T));
    return v;
  }
  void verify_checksum() {
    const std::uint64_t expected = hash_.digest();
    std::uint64_t stored = 0;
    in_.read(reinterpret_cast<char*>(&stored), sizeof(stored));
    if (!in_ || in_.gcount() != sizeof(stored)) {
      throw CorruptFileError("'" + path_ + "': truncated snapshot (missing checksum)");
    }
    if (stored != expected) throw CorruptFileError("'" + path_ + "': checksum mismatch");
  }

 private:
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_ || static_cast<std::size_t>(in_.gcount()) != n) {
      throw CorruptFileError("'" + path_ + "': truncated snapshot");
    }
    hash_.update(data, n);
  }
  std::string path_;
  std::ifstream in_;
  Fnv1a hash_;
};

}  // namespace detail

/// Versioned binary snapshot with an FNV-1a checksum trailer. The snapshot
/// stores the claim-oriented adjacency only; the mirror orientation and the
/// degrees are rebuilt on load.
inline void save_graph(const BipartiteGraph& g, const std::string& path) {
  detail::SnapshotWriter w(path);
  w.put(detail::kGraphMagic);
  w.put(static_cast<std::uint64_t>(g.claim_count()));
  w.put(static_cast<std::uint64_t>(g.party_count()));
  w.put(static_cast<std::uint64_t>(g.edge_count()));
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) w.put_string(g.claim_id(i));
  for (std::uint32_t j = 0; j < g.party_count(); ++j) {
    w.put_string(g.party_id(j));
    w.put(static_cast<std::uint8_t>(g.party_kind(j)));
    // tri-state: 0/1 explicit, 2 = not provided
    const std::int8_t raw = g.party_company_flag(j);
    w.put(static_cast<std::uint8_t>(raw < 0 ? 2 : raw));
  }
  for (std::uint32_t i = 0; i < g.claim_count(); ++i) {
    auto nbrs = g.claim_parties(i);
    auto ws = g.claim_party_weights(i);
    w.put(static_cast<std::uint32_t>(nbrs.size()));
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      w.put(nbrs[k]);
      w.put(ws[k]);
    }
  }
  w.finish();
}

inline BipartiteGraph load_graph(const std::string& path) {
  detail::SnapshotReader r(path);
  const auto magic = r.get<std::array<char, 8>>();
  if (std::memcmp(magic.data(), detail::kGraphMagic, 8) != 0) {
    throw CorruptFileError("'" + path + "': bad magic or unsupported snapshot version");
  }
  const auto n_claims = r.get<std::uint64_t>();
  const auto n_parties = r.get<std::uint64_t>();
  const auto n_edges = r.get<std::uint64_t>();
  if (n_claims > (1ull << 32) || n_parties > (1ull << 32)) {
    throw CorruptFileError("'" + path + "': implausible node counts");
  }

  std::vector<std::string> claim_ids(n_claims);
  for (auto& s : claim_ids) s = r.get_string();
  std::vector<std::string> party_ids(n_parties);
  std::vector<PartyKind> kinds(n_parties);
  std::vector<std::uint8_t> company(n_parties);
  for (std::uint64_t j = 0; j < n_parties; ++j) {
    party_ids[j] = r.get_string();
    const auto k = r.get<std::uint8_t>();
    if (k > 3) throw CorruptFileError("'" + path + "': bad party kind");
    kinds[j] = static_cast<PartyKind>(k);
    company[j] = r.get<std::uint8_t>();
    if (company[j] > 2) throw CorruptFileError("'" + path + "': bad company flag");
  }

  std::vector<EdgeRecord> records;
  records.reserve(n_edges);
  for (std::uint64_t i = 0; i < n_claims; ++i) {
    const auto deg = r.get<std::uint32_t>();
    for (std::uint32_t k = 0; k < deg; ++k) {
      const auto j = r.get<std::uint32_t>();
      const auto wt = r.get<double>();
      if (j >= n_parties) throw CorruptFileError("'" + path + "': edge references unknown party");
      EdgeRecord rec{claim_ids[i], party_ids[j], kinds[j], wt, std::nullopt};
      if (company[j] != 2) rec.is_company = company[j] == 1;
      records.push_back(std::move(rec));
    }
  }
  r.verify_checksum();
  if (records.size() != n_edges) throw CorruptFileError("'" + path + "': edge count mismatch");
  return build_graph(records);
}

}  // namespace claimnet
