#pragma once
// Parsers for the TSV inputs (triples, rdf:type assertions, class hierarchy
// edges) and writers/readers for every emitted artifact.
//
// Embedding matrix file layout (little-endian, 25-byte header):
//   bytes 0..7   magic "SEMKGE1\0"
//   bytes 8..15  u64 rows
//   bytes 16..23 u64 cols (logical dimension)
//   byte  24     u8 dtype tag: 0 = real64, 1 = complex as (re, im) f64 pairs
//   payload      row-major f64; complex rows hold 2*cols doubles
//
// Dictionaries are emitted as "id<TAB>string" TSV, partition plans as
// "triple_index<TAB>partition_id" TSV plus a JSON-lines meta file with one
// object per partition: {id, label, size, classes}.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semkge/error.hpp"
#include "semkge/models.hpp"
#include "semkge/partition.hpp"
#include "semkge/triple_store.hpp"

namespace semkge {

namespace detail {

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  return in;
}

// Invokes fn(line_number, fields) for every non-blank line.
template <typename Fn>
void for_each_tsv_row(const std::filesystem::path& path, std::size_t expect_fields, Fn&& fn) {
  std::ifstream in = open_text(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != expect_fields) {
      fail(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(expect_fields) + " tab-separated fields, got " +
                            std::to_string(fields.size()));
    }
    for (std::string& f : fields) f = trim(f);
    fn(line_no, fields);
  }
}

}  // namespace detail

inline std::vector<RawTriple> parse_triple_file(const std::filesystem::path& path) {
  std::vector<RawTriple> out;
  detail::for_each_tsv_row(path, 3, [&](std::size_t, std::vector<std::string>& f) {
    out.push_back(RawTriple{std::move(f[0]), std::move(f[1]), std::move(f[2])});
  });
  return out;
}

// (entity, class) assertions; duplicates and multi-label entities preserved.
inline std::vector<std::pair<std::string, std::string>> parse_type_file(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  detail::for_each_tsv_row(path, 2, [&](std::size_t, std::vector<std::string>& f) {
    out.emplace_back(std::move(f[0]), std::move(f[1]));
  });
  return out;
}

// (subclass, superclass) edges; a self-edge is rejected.
inline std::vector<std::pair<std::string, std::string>> parse_hierarchy_file(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  detail::for_each_tsv_row(path, 2, [&](std::size_t line_no, std::vector<std::string>& f) {
    if (f[0] == f[1]) {
      fail(Errc::self_subclass,
           path.string() + ":" + std::to_string(line_no) + ": class is its own subclass: " + f[0]);
    }
    out.emplace_back(std::move(f[0]), std::move(f[1]));
  });
  return out;
}

struct DatasetLayout {
  std::filesystem::path train;
  std::filesystem::path valid;      // optional
  std::filesystem::path test;       // optional
  std::filesystem::path types;      // optional
  std::filesystem::path hierarchy;  // optional

  bool has_types() const { return !types.empty(); }
  bool has_hierarchy() const { return !hierarchy.empty(); }

  // Standard file names under a dataset directory; train.txt must exist.
  static DatasetLayout at(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    DatasetLayout d;
    d.train = dir / "train.txt";
    if (!fs::exists(d.train)) fail(Errc::io, "missing train file: " + d.train.string());
    auto optional = [&](const char* name) {
      fs::path p = dir / name;
      return fs::exists(p) ? p : fs::path{};
    };
    d.valid = optional("valid.txt");
    d.test = optional("test.txt");
    d.types = optional("types.txt");
    d.hierarchy = optional("hierarchy.txt");
    return d;
  }
};

inline TripleStore load_dataset(const DatasetLayout& layout) {
  std::vector<RawTriple> train = parse_triple_file(layout.train);
  std::vector<RawTriple> valid, test;
  if (!layout.valid.empty()) valid = parse_triple_file(layout.valid);
  if (!layout.test.empty()) test = parse_triple_file(layout.test);
  return TripleStore::from_splits(train, valid, test);
}

// --- binary matrix files ------------------------------------------------------

inline constexpr char kMatrixMagic[8] = {'S', 'E', 'M', 'K', 'G', 'E', '1', '\0'};

struct MatrixFile {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  Dtype dtype = Dtype::real64;
  std::vector<double> data;  // rows * cols * (dtype == complex128 ? 2 : 1)
};

inline void write_matrix(const std::filesystem::path& path, std::uint64_t rows, std::uint64_t cols,
                         Dtype dtype, std::span<const double> data) {
  const std::uint64_t width = dtype == Dtype::complex128 ? 2 * cols : cols;
  if (data.size() != rows * width)
    fail(Errc::invalid_argument, "matrix payload size does not match header for " + path.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot create " + path.string());
  out.write(kMatrixMagic, 8);
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  const std::uint8_t tag = static_cast<std::uint8_t>(dtype);
  out.write(reinterpret_cast<const char*>(&tag), 1);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

inline MatrixFile read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0)
    fail(Errc::parse, path.string() + ": bad magic, not an embedding matrix file");
  MatrixFile m;
  std::uint8_t tag = 0;
  in.read(reinterpret_cast<char*>(&m.rows), 8);
  in.read(reinterpret_cast<char*>(&m.cols), 8);
  in.read(reinterpret_cast<char*>(&tag), 1);
  if (!in || tag > 1) fail(Errc::parse, path.string() + ": bad matrix header");
  m.dtype = static_cast<Dtype>(tag);
  const std::uint64_t width = m.dtype == Dtype::complex128 ? 2 * m.cols : m.cols;
  m.data.resize(m.rows * width);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!in) fail(Errc::parse, path.string() + ": truncated matrix payload");
  return m;
}

inline void write_dict_tsv(const std::filesystem::path& path, const Dictionary& dict) {
  std::ofstream out(path, std::ios::binary);  // binary: keep \n exact on all platforms
  if (!out) fail(Errc::io, "cannot create " + path.string());
  const auto& strings = dict.strings();
  for (std::size_t i = 0; i < strings.size(); ++i) out << i << '\t' << strings[i] << '\n';
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

inline Dictionary read_dict_tsv(const std::filesystem::path& path) {
  Dictionary dict;
  detail::for_each_tsv_row(path, 2, [&](std::size_t line_no, std::vector<std::string>& f) {
    const std::uint32_t id = dict.get_or_add(f[1]);
    if (std::to_string(id) != f[0]) {
      fail(Errc::parse, path.string() + ":" + std::to_string(line_no) +
                            ": non-dense or duplicated dictionary ids");
    }
  });
  return dict;
}

// Writes entity_embeddings.bin, relation_embeddings.bin, entity_dict.tsv,
// relation_dict.tsv into dir (created if needed).
inline void write_embeddings(const EmbeddingTable& table, const Dictionary& entities,
                             const Dictionary& relations, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "entity_embeddings.bin", table.num_entities(), table.dim(), table.dtype(),
               table.entity_data());
  write_matrix(dir / "relation_embeddings.bin", table.num_relations(), table.dim(), table.dtype(),
               table.relation_data());
  write_dict_tsv(dir / "entity_dict.tsv", entities);
  write_dict_tsv(dir / "relation_dict.tsv", relations);
}

inline EmbeddingTable read_embeddings(const std::filesystem::path& dir) {
  MatrixFile ent = read_matrix(dir / "entity_embeddings.bin");
  MatrixFile rel = read_matrix(dir / "relation_embeddings.bin");
  if (ent.cols != rel.cols || ent.dtype != rel.dtype)
    fail(Errc::parse, "entity and relation matrices disagree on dim or dtype in " + dir.string());
  EmbeddingTable table(ent.rows, rel.rows, ent.cols, ent.dtype);
  std::copy(ent.data.begin(), ent.data.end(), table.entity_data().begin());
  std::copy(rel.data.begin(), rel.data.end(), table.relation_data().begin());
  return table;
}

// --- partition plan files ------------------------------------------------------

inline void write_plan(const PartitionPlan& plan, const ClassHierarchy* hierarchy,
                       const std::filesystem::path& tsv_path,
                       const std::filesystem::path& meta_path) {
  std::ofstream tsv(tsv_path, std::ios::binary);
  if (!tsv) fail(Errc::io, "cannot create " + tsv_path.string());
  for (std::size_t i = 0; i < plan.assignment.size(); ++i)
    tsv << i << '\t' << plan.assignment[i] << '\n';
  if (!tsv) fail(Errc::io, "write failed: " + tsv_path.string());

  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) fail(Errc::io, "cannot create " + meta_path.string());
  for (std::uint32_t p = 0; p < plan.num_partitions; ++p) {
    const PartitionMeta& m = plan.meta[p];
    nlohmann::json obj;
    obj["id"] = p;
    obj["label"] = m.label;
    obj["size"] = m.size;
    nlohmann::json classes = nlohmann::json::array();
    for (ClassId c : m.classes)
      classes.push_back(hierarchy ? hierarchy->classes().at(c) : std::to_string(c));
    obj["classes"] = std::move(classes);
    meta << obj.dump() << '\n';
  }
  if (!meta) fail(Errc::io, "write failed: " + meta_path.string());
}

// Strategy provenance is not part of the two pinned file formats; a plan read
// back counts as semantic iff any partition lists member classes.
inline PartitionPlan read_plan(const std::filesystem::path& tsv_path,
                               const std::filesystem::path& meta_path) {
  PartitionPlan plan;
  std::vector<PartitionMeta> metas;
  {
    std::ifstream meta = detail::open_text(meta_path);
    std::string line;
    std::size_t line_no = 0;
    bool any_classes = false;
    while (std::getline(meta, line)) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.contains("id") || !obj.contains("label") ||
          !obj.contains("size")) {
        fail(Errc::parse, meta_path.string() + ":" + std::to_string(line_no) +
                              ": malformed partition meta object");
      }
      if (obj["id"].get<std::size_t>() != metas.size())
        fail(Errc::parse, meta_path.string() + ": partition ids must be dense and in order");
      PartitionMeta m;
      m.label = obj["label"].get<std::string>();
      m.size = obj["size"].get<std::uint64_t>();
      if (obj.contains("classes") && !obj["classes"].empty()) any_classes = true;
      metas.push_back(std::move(m));
    }
    plan.strategy = any_classes ? PartitionStrategy::semantic : PartitionStrategy::random;
  }
  plan.num_partitions = static_cast<std::uint32_t>(metas.size());
  plan.meta = std::move(metas);

  detail::for_each_tsv_row(tsv_path, 2, [&](std::size_t line_no, std::vector<std::string>& f) {
    std::size_t index = 0, part = 0;
    try {
      index = std::stoull(f[0]);
      part = std::stoull(f[1]);
    } catch (const std::exception&) {
      fail(Errc::parse, tsv_path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (index != plan.assignment.size())
      fail(Errc::parse, tsv_path.string() + ": triple indices must be dense and in order");
    if (part >= plan.num_partitions)
      fail(Errc::parse, tsv_path.string() + ":" + std::to_string(line_no) +
                            ": partition id out of range");
    plan.assignment.push_back(static_cast<std::uint32_t>(part));
  });
  return plan;
}

}  // namespace semkge
