#pragma once

// Content-addressed archive of graph iterations and increments, stored under
// a `.sgv/` directory.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sysgraph/graph.hpp"
#include "sysgraph/increment.hpp"

namespace sysgraph {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kRecordSchemaVersion = 1;
inline constexpr const char* kDigestAlgorithm = "sha256";

// Lowercase hex SHA-256 of canonical_text(g).
std::string graph_digest(const SystemGraph& g);
std::string sha256_hex(const std::string& bytes);

enum class RecordKind { origin, refinement, horizontal_increment, vertical_increment };

std::string to_string(RecordKind k);
RecordKind record_kind_from_string(const std::string& s);  // ModelError("usage")

struct PropertyLabel {
  std::string formula;
  bool holds = false;
  std::string checker = std::string("sysgraph ") + kToolVersion;

  bool operator==(const PropertyLabel&) const = default;
};

struct RefinementInfo {
  std::string mode;  // bisimulation | simulation
  bool holds = false;

  bool operator==(const RefinementInfo&) const = default;
};

struct VersionRecord {
  std::string id;
  std::string algorithm = kDigestAlgorithm;
  std::string graph;  // graph name, which names the lineage
  RecordKind kind = RecordKind::origin;
  std::vector<std::string> parents;
  std::vector<PropertyLabel> labels;
  std::optional<RefinementInfo> refinement;
  std::map<std::string, std::string> metadata;  // e.g. embed renames
  bool refinable = false;
  std::string timestamp;  // ISO-8601 UTC

  bool operator==(const VersionRecord&) const = default;
};

struct ArchiveRequest {
  RecordKind kind = RecordKind::origin;
  // Empty: the current head of the lineage, when there is one.
  std::vector<std::string> parents;
  std::vector<PropertyLabel> labels;
  std::optional<RefinementInfo> refinement;
  std::map<std::string, std::string> metadata;
  std::string timestamp;  // empty: now
};

class VersionStore {
 public:
  // `root` is the `.sgv` directory; it is created on first archive.
  explicit VersionStore(std::filesystem::path root);

  // Locates `.sgv` next to a model file.
  static VersionStore beside(const std::filesystem::path& model_file);

  const std::filesystem::path& root() const { return root_; }

  // Idempotent: archiving identical content returns the stored record and
  // only adds labels it did not have. Throws ModelError("dangling-parent"),
  // ModelError("refinement") when a refinement record lacks its verdict,
  // ModelError("io") on storage failure.
  VersionRecord archive(const SystemGraph& g, const ArchiveRequest& req);

  // Verifies the digest of the stored graph; ModelError("corrupt") on a
  // mismatch.
  std::optional<VersionRecord> get(const std::string& id) const;
  // Accepts a unique id prefix.
  std::optional<std::string> resolve(const std::string& id_or_prefix) const;
  SystemGraph graph(const std::string& id) const;
  std::vector<VersionRecord> all() const;

  std::optional<std::string> head(const std::string& lineage) const;
  // Newest first along first parents within the lineage.
  std::vector<VersionRecord> log(const std::string& lineage) const;
  // Records whose labels mention exactly this formula text.
  std::vector<VersionRecord> with_property(const std::string& formula) const;

  // True when a record of another lineage lists a record of this one as a
  // parent.
  bool is_dependent(const std::string& lineage) const;
  NextMove next_move(const SystemGraph& g) const;

  // Recomputes every digest and checks that parent links are acyclic and
  // resolve. Returns one message per problem.
  std::vector<std::string> verify() const;

 private:
  std::filesystem::path root_;
};

std::string render_record_json(const VersionRecord& r);
VersionRecord read_record_json(const std::string& text);

}  // namespace sysgraph
