#include "sysgraph/version.hpp"

#include <openssl/evp.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fcntl.h>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sysgraph/frontend.hpp"

namespace sysgraph {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw ModelError("io", "sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string graph_digest(const SystemGraph& g) { return sha256_hex(canonical_text(g)); }

std::string to_string(RecordKind k) {
  switch (k) {
    case RecordKind::origin: return "origin";
    case RecordKind::refinement: return "refinement";
    case RecordKind::horizontal_increment: return "horizontal-increment";
    case RecordKind::vertical_increment: return "vertical-increment";
  }
  return "";
}

RecordKind record_kind_from_string(const std::string& s) {
  for (auto k : {RecordKind::origin, RecordKind::refinement, RecordKind::horizontal_increment, RecordKind::vertical_increment})
    if (to_string(k) == s) return k;
  throw ModelError("usage", "unknown record kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Record JSON

namespace {

json label_json(const PropertyLabel& l) { return {{"formula", l.formula}, {"holds", l.holds}, {"checker", l.checker}}; }

PropertyLabel label_of(const json& j) {
  return {j.at("formula").get<std::string>(), j.at("holds").get<bool>(), j.at("checker").get<std::string>()};
}

}  // namespace

std::string render_record_json(const VersionRecord& r) {
  json labels = json::array();
  for (const auto& l : r.labels) labels.push_back(label_json(l));
  json doc = {{"schema_version", kRecordSchemaVersion},
              {"id", r.id},
              {"algorithm", r.algorithm},
              {"graph", r.graph},
              {"kind", to_string(r.kind)},
              {"parents", r.parents},
              {"labels", labels},
              {"metadata", r.metadata},
              {"refinable", r.refinable},
              {"timestamp", r.timestamp}};
  doc["refinement"] = r.refinement ? json{{"mode", r.refinement->mode}, {"holds", r.refinement->holds}} : json(nullptr);
  return doc.dump(2) + "\n";
}

VersionRecord read_record_json(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != kRecordSchemaVersion)
      throw ModelError("schema", "unsupported record schema version");
    VersionRecord r;
    r.id = doc.at("id").get<std::string>();
    r.algorithm = doc.at("algorithm").get<std::string>();
    r.graph = doc.at("graph").get<std::string>();
    r.kind = record_kind_from_string(doc.at("kind").get<std::string>());
    r.parents = doc.at("parents").get<std::vector<std::string>>();
    for (const auto& l : doc.at("labels")) r.labels.push_back(label_of(l));
    r.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    r.refinable = doc.at("refinable").get<bool>();
    r.timestamp = doc.at("timestamp").get<std::string>();
    const json& ref = doc.at("refinement");
    if (!ref.is_null()) r.refinement = RefinementInfo{ref.at("mode").get<std::string>(), ref.at("holds").get<bool>()};
    return r;
  } catch (const json::exception& e) {
    throw ModelError("corrupt", std::string("malformed version record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Store

namespace {

class FileLock {
 public:
  explicit FileLock(const fs::path& p) {
    fd_ = ::open(p.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) throw ModelError("io", "cannot lock " + p.string());
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ModelError("io", "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& p, const std::string& content) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError("io", "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw ModelError("io", "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw ModelError("io", "cannot rename " + tmp.string() + ": " + ec.message());
}

void append_line(const fs::path& p, const std::string& line) {
  std::ofstream out(p, std::ios::app);
  if (!out || !(out << line << '\n')) throw ModelError("io", "cannot append to " + p.string());
}

std::string now_utc() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool valid_id(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)) && !std::isupper(static_cast<unsigned char>(c)); });
}

}  // namespace

VersionStore::VersionStore(fs::path root) : root_(std::move(root)) {}

VersionStore VersionStore::beside(const fs::path& model_file) {
  fs::path dir = model_file.parent_path();
  if (dir.empty()) dir = ".";
  return VersionStore(dir / ".sgv");
}

VersionRecord VersionStore::archive(const SystemGraph& g, const ArchiveRequest& req) {
  if (auto diags = validate_graph(g); has_errors(diags)) throw ModelError(diags);
  if (req.kind == RecordKind::refinement && !req.refinement)
    throw ModelError("refinement", "a refinement record needs the refinement mode and verdict");
  std::error_code ec;
  for (const char* sub : {"objects", "labels", "heads"}) fs::create_directories(root_ / sub, ec);
  if (ec) throw ModelError("io", "cannot create " + root_.string() + ": " + ec.message());
  FileLock lock(root_ / "lock");

  const std::string id = graph_digest(g);
  const fs::path record_path = root_ / "objects" / (id + ".json");
  const fs::path head_path = root_ / "heads" / g.name;

  VersionRecord rec;
  if (fs::exists(record_path)) {
    rec = *get(id);
    for (const auto& l : req.labels) {
      if (std::find(rec.labels.begin(), rec.labels.end(), l) != rec.labels.end()) continue;
      append_line(root_ / "labels" / id, label_json(l).dump());
      rec.labels.push_back(l);
    }
  } else {
    rec.id = id;
    rec.graph = g.name;
    rec.kind = req.kind;
    rec.parents = req.parents;
    if (rec.parents.empty())
      if (auto h = head(g.name); h && *h != id) rec.parents.push_back(*h);
    for (const auto& p : rec.parents)
      if (!valid_id(p) || !fs::exists(root_ / "objects" / (p + ".json")))
        throw ModelError("dangling-parent", "parent '" + p + "' is not in the archive");
    for (const auto& l : req.labels)
      if (std::find(rec.labels.begin(), rec.labels.end(), l) == rec.labels.end()) rec.labels.push_back(l);
    rec.refinement = req.refinement;
    rec.metadata = req.metadata;
    rec.refinable = g.refinable;
    rec.timestamp = req.timestamp.empty() ? now_utc() : req.timestamp;
    write_atomic(root_ / "objects" / (id + ".sg"), print_graph(g));
    write_atomic(record_path, render_record_json(rec));
  }
  write_atomic(head_path, id + "\n");
  return rec;
}

std::optional<VersionRecord> VersionStore::get(const std::string& id) const {
  if (!valid_id(id)) return std::nullopt;
  fs::path p = root_ / "objects" / (id + ".json");
  if (!fs::exists(p)) return std::nullopt;
  VersionRecord r = read_record_json(read_file(p));
  if (r.id != id) throw ModelError("corrupt", "record " + id + " names id " + r.id);
  if (graph_digest(graph(id)) != id) throw ModelError("corrupt", "stored graph of " + id + " does not match its digest");
  fs::path lp = root_ / "labels" / id;
  if (fs::exists(lp)) {
    std::istringstream in(read_file(lp));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        PropertyLabel l = label_of(json::parse(line));
        if (std::find(r.labels.begin(), r.labels.end(), l) == r.labels.end()) r.labels.push_back(l);
      } catch (const json::exception& e) {
        throw ModelError("corrupt", "malformed label line for " + id + ": " + e.what());
      }
    }
  }
  return r;
}

std::optional<std::string> VersionStore::resolve(const std::string& prefix) const {
  if (prefix.empty() || !fs::exists(root_ / "objects")) return std::nullopt;
  std::optional<std::string> found;
  for (const auto& e : fs::directory_iterator(root_ / "objects")) {
    if (e.path().extension() != ".json") continue;
    std::string id = e.path().stem().string();
    if (id.rfind(prefix, 0) != 0) continue;
    if (found) throw ModelError("usage", "id prefix '" + prefix + "' is ambiguous");
    found = id;
  }
  return found;
}

SystemGraph VersionStore::graph(const std::string& id) const {
  fs::path p = root_ / "objects" / (id + ".sg");
  auto r = parse_source({p.string(), read_file(p)});
  if (!r.ok()) throw ModelError("corrupt", "stored graph of " + id + " does not parse");
  return *r.value;
}

std::vector<VersionRecord> VersionStore::all() const {
  std::vector<VersionRecord> out;
  if (!fs::exists(root_ / "objects")) return out;
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(root_ / "objects"))
    if (e.path().extension() == ".json") ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids)
    if (auto r = get(id)) out.push_back(std::move(*r));
  return out;
}

std::optional<std::string> VersionStore::head(const std::string& lineage) const {
  fs::path p = root_ / "heads" / lineage;
  if (!fs::exists(p)) return std::nullopt;
  std::string id = read_file(p);
  while (!id.empty() && (id.back() == '\n' || id.back() == '\r')) id.pop_back();
  return id;
}

std::vector<VersionRecord> VersionStore::log(const std::string& lineage) const {
  std::vector<VersionRecord> out;
  std::set<std::string> seen;
  auto cur = head(lineage);
  while (cur && seen.insert(*cur).second) {
    auto r = get(*cur);
    if (!r) break;
    cur.reset();
    for (const auto& p : r->parents) {
      auto pr = get(p);
      if (pr && pr->graph == lineage) {
        cur = p;
        break;
      }
    }
    out.push_back(std::move(*r));
  }
  return out;
}

std::vector<VersionRecord> VersionStore::with_property(const std::string& formula) const {
  std::vector<VersionRecord> out;
  for (auto& r : all())
    if (std::any_of(r.labels.begin(), r.labels.end(), [&](const PropertyLabel& l) { return l.formula == formula; }))
      out.push_back(std::move(r));
  return out;
}

bool VersionStore::is_dependent(const std::string& lineage) const {
  auto records = all();
  std::set<std::string> own;
  for (const auto& r : records)
    if (r.graph == lineage) own.insert(r.id);
  for (const auto& r : records) {
    if (r.graph == lineage) continue;
    for (const auto& p : r.parents)
      if (own.count(p)) return true;
  }
  return false;
}

NextMove VersionStore::next_move(const SystemGraph& g) const { return classify_next_move(g.refinable, is_dependent(g.name)); }

std::vector<std::string> VersionStore::verify() const {
  std::vector<std::string> problems;
  if (!fs::exists(root_ / "objects")) return problems;
  std::map<std::string, std::vector<std::string>> parents;
  std::set<std::string> present;
  for (const auto& e : fs::directory_iterator(root_ / "objects")) {
    if (e.path().extension() != ".json") continue;
    std::string id = e.path().stem().string();
    present.insert(id);
    try {
      auto r = get(id);
      if (r) parents[id] = r->parents;
    } catch (const ModelError& err) {
      problems.push_back(id + ": " + err.what());
    }
  }
  for (const auto& [id, ps] : parents)
    for (const auto& p : ps)
      if (!present.count(p)) problems.push_back(id + ": dangling parent " + p);
  // Cycle detection by colouring.
  std::map<std::string, int> colour;
  std::function<bool(const std::string&)> cyclic = [&](const std::string& id) {
    colour[id] = 1;
    for (const auto& p : parents[id]) {
      if (!parents.count(p)) continue;
      if (colour[p] == 1) return true;
      if (colour[p] == 0 && cyclic(p)) return true;
    }
    colour[id] = 2;
    return false;
  };
  for (const auto& [id, _] : parents)
    if (colour[id] == 0 && cyclic(id)) problems.push_back(id + ": parent links form a cycle");
  if (fs::exists(root_ / "heads"))
    for (const auto& e : fs::directory_iterator(root_ / "heads")) {
      std::string h = head(e.path().filename().string()).value_or("");
      if (!present.count(h)) problems.push_back("head " + e.path().filename().string() + " points to unknown " + h);
    }
  return problems;
}

}  // namespace sysgraph
