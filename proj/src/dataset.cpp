#include "provex/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace provex {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> name_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto& n : split(s, ','))
    if (!n.empty()) out.push_back(n);
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

Catalog parse_catalog(std::string_view text) {
  Catalog out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fail = [&](const std::string& msg) -> DataError {
      return DataError("catalog line " + std::to_string(lineno) + ": " + msg);
    };
    auto parts = split(t, ';');
    if (parts.size() < 2 || parts[0].empty()) throw fail("expected 'Name; attr:kind, ...'");
    CatalogEntry e;
    e.name = parts[0];
    for (const auto& spec : name_list(parts[1])) {
      auto colon = spec.find(':');
      if (colon == std::string::npos) throw fail("attribute '" + spec + "' has no kind");
      try {
        e.attributes.push_back({trim(spec.substr(0, colon)), parse_kind(trim(spec.substr(colon + 1)))});
      } catch (const std::invalid_argument& ex) {
        throw fail(ex.what());
      }
    }
    for (std::size_t i = 2; i < parts.size(); ++i) {
      const std::string& p = parts[i];
      if (p.empty()) continue;
      if (p.rfind("key:", 0) == 0) {
        e.key = name_list(p.substr(4));
      } else if (p.rfind("fd:", 0) == 0) {
        std::string body = p.substr(3);
        auto arrow = body.find("->");
        if (arrow == std::string::npos) throw fail("fd needs '->'");
        DeclaredFd fd{name_list(body.substr(0, arrow)), trim(body.substr(arrow + 2))};
        if (fd.rhs.empty()) throw fail("fd has an empty right-hand side");
        e.fds.push_back(std::move(fd));
      } else {
        throw fail("unknown clause '" + p + "'");
      }
    }
    try {
      e.validate();
    } catch (const std::invalid_argument& ex) {
      throw fail(ex.what());
    }
    if (out.count(e.name)) throw fail("relation " + e.name + " declared twice");
    out.emplace(e.name, std::move(e));
  }
  return out;
}

std::string format_catalog(const Catalog& catalog) {
  std::ostringstream os;
  for (const auto& [name, e] : catalog) {
    if (e.kind != RelationKind::Base) continue;
    os << name << "; ";
    for (std::size_t i = 0; i < e.attributes.size(); ++i)
      os << (i ? ", " : "") << e.attributes[i].name << ":" << kind_name(e.attributes[i].kind);
    if (e.key) {
      os << "; key: ";
      for (std::size_t i = 0; i < e.key->size(); ++i) os << (i ? ", " : "") << (*e.key)[i];
    }
    for (const auto& fd : e.fds) {
      os << "; fd: ";
      for (std::size_t i = 0; i < fd.lhs.size(); ++i) os << (i ? ", " : "") << fd.lhs[i];
      os << " -> " << fd.rhs;
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Row parse_row(const std::vector<std::string>& fields, const std::vector<Attribute>& attrs) {
  if (fields.size() != attrs.size())
    throw DataError("expected " + std::to_string(attrs.size()) + " values, got " + std::to_string(fields.size()));
  Row r;
  r.reserve(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    try {
      r.push_back(parse_value(attrs[i].kind == Kind::Text ? fields[i] : trim(fields[i]), attrs[i].kind));
    } catch (const std::invalid_argument& ex) {
      throw DataError("column " + attrs[i].name + ": " + ex.what());
    }
  }
  return r;
}

Relation parse_relation_csv(std::string_view text, const CatalogEntry& entry) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw DataError(entry.name + ": csv has no header row");
  std::vector<std::size_t> pos(entry.attributes.size());
  const auto& header = rows.front();
  if (header.size() != entry.attributes.size())
    throw DataError(entry.name + ": csv header has " + std::to_string(header.size()) + " columns, catalog has " +
                    std::to_string(entry.attributes.size()));
  for (std::size_t i = 0; i < entry.attributes.size(); ++i) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return trim(h) == entry.attributes[i].name; });
    if (it == header.end()) throw DataError(entry.name + ": csv header lacks column " + entry.attributes[i].name);
    pos[i] = static_cast<std::size_t>(it - header.begin());
  }
  Relation out(entry.attribute_names());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw DataError(entry.name + ".csv line " + std::to_string(r + 1) + ": wrong number of fields");
    std::vector<std::string> ordered;
    for (auto p : pos) ordered.push_back(rows[r][p]);
    try {
      out.insert(parse_row(ordered, entry.attributes));
    } catch (const DataError& ex) {
      throw DataError(entry.name + ".csv line " + std::to_string(r + 1) + ": " + ex.what());
    }
  }
  return out;
}

std::string format_relation_csv(const Relation& rel) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::ostringstream os;
  for (std::size_t i = 0; i < rel.attributes().size(); ++i) os << (i ? "," : "") << field(rel.attributes()[i]);
  os << "\n";
  for (const auto& row : rel.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << field(row[i].to_string());
    os << "\n";
  }
  return os.str();
}

Database make_database(std::string_view catalog_text, const std::map<std::string, std::string>& csv_by_relation) {
  Database db;
  for (auto& [name, e] : parse_catalog(catalog_text)) {
    auto it = csv_by_relation.find(name);
    if (it == csv_by_relation.end()) throw DataError("no data for relation " + name);
    Relation rel = parse_relation_csv(it->second, e);
    db.put(e, std::move(rel));
  }
  for (const auto& [name, text] : csv_by_relation)
    if (!db.catalog.count(name)) throw DataError("data given for undeclared relation " + name);
  try {
    db.validate();
  } catch (const std::invalid_argument& ex) {
    throw DataError(ex.what());
  }
  return db;
}

Database load_dataset(const std::filesystem::path& dir) {
  std::string catalog_text = read_file(dir / kCatalogFile);
  std::map<std::string, std::string> csv;
  for (const auto& [name, e] : parse_catalog(catalog_text)) csv[name] = read_file(dir / (name + ".csv"));
  return make_database(catalog_text, csv);
}

void save_dataset(const Database& db, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << text;
  };
  write(dir / kCatalogFile, format_catalog(db.catalog));
  for (const auto& [name, e] : db.catalog)
    if (e.kind == RelationKind::Base) write(dir / (name + ".csv"), format_relation_csv(db.relation(name)));
}

}  // namespace provex
