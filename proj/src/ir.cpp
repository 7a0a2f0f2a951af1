#include <algorithm>
#include <map>
#include <sstream>

#include "provex/ir.hpp"

namespace provex {

std::string_view agg_name(AggFn fn) {
  switch (fn) {
    case AggFn::Sum:
      return "sum";
    case AggFn::Count:
      return "count";
    case AggFn::Min:
      return "min";
    case AggFn::Max:
      return "max";
    case AggFn::Avg:
      return "avg";
  }
  return "?";
}

std::string_view cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Lt:
      return "<";
    case CmpOp::Le:
      return "<=";
    case CmpOp::Eq:
      return "=";
    case CmpOp::Ne:
      return "!=";
    case CmpOp::Ge:
      return ">=";
    case CmpOp::Gt:
      return ">";
  }
  return "?";
}

bool apply_cmp(CmpOp op, std::strong_ordering ord) {
  switch (op) {
    case CmpOp::Lt:
      return ord < 0;
    case CmpOp::Le:
      return ord <= 0;
    case CmpOp::Eq:
      return ord == 0;
    case CmpOp::Ne:
      return ord != 0;
    case CmpOp::Ge:
      return ord >= 0;
    case CmpOp::Gt:
      return ord > 0;
  }
  return false;
}

std::vector<std::string> Predicate::attributes() const {
  std::vector<std::string> out;
  if (auto* a = std::get_if<AttrRef>(&left)) out.push_back(a->name);
  if (auto* a = std::get_if<AttrRef>(&right))
    if (out.empty() || out.front() != a->name) out.push_back(a->name);
  return out;
}

std::vector<std::string> TableAtom::exposed() const {
  std::vector<std::string> out;
  for (const auto& c : columns)
    if (!c.hidden) out.push_back(c.exposed);
  return out;
}

std::vector<std::string> TableAtom::all_exposed() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.exposed);
  return out;
}

std::optional<std::string> TableAtom::exposed_name(std::string_view source) const {
  for (const auto& c : columns)
    if (c.source == source && !c.hidden) return c.exposed;
  return std::nullopt;
}

std::optional<std::string> TableAtom::source_of(std::string_view exposed) const {
  for (const auto& c : columns)
    if (c.exposed == exposed) return c.source;
  return std::nullopt;
}

RuleKind Rule::kind() const {
  for (const auto& hc : head_columns)
    if (!hc.is_plain()) return RuleKind::SPJA;
  return RuleKind::SPJ;
}

std::vector<std::string> Rule::head_attributes() const {
  std::vector<std::string> out;
  for (const auto& hc : head_columns) out.push_back(hc.output);
  return out;
}

std::vector<std::string> Rule::group_by() const {
  std::vector<std::string> out;
  for (const auto& hc : head_columns)
    if (hc.is_plain()) out.push_back(hc.attribute);
  return out;
}

bool Rule::is_plain_head(std::string_view attr) const {
  for (const auto& hc : head_columns)
    if (hc.is_plain() && hc.attribute == attr) return true;
  return false;
}

std::optional<std::size_t> Rule::atom_index(std::string_view occurrence_name) const {
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (atoms[i].occurrence_name() == occurrence_name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Program::rule_index(std::string_view head) const {
  for (std::size_t i = 0; i < rules.size(); ++i)
    if (rules[i].head == head) return i;
  return std::nullopt;
}

std::vector<OccurrenceId> Program::occurrences() const {
  std::vector<OccurrenceId> out;
  for (std::size_t r = 0; r < rules.size(); ++r)
    for (std::size_t a = 0; a < rules[r].atoms.size(); ++a) out.push_back({r, a});
  return out;
}

std::vector<OccurrenceId> Program::base_occurrences() const {
  std::vector<OccurrenceId> out;
  for (auto id : occurrences())
    if (!is_view(atom(id).relation)) out.push_back(id);
  return out;
}

std::string Program::qualified_name(OccurrenceId id) const {
  return rules.at(id.rule).head + "." + atom(id).occurrence_name();
}

std::string Program::display_name(OccurrenceId id) const {
  std::string shortname = atom(id).occurrence_name();
  std::size_t n = 0;
  for (auto other : occurrences())
    if (atom(other).occurrence_name() == shortname) ++n;
  return n == 1 ? shortname : qualified_name(id);
}

OccurrenceId Program::find_occurrence(std::string_view name) const {
  std::vector<OccurrenceId> hits;
  for (auto id : occurrences())
    if (qualified_name(id) == name) return id;
  for (auto id : occurrences())
    if (atom(id).occurrence_name() == name) hits.push_back(id);
  if (hits.size() == 1) return hits.front();
  if (hits.empty()) throw UnknownOccurrence("unknown occurrence '" + std::string(name) + "'");
  throw UnknownOccurrence("ambiguous occurrence '" + std::string(name) + "'; use Head.Name");
}

std::string Program::key_suffix(OccurrenceId id) const {
  const TableAtom& a = atom(id);
  return a.alias.empty() ? "_" + rules.at(id.rule).head : a.alias;
}

std::size_t Program::depth(OccurrenceId id) const {
  std::vector<std::size_t> d(rules.size(), rules.size());
  if (!rules.empty()) d.back() = 0;
  for (std::size_t r = rules.size(); r-- > 0;) {
    if (d[r] == rules.size()) continue;
    for (const auto& a : rules[r].atoms)
      if (auto j = rule_index(a.relation)) d[*j] = std::min(d[*j], d[r] + 1);
  }
  return d.at(id.rule);
}

std::vector<OccurrenceId> Program::references_to(std::size_t r) const {
  std::vector<OccurrenceId> out;
  for (auto id : occurrences())
    if (atom(id).relation == rules.at(r).head) out.push_back(id);
  return out;
}

namespace {

const CatalogEntry& lookup(const Catalog& catalog, const std::string& relation, const std::string& head) {
  auto it = catalog.find(relation);
  if (it == catalog.end()) throw ValidationError("rule " + head + ": unknown relation '" + relation + "'");
  return it->second;
}

std::string hidden_name(const TableAtom& a, const std::string& attr) { return "~" + a.occurrence_name() + "." + attr; }

void resolve_columns(TableAtom& a, const CatalogEntry& e, const std::string& head) {
  a.columns.clear();
  if (!a.args) {
    for (const auto& attr : e.attributes) a.columns.push_back({attr.name, attr.name, false});
    return;
  }
  std::map<std::string, std::string> listed;
  std::set<std::string> exposed;
  for (const auto& ren : *a.args) {
    if (!e.has_attribute(ren.source))
      throw ValidationError("rule " + head + ": relation " + a.relation + " has no attribute '" + ren.source + "'");
    if (!listed.emplace(ren.source, ren.exposed).second)
      throw ValidationError("rule " + head + ": attribute '" + ren.source + "' listed twice for " +
                            a.occurrence_name());
    if (!exposed.insert(ren.exposed).second)
      throw ValidationError("rule " + head + ": exposed name '" + ren.exposed + "' used twice in " +
                            a.occurrence_name());
  }
  for (const auto& attr : e.attributes) {
    auto it = listed.find(attr.name);
    if (it != listed.end())
      a.columns.push_back({attr.name, it->second, false});
    else
      a.columns.push_back({attr.name, hidden_name(a, attr.name), true});
  }
}

std::vector<std::string> safety_violations(const Rule& rule) {
  std::set<std::string> exposed = rhs_attributes(rule);
  std::vector<std::string> out;
  std::set<std::string> reported;
  auto check = [&](const std::string& attr, const char* where) {
    if (!exposed.count(attr) && reported.insert(attr).second)
      out.push_back("attribute '" + attr + "' in the " + where + " of " + rule.head + " does not occur in the body");
  };
  for (const auto& hc : rule.head_columns) check(hc.attribute, "head");
  for (const auto& p : rule.predicates)
    for (const auto& attr : p.attributes()) check(attr, "predicate");
  return out;
}

Value coerce_literal(const Value& lit, Kind target, const std::string& head) {
  if (lit.kind() == target) return lit;
  if (lit.kind() == Kind::Text && target == Kind::Date) {
    if (!is_iso_date(lit.as_text()))
      throw ValidationError("rule " + head + ": '" + lit.as_text() + "' is not an ISO-8601 date");
    return Value(Date{lit.as_text()});
  }
  if (lit.kind() == Kind::Int && target == Kind::Decimal) return Value(Decimal::from_int(lit.as_int()));
  throw ValidationError("rule " + head + ": cannot compare " + std::string(kind_name(target)) + " attribute with " +
                        std::string(kind_name(lit.kind())) + " literal " + lit.to_string());
}

}  // namespace

std::set<std::string> rhs_attributes(const Rule& rule) {
  std::set<std::string> out;
  for (const auto& a : rule.atoms)
    for (const auto& c : a.columns)
      if (!c.hidden) out.insert(c.exposed);
  return out;
}

std::vector<std::string> check_safety(const Rule& rule, const Catalog& catalog) {
  Rule copy = rule;
  for (auto& a : copy.atoms) resolve_columns(a, lookup(catalog, a.relation, rule.head), rule.head);
  return safety_violations(copy);
}

Program bind_program(Program program, const Catalog& catalog) {
  program.heads.clear();
  Catalog visible = catalog;
  for (auto& rule : program.rules) {
    if (catalog.count(rule.head))
      throw ValidationError("rule head '" + rule.head + "' clashes with a base relation");
    std::set<std::string> occ_names;
    std::map<std::string, Kind> kinds;
    for (auto& a : rule.atoms) {
      const CatalogEntry& e = lookup(visible, a.relation, rule.head);
      if (!occ_names.insert(a.occurrence_name()).second)
        throw ValidationError("rule " + rule.head + ": occurrence name '" + a.occurrence_name() +
                              "' is used twice; give the atoms distinct aliases with '@'");
      resolve_columns(a, e, rule.head);
      for (std::size_t i = 0; i < a.columns.size(); ++i) {
        const auto& c = a.columns[i];
        Kind k = e.attributes[*e.index_of(c.source)].kind;
        auto [it, inserted] = kinds.emplace(c.exposed, k);
        if (!inserted && it->second != k)
          throw ValidationError("rule " + rule.head + ": attribute '" + c.exposed + "' joins " +
                                std::string(kind_name(it->second)) + " with " + std::string(kind_name(k)));
      }
    }
    auto violations = safety_violations(rule);
    if (!violations.empty()) throw ValidationError("unsafe rule: " + violations.front());

    for (auto& p : rule.predicates) {
      auto* la = std::get_if<AttrRef>(&p.left);
      auto* ra = std::get_if<AttrRef>(&p.right);
      if (la && ra) {
        if (kinds.at(la->name) != kinds.at(ra->name))
          throw ValidationError("rule " + rule.head + ": predicate " + to_string(p) + " compares " +
                                std::string(kind_name(kinds.at(la->name))) + " with " +
                                std::string(kind_name(kinds.at(ra->name))));
      } else if (la) {
        p.right = coerce_literal(std::get<Value>(p.right), kinds.at(la->name), rule.head);
      } else {
        p.left = coerce_literal(std::get<Value>(p.left), kinds.at(ra->name), rule.head);
      }
    }

    const std::set<std::string> body = rhs_attributes(rule);
    CatalogEntry head;
    head.name = rule.head;
    head.kind = RelationKind::View;
    for (const auto& hc : rule.head_columns) {
      Kind k = kinds.at(hc.attribute);
      if (hc.fn) {
        if (body.count(hc.output))
          throw ValidationError("rule " + rule.head + ": aggregate output '" + hc.output +
                                "' coincides with a body attribute");
        switch (*hc.fn) {
          case AggFn::Count:
            k = Kind::Int;
            break;
          case AggFn::Avg:
            if (k != Kind::Int && k != Kind::Decimal)
              throw ValidationError("rule " + rule.head + ": avg over " + std::string(kind_name(k)) + " attribute '" +
                                    hc.attribute + "'");
            k = Kind::Decimal;
            break;
          case AggFn::Sum:
            if (k != Kind::Int && k != Kind::Decimal)
              throw ValidationError("rule " + rule.head + ": sum over " + std::string(kind_name(k)) + " attribute '" +
                                    hc.attribute + "'");
            break;
          case AggFn::Min:
          case AggFn::Max:
            break;
        }
      }
      head.attributes.push_back({hc.output, k});
    }
    if (rule.kind() == RuleKind::SPJA) head.key = rule.group_by();
    visible.insert_or_assign(head.name, head);
    program.heads.insert_or_assign(head.name, std::move(head));
  }
  program.bound = true;
  return program;
}

namespace {

std::string literal(const Value& v) {
  switch (v.kind()) {
    case Kind::Int:
    case Kind::Decimal:
      return v.to_string();
    case Kind::Text:
    case Kind::Date: {
      std::string s = v.to_string();
      char q = s.find('\'') == std::string::npos ? '\'' : '"';
      return q + s + q;
    }
  }
  return {};
}

std::string operand(const Operand& o) {
  if (auto* a = std::get_if<AttrRef>(&o)) return a->name;
  return literal(std::get<Value>(o));
}

}  // namespace

std::string to_string(const Predicate& p) {
  return operand(p.left) + " " + std::string(cmp_symbol(p.op)) + " " + operand(p.right);
}

std::string to_string(const Rule& rule) {
  std::ostringstream os;
  os << rule.head << "(";
  for (std::size_t i = 0; i < rule.head_columns.size(); ++i) {
    const auto& hc = rule.head_columns[i];
    if (i) os << ", ";
    if (hc.fn)
      os << agg_name(*hc.fn) << "(" << hc.attribute << ") as " << hc.output;
    else
      os << hc.attribute;
  }
  os << ") :- ";
  bool first = true;
  for (const auto& a : rule.atoms) {
    os << (first ? "" : ", ") << a.relation;
    if (!a.alias.empty()) os << "@" << a.alias;
    if (a.args) {
      os << "(";
      for (std::size_t i = 0; i < a.args->size(); ++i) {
        const auto& ren = (*a.args)[i];
        os << (i ? ", " : "") << ren.source;
        if (ren.exposed != ren.source) os << " as " << ren.exposed;
      }
      os << ")";
    }
    first = false;
  }
  for (const auto& p : rule.predicates) os << ", " << to_string(p);
  os << ".";
  return os.str();
}

std::string to_string(const Program& program) {
  std::string out;
  for (const auto& r : program.rules) out += to_string(r) + "\n";
  return out;
}

}  // namespace provex
