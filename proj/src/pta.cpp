#include "espta/pta.hpp"

#include <algorithm>
#include <sstream>

namespace espta::pta {

std::string to_string(const Var& v) { return v.func + "::" + v.name; }

std::string to_string(const AbstractObject& obj) {
  if (const auto* site = std::get_if<SiteObj>(&obj)) {
    return "site:" + site->site_id;
  }
  if (const auto* proxy = std::get_if<ProxyObj>(&obj)) {
    std::string out = "proxy:" + proxy->class_name + ":{";
    bool first = true;
    for (const auto& m : proxy->footprint) {
      if (!first) out += ",";
      out += m;
      first = false;
    }
    return out + "}";
  }
  const auto& ideal = std::get<IdealProxyObj>(obj);
  std::string out = "iproxy:{";
  bool first = true;
  for (const auto& v : ideal.footprint) {
    if (!first) out += ",";
    out += to_string(v);
    first = false;
  }
  return out + "}";
}

std::string class_of(const AbstractObject& obj) {
  if (const auto* site = std::get_if<SiteObj>(&obj)) return site->class_name;
  if (const auto* proxy = std::get_if<ProxyObj>(&obj)) return proxy->class_name;
  return "";
}

const std::set<AbstractObject>& PointsToSet::points_to(const Var& v) const {
  static const std::set<AbstractObject> kEmpty;
  auto it = pts_.find(v);
  return it == pts_.end() ? kEmpty : it->second;
}

bool PointsToSet::contains(const Var& v, const AbstractObject& obj) const {
  auto it = pts_.find(v);
  return it != pts_.end() && it->second.count(obj) > 0;
}

std::set<Edge> PointsToSet::edges() const {
  std::set<Edge> out;
  for (const auto& [v, objs] : pts_) {
    for (const auto& o : objs) out.insert({v, o});
  }
  return out;
}

std::set<Edge> PointsToSet::program_edges() const {
  std::set<Edge> out;
  for (const auto& [v, objs] : pts_) {
    if (program_vars_.count(v) == 0) continue;
    for (const auto& o : objs) out.insert({v, o});
  }
  return out;
}

std::string PointsToSet::serialize() const {
  std::set<std::string> lines;
  for (const auto& e : program_edges()) {
    lines.insert(to_string(e.var) + " -> " + to_string(e.obj));
  }
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += "\n";
  }
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  unsigned long long h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string PointsToSet::hash() const { return fnv1a_hex(serialize()); }

namespace {

struct Copy {
  Var dst;
  Var src;
};

struct LoadCon {
  Var dst;
  Var base;
  std::string field;
};

struct StoreCon {
  Var base;
  std::string field;
  Var src;
};

// The flow-insensitive constraint soup of every visible statement.
struct Constraints {
  std::vector<std::pair<Var, SiteObj>> allocs;
  std::vector<Copy> copies;
  std::map<std::string, std::vector<LoadCon>> loads_by_field;
  std::map<std::string, std::vector<StoreCon>> stores_by_field;
};

bool body_visible(const ir::ProgramBundle& b, const std::string& callee,
                  const std::set<std::string>& active_specs, CodeView view) {
  const ir::FunctionDecl* decl = b.callee_decl(callee);
  if (decl == nullptr) return false;
  if (decl->kind == ir::FunctionKind::Program) return true;
  if (view == CodeView::GroundTruth) return true;
  return active_specs.count(callee) > 0;
}

// The body the analysis reads for a function, or null when missing.
const ir::FunctionDecl* visible_decl(const ir::ProgramBundle& b,
                                     const std::string& name,
                                     const std::set<std::string>& active_specs,
                                     CodeView view) {
  const ir::FunctionDecl* decl = b.callee_decl(name);
  if (decl == nullptr) return nullptr;
  if (decl->kind == ir::FunctionKind::Program) return decl;
  if (view == CodeView::GroundTruth) return decl;
  if (active_specs.count(name) > 0) return b.spec_of(name);
  return nullptr;
}

Constraints build_constraints(const ir::ProgramBundle& b,
                              const std::set<std::string>& active_specs,
                              CodeView view) {
  Constraints cons;
  std::vector<const ir::FunctionDecl*> visible;
  for (const auto& f : b.functions) {
    if (f.kind == ir::FunctionKind::Program) visible.push_back(&f);
  }
  for (const auto& name : b.library_function_names()) {
    if (const auto* decl = visible_decl(b, name, active_specs, view);
        decl != nullptr && decl->kind != ir::FunctionKind::Program) {
      visible.push_back(decl);
    }
  }
  for (const auto* f : visible) {
    const std::string& fn = f->name;
    ir::for_each_statement(f->body, [&](const ir::Statement& s) {
      if (const auto* a = std::get_if<ir::AllocStmt>(&s.node)) {
        cons.allocs.push_back({{fn, a->target}, SiteObj{s.id, a->class_name}});
      } else if (const auto* as = std::get_if<ir::AssignStmt>(&s.node)) {
        cons.copies.push_back({{fn, as->target}, {fn, as->source}});
      } else if (const auto* ld = std::get_if<ir::LoadStmt>(&s.node)) {
        cons.loads_by_field[ld->field].push_back(
            {{fn, ld->target}, {fn, ld->base}, ld->field});
      } else if (const auto* st = std::get_if<ir::StoreStmt>(&s.node)) {
        cons.stores_by_field[st->field].push_back(
            {{fn, st->base}, st->field, {fn, st->source}});
      } else if (const auto* ret = std::get_if<ir::ReturnStmt>(&s.node)) {
        cons.copies.push_back({{fn, kReturnVar}, {fn, ret->var}});
      } else if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
        if (!body_visible(b, call->callee, active_specs, view)) return;
        const ir::FunctionDecl* callee = b.callee_decl(call->callee);
        for (size_t i = 0; i < call->args.size(); ++i) {
          cons.copies.push_back(
              {{callee->name, callee->params[i]}, {fn, call->args[i]}});
        }
        if (!call->target.empty()) {
          cons.copies.push_back(
              {{fn, call->target}, {callee->name, kReturnVar}});
        }
      }
    });
  }
  return cons;
}

bool merge_into(std::set<AbstractObject>& dst,
                const std::set<AbstractObject>& src) {
  size_t before = dst.size();
  dst.insert(src.begin(), src.end());
  return dst.size() != before;
}

bool intersects(const std::set<AbstractObject>& a,
                const std::set<AbstractObject>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& big = a.size() <= b.size() ? b : a;
  return std::any_of(small.begin(), small.end(),
                     [&](const AbstractObject& o) { return big.count(o) > 0; });
}

}  // namespace

std::set<Var> collect_program_vars(const ir::ProgramBundle& b) {
  std::set<Var> out;
  for (const auto* f : b.program_functions()) {
    const std::string& fn = f->name;
    out.insert({fn, kReturnVar});
    for (const auto& p : f->params) out.insert({fn, p});
    ir::for_each_statement(f->body, [&](const ir::Statement& s) {
      if (const auto* a = std::get_if<ir::AllocStmt>(&s.node)) {
        out.insert({fn, a->target});
      } else if (const auto* as = std::get_if<ir::AssignStmt>(&s.node)) {
        out.insert({fn, as->target});
        out.insert({fn, as->source});
      } else if (const auto* ld = std::get_if<ir::LoadStmt>(&s.node)) {
        out.insert({fn, ld->target});
        out.insert({fn, ld->base});
      } else if (const auto* st = std::get_if<ir::StoreStmt>(&s.node)) {
        out.insert({fn, st->base});
        out.insert({fn, st->source});
      } else if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
        if (!call->target.empty()) out.insert({fn, call->target});
        for (const auto& a : call->args) out.insert({fn, a});
      } else if (const auto* ret = std::get_if<ir::ReturnStmt>(&s.node)) {
        out.insert({fn, ret->var});
      }
    });
  }
  return out;
}

PointsToSet compute_pointsto(const ir::ProgramBundle& b,
                             const std::set<std::string>& active_specs,
                             const MissingEdgeSet& pi_miss, CodeView view) {
  Constraints cons = build_constraints(b, active_specs, view);

  std::map<Var, std::set<AbstractObject>> pts;
  for (const auto& [v, site] : cons.allocs) pts[v].insert(site);
  for (const auto& e : pi_miss.edges) pts[e.var].insert(e.obj);

  // Round-based evaluation; the result is the least fixpoint regardless of
  // iteration order, which is all the contract asks for.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : cons.copies) {
      auto it = pts.find(c.src);
      if (it == pts.end() || it->second.empty()) continue;
      if (merge_into(pts[c.dst], it->second)) changed = true;
    }
    for (const auto& [field, loads] : cons.loads_by_field) {
      auto sit = cons.stores_by_field.find(field);
      if (sit == cons.stores_by_field.end()) continue;
      for (const auto& ld : loads) {
        auto base_it = pts.find(ld.base);
        if (base_it == pts.end()) continue;
        for (const auto& st : sit->second) {
          auto sbase_it = pts.find(st.base);
          if (sbase_it == pts.end()) continue;
          if (!intersects(base_it->second, sbase_it->second)) continue;
          auto val_it = pts.find(st.src);
          if (val_it == pts.end() || val_it->second.empty()) continue;
          if (merge_into(pts[ld.dst], val_it->second)) changed = true;
        }
      }
    }
  }

  PointsToSet out;
  for (const auto& [v, objs] : pts) {
    for (const auto& o : objs) out.add(v, o);
  }
  out.set_program_vars(collect_program_vars(b));
  return out;
}

UnknownVariable::UnknownVariable(const Var& v)
    : std::runtime_error("unknown variable " + to_string(v)) {}

bool may_alias(const PointsToSet& pi, const Var& x, const Var& y) {
  if (!pi.is_program_var(x)) throw UnknownVariable(x);
  if (!pi.is_program_var(y)) throw UnknownVariable(y);
  const auto& px = pi.points_to(x);
  const auto& py = pi.points_to(y);
  return intersects(px, py);
}

std::set<std::string> points_to_classes(const PointsToSet& pi, const Var& x) {
  if (!pi.is_program_var(x)) throw UnknownVariable(x);
  std::set<std::string> out;
  for (const auto& obj : pi.points_to(x)) {
    std::string c = class_of(obj);
    if (!c.empty()) out.insert(c);
  }
  return out;
}

std::set<std::pair<std::string, std::string>> taint_flows(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    const PointsToSet& pi) {
  Constraints cons = build_constraints(b, active_specs, CodeView::ActiveSpecs);

  // Call statements in visible code, with their enclosing function.
  struct VisibleCall {
    std::string func;
    const ir::CallStmt* call;
  };
  std::vector<VisibleCall> calls;
  for (const auto& f : b.functions) {
    bool visible = f.kind == ir::FunctionKind::Program ||
                   (f.kind == ir::FunctionKind::LibrarySpec &&
                    active_specs.count(f.name) > 0);
    if (!visible) continue;
    ir::for_each_statement(f.body, [&](const ir::Statement& s) {
      if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
        calls.push_back({f.name, call});
      }
    });
  }

  std::set<std::pair<std::string, std::string>> flows;
  for (const auto& source : b.sources) {
    std::set<Var> tainted;
    std::set<AbstractObject> tainted_objs;
    for (const auto& vc : calls) {
      if (vc.call->callee == source && !vc.call->target.empty()) {
        tainted.insert({vc.func, vc.call->target});
      }
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& c : cons.copies) {
        if (tainted.count(c.src) > 0 && tainted.insert(c.dst).second) {
          changed = true;
        }
      }
      for (const auto& v : tainted) {
        for (const auto& obj : pi.points_to(v)) {
          if (tainted_objs.insert(obj).second) changed = true;
        }
      }
      // Any variable sharing a tainted abstract object is tainted; together
      // with the rule-3 closure of pi this covers heap flows.
      for (const auto& e : pi.edges()) {
        if (tainted_objs.count(e.obj) > 0 && tainted.insert(e.var).second) {
          changed = true;
        }
      }
    }
    for (const auto& vc : calls) {
      if (std::find(b.sinks.begin(), b.sinks.end(), vc.call->callee) ==
          b.sinks.end()) {
        continue;
      }
      for (const auto& arg : vc.call->args) {
        if (tainted.count({vc.func, arg}) > 0) {
          flows.insert({source, vc.call->callee});
        }
      }
    }
  }
  return flows;
}

Edge parse_edge(const std::string& line, const ir::ProgramBundle& b) {
  auto arrow = line.find(" -> ");
  if (arrow == std::string::npos) {
    throw std::runtime_error("malformed edge: " + line);
  }
  std::string var_part = line.substr(0, arrow);
  std::string obj_part = line.substr(arrow + 4);
  auto sep = var_part.find("::");
  if (sep == std::string::npos) {
    throw std::runtime_error("malformed variable (want func::name): " + var_part);
  }
  Var var{var_part.substr(0, sep), var_part.substr(sep + 2)};

  AbstractObject obj;
  if (obj_part.rfind("site:", 0) == 0) {
    std::string id = obj_part.substr(5);
    std::string class_name;
    for (const auto& f : b.functions) {
      ir::for_each_statement(f.body, [&](const ir::Statement& s) {
        if (s.id == id) {
          if (const auto* a = std::get_if<ir::AllocStmt>(&s.node)) {
            class_name = a->class_name;
          }
        }
      });
    }
    obj = SiteObj{id, class_name};
  } else if (obj_part.rfind("proxy:", 0) == 0) {
    std::string rest = obj_part.substr(6);
    auto colon = rest.find(':');
    if (colon == std::string::npos || rest.size() < colon + 3 ||
        rest[colon + 1] != '{' || rest.back() != '}') {
      throw std::runtime_error("malformed proxy: " + obj_part);
    }
    ProxyObj proxy;
    proxy.class_name = rest.substr(0, colon);
    std::string inner = rest.substr(colon + 2, rest.size() - colon - 3);
    std::string cur;
    for (char ch : inner) {
      if (ch == ',') {
        if (!cur.empty()) proxy.footprint.insert(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) proxy.footprint.insert(cur);
    obj = std::move(proxy);
  } else {
    throw std::runtime_error("malformed object: " + obj_part);
  }
  return {std::move(var), std::move(obj)};
}

}  // namespace espta::pta
