#include "espta/ir.hpp"

#include <algorithm>

namespace espta::ir {

bool BranchStmt::operator==(const BranchStmt& other) const {
  return then_block == other.then_block && else_block == other.else_block;
}

ParseError::ParseError(int line, int column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ":" +
                         std::to_string(column) + ": " + what),
      line(line),
      column(column) {}

const FunctionDecl* ProgramBundle::find(const std::string& name,
                                        FunctionKind kind) const {
  for (const auto& f : functions) {
    if (f.name == name && f.kind == kind) return &f;
  }
  return nullptr;
}

const FunctionDecl* ProgramBundle::callee_decl(const std::string& name) const {
  if (const auto* f = find(name, FunctionKind::Program)) return f;
  return find(name, FunctionKind::LibraryGroundTruth);
}

const FunctionDecl* ProgramBundle::spec_of(const std::string& name) const {
  return find(name, FunctionKind::LibrarySpec);
}

const FieldDecl* ProgramBundle::field(const std::string& name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

bool ProgramBundle::has_class(const std::string& name) const {
  return std::any_of(classes.begin(), classes.end(),
                     [&](const ClassDecl& c) { return c.name == name; });
}

bool ProgramBundle::is_missing(const std::string& callee,
                               const std::set<std::string>& active_specs) const {
  const FunctionDecl* decl = callee_decl(callee);
  if (decl == nullptr || decl->kind == FunctionKind::Program) return false;
  return active_specs.count(callee) == 0;
}

std::vector<std::string> ProgramBundle::library_function_names() const {
  std::vector<std::string> out;
  for (const auto& f : functions) {
    if (f.kind == FunctionKind::LibraryGroundTruth) out.push_back(f.name);
  }
  return out;
}

std::vector<const FunctionDecl*> ProgramBundle::program_functions() const {
  std::vector<const FunctionDecl*> out;
  for (const auto& f : functions) {
    if (f.kind == FunctionKind::Program) out.push_back(&f);
  }
  return out;
}

namespace {

void collect_field_accesses(const Block& block,
                            std::vector<std::pair<std::string, bool>>& out) {
  // (field name, is_store)
  for_each_statement(block, [&](const Statement& s) {
    if (const auto* ld = std::get_if<LoadStmt>(&s.node)) {
      out.emplace_back(ld->field, false);
    } else if (const auto* st = std::get_if<StoreStmt>(&s.node)) {
      out.emplace_back(st->field, true);
    }
  });
}

// Call-graph cycle check over every body (program, ground truth, spec);
// loop-free bodies plus an acyclic call graph guarantee the interpreter
// terminates.
bool has_call_cycle(const ProgramBundle& b, std::string& witness) {
  std::map<std::string, std::set<std::string>> edges;
  for (const auto& f : b.functions) {
    std::string node = f.name + (f.kind == FunctionKind::LibrarySpec ? "$spec" : "");
    for_each_statement(f.body, [&](const Statement& s) {
      if (const auto* c = std::get_if<CallStmt>(&s.node)) {
        edges[node].insert(c->callee);
      }
    });
  }
  std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<std::string> stack;
  auto dfs = [&](auto&& self, const std::string& n) -> bool {
    state[n] = 1;
    for (const auto& m : edges[n]) {
      if (state[m] == 1) {
        witness = m;
        return true;
      }
      if (state[m] == 0 && self(self, m)) return true;
    }
    state[n] = 2;
    return false;
  };
  for (const auto& [n, _] : edges) {
    if (state[n] == 0 && dfs(dfs, n)) return true;
  }
  return false;
}

}  // namespace

std::vector<Violation> validate_program(const ProgramBundle& b) {
  std::vector<Violation> out;
  for (const auto& f : b.functions) {
    std::vector<std::pair<std::string, bool>> accesses;
    collect_field_accesses(f.body, accesses);
    for (const auto& [field_name, is_store] : accesses) {
      const FieldDecl* fd = b.field(field_name);
      if (fd == nullptr) continue;  // parser rejects undeclared fields
      if (f.kind == FunctionKind::Program && fd->owner == FieldOwner::Library) {
        out.push_back({ViolationKind::SharedFieldViolation,
                       f.name + " accesses library field " + field_name});
      }
      if (f.kind == FunctionKind::LibraryGroundTruth &&
          fd->owner == FieldOwner::Program) {
        out.push_back({ViolationKind::LibraryTouchesProgramField,
                       f.name + " accesses program field " + field_name});
      }
    }
  }
  std::string witness;
  if (has_call_cycle(b, witness)) {
    out.push_back({ViolationKind::RecursionViolation,
                   "call graph cycle through " + witness});
  }
  return out;
}

namespace {

Block rewrite_block(const ProgramBundle& b, const Block& block,
                    std::set<std::string>& needed_getters,
                    std::set<std::string>& needed_setters) {
  Block out;
  for (const Statement& s : block) {
    if (const auto* ld = std::get_if<LoadStmt>(&s.node)) {
      const FieldDecl* fd = b.field(ld->field);
      if (fd != nullptr && fd->owner == FieldOwner::Library) {
        needed_getters.insert(ld->field);
        out.push_back({s.id, CallStmt{ld->target, "get_" + ld->field, {ld->base}}});
        continue;
      }
    } else if (const auto* st = std::get_if<StoreStmt>(&s.node)) {
      const FieldDecl* fd = b.field(st->field);
      if (fd != nullptr && fd->owner == FieldOwner::Library) {
        needed_setters.insert(st->field);
        out.push_back(
            {s.id, CallStmt{"", "set_" + st->field, {st->base, st->source}}});
        continue;
      }
    } else if (const auto* br = std::get_if<BranchStmt>(&s.node)) {
      BranchStmt nb;
      nb.then_block = rewrite_block(b, br->then_block, needed_getters, needed_setters);
      nb.else_block = rewrite_block(b, br->else_block, needed_getters, needed_setters);
      out.push_back({s.id, std::move(nb)});
      continue;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

ProgramBundle rewrite_shared_fields(const ProgramBundle& b) {
  ProgramBundle out = b;
  std::set<std::string> getters;
  std::set<std::string> setters;
  for (auto& f : out.functions) {
    if (f.kind != FunctionKind::Program) continue;
    f.body = rewrite_block(b, f.body, getters, setters);
  }
  for (const auto& field_name : getters) {
    std::string name = "get_" + field_name;
    if (out.callee_decl(name) != nullptr) continue;  // idempotent re-run
    FunctionDecl fd;
    fd.name = name;
    fd.kind = FunctionKind::LibraryGroundTruth;
    fd.params = {"this"};
    fd.body.push_back({name + ":0", LoadStmt{"r", "this", field_name}});
    fd.body.push_back({name + ":1", ReturnStmt{"r"}});
    out.functions.push_back(std::move(fd));
  }
  for (const auto& field_name : setters) {
    std::string name = "set_" + field_name;
    if (out.callee_decl(name) != nullptr) continue;
    FunctionDecl fd;
    fd.name = name;
    fd.kind = FunctionKind::LibraryGroundTruth;
    fd.params = {"this", "v"};
    fd.body.push_back({name + ":0", StoreStmt{"this", field_name, "v"}});
    out.functions.push_back(std::move(fd));
  }
  return out;
}

std::set<std::string> merge_spec_fragment(ProgramBundle& b,
                                          const SpecFragment& frag) {
  std::set<std::string> activated;
  for (const auto& fd : frag.fields) {
    const FieldDecl* existing = b.field(fd.name);
    if (existing == nullptr) {
      b.fields.push_back(fd);
    } else if (existing->owner != fd.owner) {
      throw std::runtime_error("spec fragment redeclares field " + fd.name +
                               " with a different owner");
    }
  }
  for (const auto& spec : frag.specs) {
    if (b.find(spec.name, FunctionKind::LibraryGroundTruth) == nullptr) {
      throw std::runtime_error("spec for unknown library function " + spec.name);
    }
    if (b.spec_of(spec.name) != nullptr) {
      throw std::runtime_error("duplicate spec for " + spec.name);
    }
    b.functions.push_back(spec);
    activated.insert(spec.name);
  }
  for (const auto& [class_name, fn] : frag.proxy_specs) {
    const FunctionDecl* gt = b.find(fn, FunctionKind::LibraryGroundTruth);
    if (gt == nullptr) {
      throw std::runtime_error("proxyspec for unknown library function " + fn);
    }
    if (!b.has_class(class_name)) {
      throw std::runtime_error("proxyspec with unknown class " + class_name);
    }
    std::string var = "r";
    Statement alloc{fn + "__proxy", AllocStmt{var, class_name}};
    Statement ret{fn + "__proxy:ret", ReturnStmt{var}};
    FunctionDecl* spec = nullptr;
    for (auto& f : b.functions) {
      if (f.name == fn && f.kind == FunctionKind::LibrarySpec) spec = &f;
    }
    if (spec == nullptr) {
      FunctionDecl fd;
      fd.name = fn;
      fd.kind = FunctionKind::LibrarySpec;
      fd.params = gt->params;
      fd.body = {alloc, ret};
      b.functions.push_back(std::move(fd));
    } else {
      spec->body.push_back(alloc);
      spec->body.push_back(ret);
    }
    activated.insert(fn);
  }
  return activated;
}

}  // namespace espta::ir
