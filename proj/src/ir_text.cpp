#include <cctype>
#include <sstream>

#include "espta/ir.hpp"

// Line-oriented reader/writer for the IR format:
//
//   class A
//   field f program|library
//   source m
//   sink m
//   func main() program { ... }
//   func add(this, ob) library { ... } spec { ... }
//   func mkStr() library spec { ... }        (spec fragments)
//   proxyspec String mkStr                   (spec fragments)
//
// Statements: `x = new A @site`, `x = y`, `x = y.f`, `x.f = y`,
// `x = call m(a, b)`, `call m(a)`, `return x`,
// `branch { ... } else { ... }`. `#` starts a comment.

namespace espta::ir {
namespace {

struct Line {
  int number = 0;
  std::string text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  int n = 1;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back({n++, cur});
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back({n, cur});
  return lines;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_site_char(char c) { return is_ident_char(c) || c == ':' || c == '$'; }

// Single-line token cursor.
struct Cursor {
  const Line& line;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line.number, static_cast<int>(pos) + 1, what);
  }

  void skip_ws() {
    while (pos < line.text.size() &&
           (line.text[pos] == ' ' || line.text[pos] == '\t')) {
      ++pos;
    }
    if (pos < line.text.size() && line.text[pos] == '#') pos = line.text.size();
  }

  bool at_end() {
    skip_ws();
    return pos >= line.text.size();
  }

  bool peek_is(char c) {
    skip_ws();
    return pos < line.text.size() && line.text[pos] == c;
  }

  bool accept(char c) {
    if (!peek_is(c)) return false;
    ++pos;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool accept_word(std::string_view w) {
    skip_ws();
    if (line.text.compare(pos, w.size(), w) != 0) return false;
    size_t after = pos + w.size();
    if (after < line.text.size() && is_ident_char(line.text[after])) return false;
    pos = after;
    return true;
  }

  std::string ident(const std::string& what) {
    skip_ws();
    if (pos >= line.text.size() || !is_ident_start(line.text[pos])) {
      fail("expected " + what);
    }
    size_t start = pos;
    while (pos < line.text.size() && is_ident_char(line.text[pos])) ++pos;
    return line.text.substr(start, pos - start);
  }

  std::string site_id() {
    skip_ws();
    if (pos >= line.text.size() || !is_site_char(line.text[pos])) {
      fail("expected site id");
    }
    size_t start = pos;
    while (pos < line.text.size() && is_site_char(line.text[pos])) ++pos;
    return line.text.substr(start, pos - start);
  }

  void expect_end() {
    if (!at_end()) fail("trailing input");
  }
};

struct Parser {
  std::vector<Line> lines;
  size_t index = 0;
  bool fragment_mode = false;

  ProgramBundle bundle;
  SpecFragment fragment;
  std::set<std::string> statement_ids;
  std::set<std::string> class_names;
  std::set<std::string> field_names;
  std::set<std::pair<std::string, FunctionKind>> function_keys;

  bool next_content_line(Line& out) {
    while (index < lines.size()) {
      Cursor c{lines[index]};
      if (!c.at_end()) {
        out = lines[index];
        ++index;
        return true;
      }
      ++index;
    }
    return false;
  }

  [[noreturn]] void fail_eof(const std::string& what) {
    int n = lines.empty() ? 1 : lines.back().number;
    throw ParseError(n, 1, what);
  }

  void register_statement_id(const Line& line, const std::string& id) {
    if (!statement_ids.insert(id).second) {
      throw ParseError(line.number, 1, "duplicate statement id " + id);
    }
  }

  Statement parse_statement(const Line& line, const std::string& func,
                            int& counter) {
    Cursor c{line};
    int my_index = counter++;
    std::string auto_id = func + ":" + std::to_string(my_index);

    if (c.accept_word("return")) {
      std::string v = c.ident("variable");
      c.expect_end();
      register_statement_id(line, auto_id);
      return {auto_id, ReturnStmt{v}};
    }
    if (c.accept_word("branch")) {
      c.expect('{');
      c.expect_end();
      BranchStmt br;
      br.then_block = parse_block(func, counter, /*in_branch=*/true);
      // parse_block stops on a `} else {` or `}` line; the former is required.
      Line close = lines[index - 1];
      Cursor cc{close};
      cc.expect('}');
      if (!cc.accept_word("else")) cc.fail("expected 'else'");
      cc.expect('{');
      cc.expect_end();
      br.else_block = parse_block(func, counter, /*in_branch=*/true);
      Line close2 = lines[index - 1];
      Cursor c2{close2};
      c2.expect('}');
      c2.expect_end();
      register_statement_id(line, auto_id);
      return {auto_id, std::move(br)};
    }
    if (c.accept_word("call")) {
      CallStmt call;
      call.callee = c.ident("callee");
      parse_args(c, call.args);
      c.expect_end();
      register_statement_id(line, auto_id);
      return {auto_id, std::move(call)};
    }

    std::string first = c.ident("statement");
    if (c.accept('.')) {
      // x.f = y
      StoreStmt st;
      st.base = first;
      st.field = c.ident("field");
      c.expect('=');
      st.source = c.ident("variable");
      c.expect_end();
      check_field(line, st.field);
      register_statement_id(line, auto_id);
      return {auto_id, std::move(st)};
    }
    c.expect('=');
    if (c.accept_word("new")) {
      AllocStmt a;
      a.target = first;
      a.class_name = c.ident("class");
      std::string id = auto_id;
      if (c.accept('@')) id = c.site_id();
      c.expect_end();
      if (!fragment_mode && class_names.count(a.class_name) == 0) {
        throw ParseError(line.number, 1, "unknown class " + a.class_name);
      }
      register_statement_id(line, id);
      return {id, std::move(a)};
    }
    if (c.accept_word("call")) {
      CallStmt call;
      call.target = first;
      call.callee = c.ident("callee");
      parse_args(c, call.args);
      c.expect_end();
      register_statement_id(line, auto_id);
      return {auto_id, std::move(call)};
    }
    std::string src = c.ident("variable");
    if (c.accept('.')) {
      LoadStmt ld;
      ld.target = first;
      ld.base = src;
      ld.field = c.ident("field");
      c.expect_end();
      check_field(line, ld.field);
      register_statement_id(line, auto_id);
      return {auto_id, std::move(ld)};
    }
    c.expect_end();
    register_statement_id(line, auto_id);
    return {auto_id, AssignStmt{first, src}};
  }

  void check_field(const Line& line, const std::string& name) {
    if (fragment_mode) return;  // fragments may rely on their own field decls
    if (field_names.count(name) == 0) {
      throw ParseError(line.number, 1, "unknown field " + name);
    }
  }

  void parse_args(Cursor& c, std::vector<std::string>& args) {
    c.expect('(');
    if (c.accept(')')) return;
    while (true) {
      args.push_back(c.ident("argument"));
      if (c.accept(')')) return;
      c.expect(',');
    }
  }

  // Parses statements until a line starting with `}`; leaves that line
  // consumed (callers inspect lines[index-1] for its tail).
  Block parse_block(const std::string& func, int& counter, bool in_branch) {
    Block out;
    Line line;
    while (true) {
      if (!next_content_line(line)) fail_eof("unterminated block");
      Cursor c{line};
      if (c.peek_is('}')) return out;
      out.push_back(parse_statement(line, func, counter));
    }
    (void)in_branch;
  }

  void parse_function(const Line& header) {
    Cursor c{header};
    c.accept_word("func");
    FunctionDecl fd;
    fd.name = c.ident("function name");
    c.expect('(');
    if (!c.accept(')')) {
      while (true) {
        fd.params.push_back(c.ident("parameter"));
        if (c.accept(')')) break;
        c.expect(',');
      }
    }
    bool is_library = false;
    if (c.accept_word("program")) {
      fd.kind = FunctionKind::Program;
    } else if (c.accept_word("library")) {
      is_library = true;
    } else {
      c.fail("expected 'program' or 'library'");
    }
    if (c.accept_word("overrides")) {
      fd.overrides = c.ident("overridden function");
    }
    bool spec_only = false;
    if (is_library && c.accept_word("spec")) {
      spec_only = true;
      fd.kind = FunctionKind::LibrarySpec;
    } else if (is_library) {
      fd.kind = FunctionKind::LibraryGroundTruth;
    }
    c.expect('{');
    c.expect_end();

    int counter = 0;
    fd.body = parse_block(fd.name, counter, false);
    register_function(header, fd);

    if (is_library && !spec_only) {
      // The ground-truth close line may be `} spec {`.
      Line close = lines[index - 1];
      Cursor cc{close};
      cc.expect('}');
      if (cc.accept_word("spec")) {
        cc.expect('{');
        cc.expect_end();
        FunctionDecl spec;
        spec.name = fd.name;
        spec.kind = FunctionKind::LibrarySpec;
        spec.params = fd.params;
        spec.body = parse_block(fd.name + "$spec", counter, false);
        Line close2 = lines[index - 1];
        Cursor c2{close2};
        c2.expect('}');
        c2.expect_end();
        register_function(close, spec);
      } else {
        cc.expect_end();
      }
    } else {
      Line close = lines[index - 1];
      Cursor cc{close};
      cc.expect('}');
      cc.expect_end();
    }
  }

  void register_function(const Line& line, FunctionDecl fd) {
    if (!function_keys.insert({fd.name, fd.kind}).second) {
      throw ParseError(line.number, 1, "duplicate function " + fd.name);
    }
    if (fragment_mode && fd.kind != FunctionKind::LibrarySpec) {
      throw ParseError(line.number, 1,
                       "spec fragments may only declare library specs");
    }
    if (fragment_mode) {
      fragment.specs.push_back(std::move(fd));
    } else {
      bundle.functions.push_back(std::move(fd));
    }
  }

  void parse_top_level() {
    Line line;
    while (next_content_line(line)) {
      Cursor c{line};
      if (c.accept_word("class")) {
        if (fragment_mode) c.fail("class declarations not allowed in spec files");
        std::string name = c.ident("class name");
        c.expect_end();
        if (!class_names.insert(name).second) {
          throw ParseError(line.number, 1, "duplicate class " + name);
        }
        bundle.classes.push_back({name});
      } else if (c.accept_word("field")) {
        std::string name = c.ident("field name");
        FieldOwner owner;
        if (c.accept_word("program")) {
          owner = FieldOwner::Program;
        } else if (c.accept_word("library")) {
          owner = FieldOwner::Library;
        } else {
          c.fail("expected 'program' or 'library'");
        }
        c.expect_end();
        if (!field_names.insert(name).second) {
          throw ParseError(line.number, 1, "duplicate field " + name);
        }
        if (fragment_mode) {
          fragment.fields.push_back({name, owner});
        } else {
          bundle.fields.push_back({name, owner});
        }
      } else if (c.accept_word("source")) {
        std::string name = c.ident("function name");
        c.expect_end();
        bundle.sources.push_back(name);
      } else if (c.accept_word("sink")) {
        std::string name = c.ident("function name");
        c.expect_end();
        bundle.sinks.push_back(name);
      } else if (c.accept_word("proxyspec")) {
        if (!fragment_mode) c.fail("proxyspec only allowed in spec files");
        std::string class_name = c.ident("class name");
        std::string fn = c.ident("function name");
        c.expect_end();
        fragment.proxy_specs.emplace_back(class_name, fn);
      } else if (c.accept_word("func")) {
        parse_function(line);
      } else {
        c.fail("unknown directive");
      }
    }
  }

  void resolve_and_check() {
    for (const auto& f : bundle.functions) {
      for_each_statement(f.body, [&](const Statement& s) {
        if (const auto* call = std::get_if<CallStmt>(&s.node)) {
          const FunctionDecl* callee = bundle.callee_decl(call->callee);
          if (callee == nullptr) {
            throw ParseError(1, 1, "unresolved callee " + call->callee);
          }
          if (callee->params.size() != call->args.size()) {
            throw ParseError(1, 1, "arity mismatch calling " + call->callee);
          }
        }
      });
      if (f.overrides) {
        if (bundle.find(*f.overrides, FunctionKind::LibraryGroundTruth) == nullptr) {
          throw ParseError(1, 1, "overrides unknown library function " +
                                     *f.overrides);
        }
      }
    }
    for (const auto& name : bundle.sources) {
      if (bundle.callee_decl(name) == nullptr) {
        throw ParseError(1, 1, "source annotation on unknown function " + name);
      }
    }
    for (const auto& name : bundle.sinks) {
      if (bundle.callee_decl(name) == nullptr) {
        throw ParseError(1, 1, "sink annotation on unknown function " + name);
      }
    }
    const FunctionDecl* entry = bundle.find("main", FunctionKind::Program);
    if (entry == nullptr) fail_eof("no entry function");
    bundle.entry = "main";
  }
};

}  // namespace

ProgramBundle parse_program(std::string_view text) {
  Parser p;
  p.lines = split_lines(text);
  p.parse_top_level();
  p.resolve_and_check();
  return std::move(p.bundle);
}

SpecFragment parse_spec_fragment(std::string_view text) {
  Parser p;
  p.fragment_mode = true;
  p.lines = split_lines(text);
  p.parse_top_level();
  return std::move(p.fragment);
}

namespace {

void print_block(std::ostringstream& out, const Block& block, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  for (const Statement& s : block) {
    if (const auto* a = std::get_if<AllocStmt>(&s.node)) {
      out << pad << a->target << " = new " << a->class_name << " @" << s.id
          << "\n";
    } else if (const auto* as = std::get_if<AssignStmt>(&s.node)) {
      out << pad << as->target << " = " << as->source << "\n";
    } else if (const auto* ld = std::get_if<LoadStmt>(&s.node)) {
      out << pad << ld->target << " = " << ld->base << "." << ld->field << "\n";
    } else if (const auto* st = std::get_if<StoreStmt>(&s.node)) {
      out << pad << st->base << "." << st->field << " = " << st->source << "\n";
    } else if (const auto* call = std::get_if<CallStmt>(&s.node)) {
      out << pad;
      if (!call->target.empty()) out << call->target << " = ";
      out << "call " << call->callee << "(";
      for (size_t i = 0; i < call->args.size(); ++i) {
        if (i > 0) out << ", ";
        out << call->args[i];
      }
      out << ")\n";
    } else if (const auto* ret = std::get_if<ReturnStmt>(&s.node)) {
      out << pad << "return " << ret->var << "\n";
    } else if (const auto* br = std::get_if<BranchStmt>(&s.node)) {
      out << pad << "branch {\n";
      print_block(out, br->then_block, indent + 1);
      out << pad << "} else {\n";
      print_block(out, br->else_block, indent + 1);
      out << pad << "}\n";
    }
  }
}

void print_function(std::ostringstream& out, const FunctionDecl& f,
                    const FunctionDecl* spec) {
  out << "func " << f.name << "(";
  for (size_t i = 0; i < f.params.size(); ++i) {
    if (i > 0) out << ", ";
    out << f.params[i];
  }
  out << ") " << (f.kind == FunctionKind::Program ? "program" : "library");
  if (f.overrides) out << " overrides " << *f.overrides;
  out << " {\n";
  print_block(out, f.body, 1);
  if (spec != nullptr) {
    out << "} spec {\n";
    print_block(out, spec->body, 1);
  }
  out << "}\n";
}

}  // namespace

std::string print_program(const ProgramBundle& b) {
  std::ostringstream out;
  for (const auto& c : b.classes) out << "class " << c.name << "\n";
  for (const auto& f : b.fields) {
    out << "field " << f.name << " "
        << (f.owner == FieldOwner::Program ? "program" : "library") << "\n";
  }
  for (const auto& s : b.sources) out << "source " << s << "\n";
  for (const auto& s : b.sinks) out << "sink " << s << "\n";
  for (const auto& f : b.functions) {
    if (f.kind == FunctionKind::LibrarySpec) continue;  // printed with their GT
    out << "\n";
    print_function(out, f, b.spec_of(f.name));
  }
  return out.str();
}

}  // namespace espta::ir
