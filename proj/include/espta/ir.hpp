#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// The analyzed language: a small object-oriented IR with an explicit
// program/library split. Library functions carry a ground-truth body (used
// only by the interpreter) and may carry a spec body (used only by the
// static analysis). Statement ids are stable and unique program-wide;
// allocation ids double as abstract-object names.
namespace espta::ir {

enum class FieldOwner { Program, Library };
enum class FunctionKind { Program, LibraryGroundTruth, LibrarySpec };

struct ClassDecl {
  std::string name;
  auto operator<=>(const ClassDecl&) const = default;
};

struct FieldDecl {
  std::string name;
  FieldOwner owner = FieldOwner::Program;
  auto operator<=>(const FieldDecl&) const = default;
};

struct Statement;
using Block = std::vector<Statement>;

struct AllocStmt {
  std::string target;
  std::string class_name;
  auto operator<=>(const AllocStmt&) const = default;
};

struct AssignStmt {
  std::string target;
  std::string source;
  auto operator<=>(const AssignStmt&) const = default;
};

struct LoadStmt {
  std::string target;
  std::string base;
  std::string field;
  auto operator<=>(const LoadStmt&) const = default;
};

struct StoreStmt {
  std::string base;
  std::string field;
  std::string source;
  auto operator<=>(const StoreStmt&) const = default;
};

struct CallStmt {
  std::string target;  // empty for void calls
  std::string callee;
  std::vector<std::string> args;
  auto operator<=>(const CallStmt&) const = default;
};

struct ReturnStmt {
  std::string var;
  auto operator<=>(const ReturnStmt&) const = default;
};

struct BranchStmt {
  Block then_block;
  Block else_block;
  bool operator==(const BranchStmt&) const;
};

using StatementNode = std::variant<AllocStmt, AssignStmt, LoadStmt, StoreStmt,
                                   CallStmt, ReturnStmt, BranchStmt>;

struct Statement {
  std::string id;
  StatementNode node;
  bool operator==(const Statement&) const = default;
};

struct FunctionDecl {
  std::string name;
  FunctionKind kind = FunctionKind::Program;
  std::vector<std::string> params;
  Block body;
  std::optional<std::string> overrides;  // library function this one overrides
  bool operator==(const FunctionDecl&) const = default;
};

struct ProgramBundle {
  std::vector<ClassDecl> classes;
  std::vector<FieldDecl> fields;
  std::vector<FunctionDecl> functions;
  std::string entry;
  std::vector<std::string> sources;  // annotated library functions
  std::vector<std::string> sinks;

  bool operator==(const ProgramBundle&) const = default;

  const FunctionDecl* find(const std::string& name, FunctionKind kind) const;
  // Program function or library ground truth; spec decls never shadow these.
  const FunctionDecl* callee_decl(const std::string& name) const;
  const FunctionDecl* spec_of(const std::string& name) const;
  const FieldDecl* field(const std::string& name) const;
  bool has_class(const std::string& name) const;

  // Library functions with neither a visible body nor an active spec are
  // missing: calls to them are analysis no-ops and runtime monitor points.
  bool is_missing(const std::string& callee,
                  const std::set<std::string>& active_specs) const;

  std::vector<std::string> library_function_names() const;
  std::vector<const FunctionDecl*> program_functions() const;
};

// Walks every statement of a block in pre-order (branch containers included).
template <typename Fn>
void for_each_statement(const Block& block, Fn&& fn) {
  for (const Statement& s : block) {
    fn(s);
    if (const auto* br = std::get_if<BranchStmt>(&s.node)) {
      for_each_statement(br->then_block, fn);
      for_each_statement(br->else_block, fn);
    }
  }
}

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int line, int column, const std::string& what);
};

// Parses the line-oriented IR format. Statement ids are assigned
// deterministically in file order: an allocation with an explicit `@id`
// keeps that id, every other statement of function f gets `f:<n>` with n
// its pre-order position in the body.
ProgramBundle parse_program(std::string_view text);

// Canonical text form; parse_program(print_program(b)) == b.
std::string print_program(const ProgramBundle& b);

// A spec file: LibrarySpec bodies plus any field declarations they need,
// plus proxy-object specs of the form `proxyspec <class> <fn>`.
struct SpecFragment {
  std::vector<FieldDecl> fields;
  std::vector<FunctionDecl> specs;                          // kind LibrarySpec
  std::vector<std::pair<std::string, std::string>> proxy_specs;  // (class, fn)
};

SpecFragment parse_spec_fragment(std::string_view text);

// Merges spec bodies into the bundle. Proxy specs synthesize a spec body
// `r = new <class> @<fn>__proxy; return r` (appended to an existing spec
// body for the same function, if any). Returns the names of all functions
// that gained a spec.
std::set<std::string> merge_spec_fragment(ProgramBundle& b,
                                          const SpecFragment& frag);

enum class ViolationKind {
  SharedFieldViolation,         // program statement accesses a library field
  LibraryTouchesProgramField,   // ground truth accesses a program field
  RecursionViolation,           // call graph over any bodies has a cycle
};

struct Violation {
  ViolationKind kind;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_program(const ProgramBundle& b);

// Replaces every program access to a library-owned field f by a call to a
// generated library accessor (get_f / set_f) whose ground truth performs
// the original access. Rewritten statements keep their ids; only the
// generated accessor bodies introduce fresh ids. Idempotent.
ProgramBundle rewrite_shared_fields(const ProgramBundle& b);

}  // namespace espta::ir
