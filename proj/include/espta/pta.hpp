#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "espta/ir.hpp"

// Flow- and context-insensitive points-to fixpoint over the visible code
// (program functions plus active spec bodies), with reported counterexamples
// injected as base facts. Abstract objects are allocation sites in visible
// code or proxy objects standing for library-internal allocations.
namespace espta::pta {

// Variables are function-scoped; the synthetic name `$ret` carries a
// function's return value.
struct Var {
  std::string func;
  std::string name;
  auto operator<=>(const Var&) const = default;
};

inline constexpr const char* kReturnVar = "$ret";

std::string to_string(const Var& v);

struct SiteObj {
  std::string site_id;  // unique program-wide, so ordering ignores the class
  std::string class_name;
  auto operator<=>(const SiteObj& o) const { return site_id <=> o.site_id; }
  bool operator==(const SiteObj& o) const { return site_id == o.site_id; }
};

struct ProxyObj {
  std::string class_name;
  std::set<std::string> footprint;  // missing functions / callback slots
  auto operator<=>(const ProxyObj&) const = default;
};

// Test-only abstraction: the dynamic footprint as a set of visible variables.
struct IdealProxyObj {
  std::set<Var> footprint;
  auto operator<=>(const IdealProxyObj&) const = default;
};

using AbstractObject = std::variant<SiteObj, ProxyObj, IdealProxyObj>;

std::string to_string(const AbstractObject& obj);
std::string class_of(const AbstractObject& obj);  // empty for ideal proxies

struct Edge {
  Var var;
  AbstractObject obj;
  auto operator<=>(const Edge&) const = default;
};

struct MissingEdgeSet {
  std::set<Edge> edges;
  bool empty() const { return edges.empty(); }
  void merge(const MissingEdgeSet& other) {
    edges.insert(other.edges.begin(), other.edges.end());
  }
  auto operator<=>(const MissingEdgeSet&) const = default;
};

class PointsToSet {
 public:
  const std::set<AbstractObject>& points_to(const Var& v) const;
  bool contains(const Var& v, const AbstractObject& obj) const;
  bool contains(const Edge& e) const { return contains(e.var, e.obj); }

  // Variables clients may query: all variables of program functions.
  bool is_program_var(const Var& v) const { return program_vars_.count(v) > 0; }
  const std::set<Var>& program_vars() const { return program_vars_; }

  void add(const Var& v, const AbstractObject& obj) { pts_[v].insert(obj); }
  void set_program_vars(std::set<Var> vars) { program_vars_ = std::move(vars); }

  std::set<Edge> edges() const;          // every edge, spec variables included
  std::set<Edge> program_edges() const;  // restricted to program variables

  // One `var -> obj` line per program-variable edge, sorted; the golden and
  // persisted format.
  std::string serialize() const;
  // 64-bit FNV-1a of serialize(), in hex.
  std::string hash() const;

  bool operator==(const PointsToSet&) const = default;

 private:
  std::map<Var, std::set<AbstractObject>> pts_;
  std::set<Var> program_vars_;
};

// Which bodies the analysis sees for library functions.
enum class CodeView {
  ActiveSpecs,  // spec bodies of the active set; other library code missing
  GroundTruth,  // every ground-truth body visible (whole-program reference)
};

PointsToSet compute_pointsto(const ir::ProgramBundle& b,
                             const std::set<std::string>& active_specs,
                             const MissingEdgeSet& pi_miss,
                             CodeView view = CodeView::ActiveSpecs);

// All variables clients may query, in deterministic order.
std::set<Var> collect_program_vars(const ir::ProgramBundle& b);

struct UnknownVariable : std::runtime_error {
  explicit UnknownVariable(const Var& v);
};

// pts(x) and pts(y) intersect. Both must be program variables.
bool may_alias(const PointsToSet& pi, const Var& x, const Var& y);

// Classes of every abstract object x may point to.
std::set<std::string> points_to_classes(const PointsToSet& pi, const Var& x);

// (source function, sink function) pairs such that a value returned by the
// source can reach a sink argument through assignments, visible calls, and
// heap flows witnessed by shared points-to edges.
std::set<std::pair<std::string, std::string>> taint_flows(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    const PointsToSet& pi);

// Parses one serialized edge, `<func>::<name> -> site:<id>` or
// `<func>::<name> -> proxy:<class>:{m1,m2}`. Used by the CLI query path.
Edge parse_edge(const std::string& line, const ir::ProgramBundle& b);

std::string fnv1a_hex(std::string_view data);

}  // namespace espta::pta
