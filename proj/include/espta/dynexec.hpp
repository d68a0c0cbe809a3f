#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "espta/ir.hpp"
#include "espta/monitor.hpp"
#include "espta/pta.hpp"

// Deterministic interpreter. Library calls execute ground-truth bodies
// (specs never execute); branches consume bits from an explicit schedule;
// monitored statements that bind a non-null object emit reports.
namespace espta::dynexec {

using Oid = long long;
inline constexpr Oid kNull = -1;

struct Schedule {
  std::vector<bool> bits;

  static Schedule parse(const std::string& text);  // "01", "-" for empty
  std::string to_string() const;
  auto operator<=>(const Schedule&) const = default;
};

struct ConcreteObject {
  Oid oid = kNull;
  std::string class_name;
  std::string origin;  // allocation statement id (oracle use only)
  std::map<std::string, Oid> fields;
};

struct Report {
  enum class Kind { Value, CallbackParam, CallbackReached };
  Kind kind = Kind::Value;
  // Statement id, `cb:<fn>#<i>`, or `cbreach:<fn>`.
  std::string key;
  Oid oid = kNull;
  std::string class_name;
  auto operator<=>(const Report&) const = default;
};

// How a variable received its value; drives proxy footprints.
struct BindVia {
  enum class Kind { Plain, CallReturn, LibraryParam };
  Kind kind = Kind::Plain;
  std::string callee;   // CallReturn: called function; LibraryParam: callback
  int param_index = 0;  // LibraryParam only
  auto operator<=>(const BindVia&) const = default;
};

struct TraceEvent {
  enum class Kind { Alloc, Bind };
  Kind kind = Kind::Alloc;
  Oid oid = kNull;
  std::string origin;      // Alloc only
  std::string class_name;  // Alloc only
  pta::Var var;            // Bind only
  std::string stmt;        // Bind only: statement id or callback marker
  BindVia via;             // Bind only
  auto operator<=>(const TraceEvent&) const = default;
};

struct ExecResult {
  std::vector<Report> reports;
  std::vector<TraceEvent> trace;
  std::vector<ConcreteObject> heap;  // final state, indexed by oid
  size_t bits_consumed = 0;
};

struct ScheduleExhausted : std::runtime_error {
  size_t bits_provided;
  explicit ScheduleExhausted(size_t provided)
      : std::runtime_error("schedule exhausted after " +
                           std::to_string(provided) + " bits"),
        bits_provided(provided) {}
};

struct ExecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExecResult execute(const ir::ProgramBundle& b,
                   const monitor::MonitoringScheme& scheme,
                   const Schedule& sched);

// `R <stmt-or-cb> <oid> <class>` lines, execution order.
std::string serialize_reports(const std::vector<Report>& reports);
// `A <oid> <origin>` and `B <var> <oid>` lines, execution order.
std::string serialize_trace(const std::vector<TraceEvent>& trace);

}  // namespace espta::dynexec
