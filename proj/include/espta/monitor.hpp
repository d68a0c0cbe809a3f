#pragma once

#include <set>
#include <string>

#include "espta/ir.hpp"
#include "espta/pta.hpp"

// Monitoring schemes: which statements an execution instruments. Monitors
// observe only; reports are (statement, concrete object, class) triples.
namespace espta::monitor {

struct CallbackSlot {
  std::string function;
  int param_index = 0;
  auto operator<=>(const CallbackSlot&) const = default;
};

struct MonitoringScheme {
  std::set<std::string> alloc_monitors;  // program-code allocation sites
  std::set<std::string> call_monitors;   // program-code calls to missing code
  // Remaining value-producing program statements (assignments, loads, calls
  // to program functions with a target); populated by the naive scheme only.
  std::set<std::string> value_monitors;
  std::set<CallbackSlot> callback_params;
  std::set<std::string> callback_reach;  // statically-unreached callbacks

  bool monitors_statement(const std::string& id) const {
    return alloc_monitors.count(id) > 0 || call_monitors.count(id) > 0 ||
           value_monitors.count(id) > 0;
  }
  size_t size() const {
    return alloc_monitors.size() + call_monitors.size() +
           value_monitors.size() + callback_params.size() +
           callback_reach.size();
  }
  // `alloc <id>` / `call <id>` / `mon <id>` / `cb <fn> <idx>` /
  // `cb-reach <fn>` lines, sorted.
  std::string serialize() const;

  bool operator==(const MonitoringScheme&) const = default;
};

// Every value-producing program statement plus the usual call monitors;
// the baseline dynamic points-to analysis.
MonitoringScheme monitoring_naive(const ir::ProgramBundle& b,
                                  const std::set<std::string>& active_specs);

// All program allocation sites plus calls to missing functions.
MonitoringScheme monitoring_min(const ir::ProgramBundle& b,
                                const std::set<std::string>& active_specs);

// Call monitors as in monitoring_min; allocation monitors restricted to
// sites whose objects may be passed to missing code under pi. Callers must
// recompute after every pi change.
MonitoringScheme monitoring_opt(const ir::ProgramBundle& b,
                                const std::set<std::string>& active_specs,
                                const pta::PointsToSet& pi);

struct CallbackMonitors {
  std::set<CallbackSlot> params;
  std::set<std::string> reach;
};

// Every parameter of every potential callback (a program function that
// overrides a library function); callbacks unreachable from the entry via
// visible calls additionally get a reached-flag monitor.
CallbackMonitors potential_callbacks(const ir::ProgramBundle& b,
                                     const std::set<std::string>& active_specs);

struct SchemeDiff {
  MonitoringScheme added;
  MonitoringScheme removed;
  bool empty() const { return added == MonitoringScheme{} && removed == MonitoringScheme{}; }
};

SchemeDiff scheme_diff(const MonitoringScheme& before,
                       const MonitoringScheme& after);

}  // namespace espta::monitor
