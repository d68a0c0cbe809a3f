#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "espta/dynexec.hpp"
#include "espta/ir.hpp"
#include "espta/loop.hpp"
#include "espta/pta.hpp"

// Brute-force ground truths the test suites measure everything against:
// exhaustive execution enumeration, full dynamic points-to facts, ideal
// proxy mappings, the whole-program reference analysis, and adversarial
// library constructions for monitor minimality.
namespace espta::oracle {

// Every complete schedule, discovered by extending prefixes until each
// execution consumes its bits exactly. Throws if some execution wants more
// than max_branches bits.
std::vector<dynexec::Schedule> enumerate_executions(const ir::ProgramBundle& b,
                                                    size_t max_branches = 12);

struct AllocInfo {
  std::string origin;
  std::string class_name;
  bool in_program_code = false;
};

struct DynamicOracle {
  // Every bind of a visible variable to an object.
  std::set<std::pair<pta::Var, dynexec::Oid>> edges;
  std::map<dynexec::Oid, AllocInfo> allocs;
  std::vector<dynexec::TraceEvent> trace;
};

DynamicOracle dynamic_pointsto_oracle(const ir::ProgramBundle& b,
                                      const dynexec::Schedule& sched);

// Dynamic footprints of library-allocated objects (the ideal proxies).
std::map<dynexec::Oid, pta::IdealProxyObj> ideal_proxy_mapping(
    const ir::ProgramBundle& b, const dynexec::Schedule& sched);

// The reference analysis: every ground-truth body visible, no missing edges.
pta::PointsToSet whole_program_pta(const ir::ProgramBundle& b);

// The omniscient abstract-object mapping for one execution: sites for
// program allocations, function-footprint proxies for library allocations.
// Objects that reached the program only through spec-trusted calls are
// absent (they cannot be counterexamples relative to trusted specs).
std::map<dynexec::Oid, pta::AbstractObject> true_object_mapping(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    const DynamicOracle& oracle);

// Dynamic edges of the execution whose mapped abstract edge is absent from
// pi; empty iff pi is sound relative to this execution.
pta::MissingEdgeSet oracle_counterexamples(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    const dynexec::Schedule& sched, const pta::PointsToSet& pi);

struct DroppedMonitor {
  enum class Kind { Alloc, Call };
  Kind kind = Kind::Alloc;
  std::string id;  // statement id in the scheme
};

struct AdversarialCase {
  ir::ProgramBundle bundle;     // same program, adversarial ground truth
  dynexec::Schedule schedule;   // reaches the construction
  pta::MissingEdgeSet missed;   // oracle counterexamples of that execution
};

// A library implementation and schedule such that, with dropped removed
// from the optimized scheme, the instrumented run derives no true
// counterexample while the oracle finds one. Returns nullopt when the
// monitor is not realizable this way (e.g. a call monitor on a void call).
std::optional<AdversarialCase> adversarial_drop_library(
    const ir::ProgramBundle& b, const DroppedMonitor& dropped);

}  // namespace espta::oracle
