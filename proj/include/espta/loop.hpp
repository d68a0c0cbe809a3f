#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "espta/dynexec.hpp"
#include "espta/ir.hpp"
#include "espta/monitor.hpp"
#include "espta/pta.hpp"

// The eventually-sound driver: execute under the current scheme, map
// reported concrete objects to abstract objects (proxies for library
// allocations), derive counterexamples, grow the missing-edge set, and
// recompute the analysis and instrumentation until every schedule is silent.
namespace espta::loop {

struct ObjectMapping {
  std::map<dynexec::Oid, pta::AbstractObject> objects;
  // Objects observed only through channels trusted specs left unmonitored;
  // they derive no counterexamples.
  int unmapped = 0;
};

// Two passes over one execution's reports: allocation reports give sites,
// everything else accumulates per-object function footprints.
ObjectMapping build_object_mapping(const ir::ProgramBundle& b,
                                   const std::set<std::string>& active_specs,
                                   const std::vector<dynexec::Report>& reports);

// Every call/callback report binding x to an object mapped to a: x↪a unless
// pi already has it. Allocation reports never yield counterexamples.
pta::MissingEdgeSet derive_counterexamples(
    const ir::ProgramBundle& b, const std::vector<dynexec::Report>& reports,
    const ObjectMapping& mapping, const pta::PointsToSet& pi);

enum class SchemeKind { Naive, Min, Opt };

struct LoopOptions {
  SchemeKind scheme = SchemeKind::Opt;
  // Applied after every scheme recomputation (test hook for dropped-monitor
  // experiments). Never set on production paths.
  std::function<void(monitor::MonitoringScheme&)> scheme_filter;
  size_t max_passes = 1000;
};

struct RunRecord {
  dynexec::Schedule schedule;
  std::vector<dynexec::Report> reports;
  pta::MissingEdgeSet delta;
};

struct LoopResult {
  pta::MissingEdgeSet pi_miss;
  pta::PointsToSet pi;
  monitor::MonitoringScheme scheme;
  int pi_updates = 0;
  int passes = 0;
  std::vector<pta::PointsToSet> history;  // every distinct Π, initial first
  std::vector<RunRecord> runs;            // report archive, execution order
  std::set<std::string> reached_callbacks;
  std::set<pta::ProxyObj> observed_proxies;
  std::string transcript;
};

LoopResult run_loop(const ir::ProgramBundle& b,
                    const std::set<std::string>& active_specs,
                    const std::vector<dynexec::Schedule>& schedules,
                    const LoopOptions& options = {});

monitor::MonitoringScheme make_scheme(const ir::ProgramBundle& b,
                                      const std::set<std::string>& active_specs,
                                      const pta::PointsToSet& pi,
                                      SchemeKind kind);

// `CE <var> <obj>` lines, sorted; the counterexample wire format.
std::string serialize_counterexamples(const pta::MissingEdgeSet& delta);

}  // namespace espta::loop
