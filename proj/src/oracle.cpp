#include "espta/oracle.hpp"

#include <algorithm>

#include "espta/monitor.hpp"

namespace espta::oracle {

namespace {

const monitor::MonitoringScheme kNoMonitors{};

std::map<std::string, const ir::FunctionDecl*> function_of_statement(
    const ir::ProgramBundle& b) {
  std::map<std::string, const ir::FunctionDecl*> out;
  for (const auto& f : b.functions) {
    ir::for_each_statement(f.body,
                           [&](const ir::Statement& s) { out[s.id] = &f; });
  }
  return out;
}

}  // namespace

std::vector<dynexec::Schedule> enumerate_executions(const ir::ProgramBundle& b,
                                                    size_t max_branches) {
  std::vector<dynexec::Schedule> complete;
  std::vector<dynexec::Schedule> pending{dynexec::Schedule{}};
  while (!pending.empty()) {
    dynexec::Schedule s = std::move(pending.back());
    pending.pop_back();
    try {
      dynexec::ExecResult r = dynexec::execute(b, kNoMonitors, s);
      if (r.bits_consumed == s.bits.size()) {
        complete.push_back(std::move(s));
      }
      // Prefixes grow one bit at a time, exactly when the previous attempt
      // ran out, so a completed run always consumed its bits exactly.
    } catch (const dynexec::ScheduleExhausted&) {
      if (s.bits.size() >= max_branches) {
        throw std::runtime_error("branch count exceeds configured cap of " +
                                 std::to_string(max_branches));
      }
      dynexec::Schedule t = s;
      t.bits.push_back(false);
      pending.push_back(std::move(t));
      s.bits.push_back(true);
      pending.push_back(std::move(s));
    }
  }
  std::sort(complete.begin(), complete.end());
  return complete;
}

DynamicOracle dynamic_pointsto_oracle(const ir::ProgramBundle& b,
                                      const dynexec::Schedule& sched) {
  dynexec::ExecResult r = dynexec::execute(b, kNoMonitors, sched);
  auto fn_of = function_of_statement(b);
  DynamicOracle out;
  for (const auto& ev : r.trace) {
    if (ev.kind == dynexec::TraceEvent::Kind::Alloc) {
      auto it = fn_of.find(ev.origin);
      bool in_program =
          it != fn_of.end() && it->second->kind == ir::FunctionKind::Program;
      out.allocs[ev.oid] = {ev.origin, ev.class_name, in_program};
    } else {
      out.edges.insert({ev.var, ev.oid});
    }
  }
  out.trace = std::move(r.trace);
  return out;
}

std::map<dynexec::Oid, pta::IdealProxyObj> ideal_proxy_mapping(
    const ir::ProgramBundle& b, const dynexec::Schedule& sched) {
  DynamicOracle oracle = dynamic_pointsto_oracle(b, sched);
  std::map<dynexec::Oid, pta::IdealProxyObj> out;
  for (const auto& [oid, info] : oracle.allocs) {
    if (!info.in_program_code) out[oid] = {};
  }
  for (const auto& [var, oid] : oracle.edges) {
    auto it = out.find(oid);
    if (it != out.end()) it->second.footprint.insert(var);
  }
  // Library objects never seen by a visible variable carry no information.
  for (auto it = out.begin(); it != out.end();) {
    if (it->second.footprint.empty()) {
      it = out.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

pta::PointsToSet whole_program_pta(const ir::ProgramBundle& b) {
  return pta::compute_pointsto(b, {}, {}, pta::CodeView::GroundTruth);
}

std::map<dynexec::Oid, pta::AbstractObject> true_object_mapping(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    const DynamicOracle& oracle) {
  std::map<dynexec::Oid, std::set<std::string>> footprints;
  for (const auto& ev : oracle.trace) {
    if (ev.kind != dynexec::TraceEvent::Kind::Bind) continue;
    if (ev.via.kind == dynexec::BindVia::Kind::CallReturn &&
        b.is_missing(ev.via.callee, active_specs)) {
      footprints[ev.oid].insert(ev.via.callee);
    } else if (ev.via.kind == dynexec::BindVia::Kind::LibraryParam) {
      footprints[ev.oid].insert("cb:" + ev.via.callee + "#" +
                                std::to_string(ev.via.param_index));
    }
  }
  std::map<dynexec::Oid, pta::AbstractObject> out;
  for (const auto& [oid, info] : oracle.allocs) {
    if (info.in_program_code) {
      out[oid] = pta::SiteObj{info.origin, info.class_name};
    } else if (auto it = footprints.find(oid);
               it != footprints.end() && !it->second.empty()) {
      out[oid] = pta::ProxyObj{info.class_name, it->second};
    }
  }
  return out;
}

pta::MissingEdgeSet oracle_counterexamples(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    const dynexec::Schedule& sched, const pta::PointsToSet& pi) {
  DynamicOracle oracle = dynamic_pointsto_oracle(b, sched);
  auto mapping = true_object_mapping(b, active_specs, oracle);
  pta::MissingEdgeSet missing;
  for (const auto& [var, oid] : oracle.edges) {
    auto it = mapping.find(oid);
    if (it == mapping.end()) continue;
    if (!pi.contains(var, it->second)) missing.edges.insert({var, it->second});
  }
  return missing;
}

namespace {

// One execution under the optimized scheme minus the dropped monitor;
// returns what that run would report as counterexamples.
pta::MissingEdgeSet reduced_scheme_delta(const ir::ProgramBundle& b,
                                         const DroppedMonitor& dropped,
                                         const dynexec::Schedule& sched,
                                         const pta::PointsToSet& pi0) {
  monitor::MonitoringScheme scheme = monitor::monitoring_opt(b, {}, pi0);
  if (dropped.kind == DroppedMonitor::Kind::Alloc) {
    scheme.alloc_monitors.erase(dropped.id);
  } else {
    scheme.call_monitors.erase(dropped.id);
  }
  dynexec::ExecResult r = dynexec::execute(b, scheme, sched);
  loop::ObjectMapping mapping = loop::build_object_mapping(b, {}, r.reports);
  return loop::derive_counterexamples(b, r.reports, mapping, pi0);
}

bool intersect_empty(const pta::MissingEdgeSet& a,
                     const pta::MissingEdgeSet& b) {
  return std::none_of(a.edges.begin(), a.edges.end(), [&](const pta::Edge& e) {
    return b.edges.count(e) > 0;
  });
}

// Replaces every library ground-truth body; names absent from bodies get a
// no-op body.
ir::ProgramBundle with_library(const ir::ProgramBundle& b,
                               const std::map<std::string, ir::Block>& bodies) {
  ir::ProgramBundle out = b;
  for (auto& f : out.functions) {
    if (f.kind != ir::FunctionKind::LibraryGroundTruth) continue;
    auto it = bodies.find(f.name);
    f.body = it == bodies.end() ? ir::Block{} : it->second;
  }
  return out;
}

std::optional<AdversarialCase> check_candidate(const ir::ProgramBundle& adv,
                                               const DroppedMonitor& dropped) {
  pta::PointsToSet pi0 = pta::compute_pointsto(adv, {}, {});
  for (const auto& sched : enumerate_executions(adv)) {
    pta::MissingEdgeSet truth = oracle_counterexamples(adv, {}, sched, pi0);
    if (truth.empty()) continue;
    pta::MissingEdgeSet derived = reduced_scheme_delta(adv, dropped, sched, pi0);
    if (intersect_empty(derived, truth)) {
      return AdversarialCase{adv, sched, truth};
    }
  }
  return std::nullopt;
}

const ir::CallStmt* find_call(const ir::ProgramBundle& b,
                              const std::string& stmt_id) {
  const ir::CallStmt* call = nullptr;
  for (const auto* f : b.program_functions()) {
    ir::for_each_statement(f->body, [&](const ir::Statement& s) {
      if (s.id == stmt_id) call = std::get_if<ir::CallStmt>(&s.node);
    });
  }
  return call;
}

}  // namespace

std::optional<AdversarialCase> adversarial_drop_library(
    const ir::ProgramBundle& b, const DroppedMonitor& dropped) {
  pta::PointsToSet pi0 = pta::compute_pointsto(b, {}, {});
  monitor::MonitoringScheme scheme = monitor::monitoring_opt(b, {}, pi0);
  if (dropped.kind == DroppedMonitor::Kind::Alloc
          ? scheme.alloc_monitors.count(dropped.id) == 0
          : scheme.call_monitors.count(dropped.id) == 0) {
    throw std::invalid_argument("dropped monitor " + dropped.id +
                                " is not in the scheme");
  }

  if (dropped.kind == DroppedMonitor::Kind::Call) {
    // The callee returns a fresh object, everything else is a no-op; the
    // fresh object's proxy edge is only visible through this one monitor.
    if (b.classes.empty()) return std::nullopt;
    const ir::CallStmt* call = find_call(b, dropped.id);
    if (call == nullptr || call->target.empty()) return std::nullopt;
    ir::Block body;
    body.push_back({call->callee + "__adv",
                    ir::AllocStmt{"fresh", b.classes.front().name}});
    body.push_back({call->callee + "__adv:ret", ir::ReturnStmt{"fresh"}});
    ir::ProgramBundle adv = with_library(b, {{call->callee, body}});
    return check_candidate(adv, dropped);
  }

  // Dropped allocation monitor: some missing function receiving the site's
  // object returns its parameter; the object comes back under a wrong proxy
  // while the true site edge goes unreported.
  std::vector<std::pair<std::string, size_t>> candidates;  // (callee, arg pos)
  for (const auto* f : b.program_functions()) {
    ir::for_each_statement(f->body, [&](const ir::Statement& s) {
      const auto* call = std::get_if<ir::CallStmt>(&s.node);
      if (call == nullptr || call->target.empty()) return;
      const ir::FunctionDecl* decl = b.callee_decl(call->callee);
      if (decl == nullptr || decl->kind != ir::FunctionKind::LibraryGroundTruth) {
        return;
      }
      for (size_t i = 0; i < call->args.size(); ++i) {
        candidates.emplace_back(call->callee, i);
      }
    });
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  for (const auto& [callee, arg_pos] : candidates) {
    const ir::FunctionDecl* decl =
        b.find(callee, ir::FunctionKind::LibraryGroundTruth);
    if (arg_pos >= decl->params.size()) continue;
    ir::Block body;
    body.push_back(
        {callee + "__adv:ret", ir::ReturnStmt{decl->params[arg_pos]}});
    ir::ProgramBundle adv = with_library(b, {{callee, body}});
    if (auto found = check_candidate(adv, dropped)) return found;
  }
  return std::nullopt;
}

}  // namespace espta::oracle
