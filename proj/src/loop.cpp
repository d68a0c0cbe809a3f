#include "espta/loop.hpp"

#include <sstream>
#include <stdexcept>

namespace espta::loop {

namespace {

// Where a statement lives and what it binds.
struct StatementInfo {
  std::string function;
  const ir::Statement* stmt = nullptr;
};

std::map<std::string, StatementInfo> index_statements(
    const ir::ProgramBundle& b) {
  std::map<std::string, StatementInfo> out;
  for (const auto& f : b.functions) {
    ir::for_each_statement(f.body, [&](const ir::Statement& s) {
      out[s.id] = {f.name, &s};
    });
  }
  return out;
}

}  // namespace

ObjectMapping build_object_mapping(const ir::ProgramBundle& b,
                                   const std::set<std::string>& active_specs,
                                   const std::vector<dynexec::Report>& reports) {
  auto stmts = index_statements(b);

  std::map<dynexec::Oid, std::string> classes;
  std::map<dynexec::Oid, std::string> alloc_site;
  std::map<dynexec::Oid, std::set<std::string>> footprints;

  for (const auto& r : reports) {
    if (r.kind == dynexec::Report::Kind::CallbackReached) continue;
    auto cit = classes.find(r.oid);
    if (cit == classes.end()) {
      classes[r.oid] = r.class_name;
    } else if (cit->second != r.class_name) {
      throw std::logic_error("object " + std::to_string(r.oid) +
                             " reported with classes " + cit->second + " and " +
                             r.class_name);
    }
    if (r.kind == dynexec::Report::Kind::CallbackParam) {
      footprints[r.oid].insert(r.key);
      continue;
    }
    auto it = stmts.find(r.key);
    if (it == stmts.end()) {
      throw std::logic_error("report for unknown statement " + r.key);
    }
    if (std::holds_alternative<ir::AllocStmt>(it->second.stmt->node)) {
      alloc_site[r.oid] = r.key;
    } else if (const auto* call =
                   std::get_if<ir::CallStmt>(&it->second.stmt->node)) {
      if (b.is_missing(call->callee, active_specs)) {
        footprints[r.oid].insert(call->callee);
      }
    }
  }

  ObjectMapping mapping;
  for (const auto& [oid, class_name] : classes) {
    auto ait = alloc_site.find(oid);
    if (ait != alloc_site.end()) {
      mapping.objects[oid] = pta::SiteObj{ait->second, class_name};
      continue;
    }
    auto fit = footprints.find(oid);
    if (fit != footprints.end() && !fit->second.empty()) {
      mapping.objects[oid] = pta::ProxyObj{class_name, fit->second};
    } else {
      ++mapping.unmapped;
    }
  }
  return mapping;
}

pta::MissingEdgeSet derive_counterexamples(
    const ir::ProgramBundle& b, const std::vector<dynexec::Report>& reports,
    const ObjectMapping& mapping, const pta::PointsToSet& pi) {
  auto stmts = index_statements(b);
  pta::MissingEdgeSet delta;
  for (const auto& r : reports) {
    if (r.kind == dynexec::Report::Kind::CallbackReached) continue;
    auto oit = mapping.objects.find(r.oid);
    if (oit == mapping.objects.end()) continue;

    pta::Var var;
    if (r.kind == dynexec::Report::Kind::CallbackParam) {
      // cb:<fn>#<i>
      auto hash_pos = r.key.rfind('#');
      std::string fn = r.key.substr(3, hash_pos - 3);
      int idx = std::stoi(r.key.substr(hash_pos + 1));
      const ir::FunctionDecl* decl = b.find(fn, ir::FunctionKind::Program);
      if (decl == nullptr || idx >= static_cast<int>(decl->params.size())) {
        throw std::logic_error("callback report for unknown slot " + r.key);
      }
      var = {fn, decl->params[static_cast<size_t>(idx)]};
    } else {
      auto sit = stmts.find(r.key);
      if (sit == stmts.end()) {
        throw std::logic_error("report for unknown statement " + r.key);
      }
      const ir::Statement& s = *sit->second.stmt;
      if (std::holds_alternative<ir::AllocStmt>(s.node)) continue;
      std::string target;
      if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
        target = call->target;
      } else if (const auto* as = std::get_if<ir::AssignStmt>(&s.node)) {
        target = as->target;
      } else if (const auto* ld = std::get_if<ir::LoadStmt>(&s.node)) {
        target = ld->target;
      }
      if (target.empty()) continue;
      var = {sit->second.function, target};
    }
    if (!pi.contains(var, oit->second)) {
      delta.edges.insert({var, oit->second});
    }
  }
  return delta;
}

monitor::MonitoringScheme make_scheme(const ir::ProgramBundle& b,
                                      const std::set<std::string>& active_specs,
                                      const pta::PointsToSet& pi,
                                      SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Naive:
      return monitor::monitoring_naive(b, active_specs);
    case SchemeKind::Min:
      return monitor::monitoring_min(b, active_specs);
    case SchemeKind::Opt:
      return monitor::monitoring_opt(b, active_specs, pi);
  }
  throw std::logic_error("bad scheme kind");
}

std::string serialize_counterexamples(const pta::MissingEdgeSet& delta) {
  std::set<std::string> lines;
  for (const auto& e : delta.edges) {
    lines.insert("CE " + pta::to_string(e.var) + " " + pta::to_string(e.obj));
  }
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += "\n";
  }
  return out;
}

LoopResult run_loop(const ir::ProgramBundle& b,
                    const std::set<std::string>& active_specs,
                    const std::vector<dynexec::Schedule>& schedules,
                    const LoopOptions& options) {
  LoopResult state;
  state.pi = pta::compute_pointsto(b, active_specs, state.pi_miss);
  state.scheme = make_scheme(b, active_specs, state.pi, options.scheme);
  if (options.scheme_filter) options.scheme_filter(state.scheme);
  state.history.push_back(state.pi);

  std::ostringstream transcript;

  bool progress = true;
  while (progress) {
    if (static_cast<size_t>(state.passes) >= options.max_passes) {
      throw std::runtime_error("loop failed to converge");
    }
    progress = false;
    ++state.passes;
    for (const auto& sched : schedules) {
      // Re-execution policy: a schedule that produced news is re-run under
      // the updated scheme until it goes silent, so late-added allocation
      // monitors observe their objects.
      while (true) {
        dynexec::ExecResult exec = dynexec::execute(b, state.scheme, sched);
        ObjectMapping mapping =
            build_object_mapping(b, active_specs, exec.reports);
        pta::MissingEdgeSet delta =
            derive_counterexamples(b, exec.reports, mapping, state.pi);

        bool new_reach = false;
        for (const auto& r : exec.reports) {
          if (r.kind == dynexec::Report::Kind::CallbackReached &&
              state.reached_callbacks.insert(r.key.substr(8)).second) {
            new_reach = true;
          }
        }
        for (const auto& [oid, obj] : mapping.objects) {
          if (const auto* proxy = std::get_if<pta::ProxyObj>(&obj)) {
            state.observed_proxies.insert(*proxy);
          }
        }
        state.runs.push_back({sched, exec.reports, delta});

        transcript << "run " << state.passes << " sched=" << sched.to_string()
                   << " reports=" << exec.reports.size()
                   << " delta=" << delta.edges.size() << "\n";
        if (delta.empty()) {
          if (new_reach) progress = true;
          break;
        }
        transcript << serialize_counterexamples(delta);
        state.pi_miss.merge(delta);
        state.pi = pta::compute_pointsto(b, active_specs, state.pi_miss);
        state.history.push_back(state.pi);
        ++state.pi_updates;
        monitor::MonitoringScheme next =
            make_scheme(b, active_specs, state.pi, options.scheme);
        if (options.scheme_filter) options.scheme_filter(next);
        monitor::SchemeDiff diff = monitor::scheme_diff(state.scheme, next);
        transcript << "pi " << state.pi.hash() << " scheme+"
                   << diff.added.size() << " scheme-" << diff.removed.size()
                   << "\n";
        state.scheme = std::move(next);
        progress = true;
      }
    }
  }
  transcript << "converged updates=" << state.pi_updates
             << " passes=" << state.passes << "\n";
  state.transcript = transcript.str();
  return state;
}

}  // namespace espta::loop
