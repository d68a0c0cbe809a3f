#include "espta/monitor.hpp"

#include <sstream>

namespace espta::monitor {

std::string MonitoringScheme::serialize() const {
  std::set<std::string> lines;
  for (const auto& id : alloc_monitors) lines.insert("alloc " + id);
  for (const auto& id : call_monitors) lines.insert("call " + id);
  for (const auto& id : value_monitors) lines.insert("mon " + id);
  for (const auto& cb : callback_params) {
    lines.insert("cb " + cb.function + " " + std::to_string(cb.param_index));
  }
  for (const auto& fn : callback_reach) lines.insert("cb-reach " + fn);
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += "\n";
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_program_statement(const ir::ProgramBundle& b, Fn&& fn) {
  for (const auto* f : b.program_functions()) {
    ir::for_each_statement(f->body,
                           [&](const ir::Statement& s) { fn(*f, s); });
  }
}

void add_call_monitors(const ir::ProgramBundle& b,
                       const std::set<std::string>& active_specs,
                       MonitoringScheme& scheme) {
  for_each_program_statement(b, [&](const ir::FunctionDecl&,
                                    const ir::Statement& s) {
    if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
      if (b.is_missing(call->callee, active_specs)) {
        scheme.call_monitors.insert(s.id);
      }
    }
  });
}

}  // namespace

CallbackMonitors potential_callbacks(const ir::ProgramBundle& b,
                                     const std::set<std::string>& active_specs) {
  CallbackMonitors out;
  std::vector<const ir::FunctionDecl*> callbacks;
  for (const auto* f : b.program_functions()) {
    if (!f->overrides) continue;
    callbacks.push_back(f);
    for (size_t i = 0; i < f->params.size(); ++i) {
      out.params.insert({f->name, static_cast<int>(i)});
    }
  }
  if (callbacks.empty()) return out;

  // Reachability from the entry through calls whose bodies the analysis
  // sees; the library may still invoke anything it knows about.
  std::set<std::string> reached;
  std::vector<std::string> work{b.entry};
  while (!work.empty()) {
    std::string cur = work.back();
    work.pop_back();
    if (!reached.insert(cur).second) continue;
    const ir::FunctionDecl* decl = b.find(cur, ir::FunctionKind::Program);
    if (decl == nullptr) {
      if (active_specs.count(cur) > 0) decl = b.spec_of(cur);
    }
    if (decl == nullptr) continue;
    ir::for_each_statement(decl->body, [&](const ir::Statement& s) {
      if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
        work.push_back(call->callee);
      }
    });
  }
  for (const auto* cb : callbacks) {
    if (reached.count(cb->name) == 0) out.reach.insert(cb->name);
  }
  return out;
}

MonitoringScheme monitoring_naive(const ir::ProgramBundle& b,
                                  const std::set<std::string>& active_specs) {
  MonitoringScheme scheme;
  for_each_program_statement(b, [&](const ir::FunctionDecl&,
                                    const ir::Statement& s) {
    if (std::holds_alternative<ir::AllocStmt>(s.node)) {
      scheme.alloc_monitors.insert(s.id);
    } else if (std::holds_alternative<ir::AssignStmt>(s.node) ||
               std::holds_alternative<ir::LoadStmt>(s.node)) {
      scheme.value_monitors.insert(s.id);
    } else if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
      if (b.is_missing(call->callee, active_specs)) {
        scheme.call_monitors.insert(s.id);
      } else if (!call->target.empty() &&
                 b.spec_of(call->callee) == nullptr) {
        // Calls to program functions produce values like any assignment.
        // Calls covered by a trusted spec stay unmonitored.
        scheme.value_monitors.insert(s.id);
      }
    }
  });
  auto cb = potential_callbacks(b, active_specs);
  scheme.callback_params = std::move(cb.params);
  scheme.callback_reach = std::move(cb.reach);
  return scheme;
}

MonitoringScheme monitoring_min(const ir::ProgramBundle& b,
                                const std::set<std::string>& active_specs) {
  MonitoringScheme scheme;
  for_each_program_statement(b, [&](const ir::FunctionDecl&,
                                    const ir::Statement& s) {
    if (std::holds_alternative<ir::AllocStmt>(s.node)) {
      scheme.alloc_monitors.insert(s.id);
    }
  });
  add_call_monitors(b, active_specs, scheme);
  auto cb = potential_callbacks(b, active_specs);
  scheme.callback_params = std::move(cb.params);
  scheme.callback_reach = std::move(cb.reach);
  return scheme;
}

MonitoringScheme monitoring_opt(const ir::ProgramBundle& b,
                                const std::set<std::string>& active_specs,
                                const pta::PointsToSet& pi) {
  MonitoringScheme scheme;
  add_call_monitors(b, active_specs, scheme);

  // Sites whose objects pi says may flow into an argument of a missing call.
  std::set<std::string> leaked_sites;
  for (const auto* f : b.program_functions()) {
    ir::for_each_statement(f->body, [&](const ir::Statement& s) {
      const auto* call = std::get_if<ir::CallStmt>(&s.node);
      if (call == nullptr || !b.is_missing(call->callee, active_specs)) return;
      for (const auto& arg : call->args) {
        for (const auto& obj : pi.points_to({f->name, arg})) {
          if (const auto* site = std::get_if<pta::SiteObj>(&obj)) {
            leaked_sites.insert(site->site_id);
          }
        }
      }
    });
  }
  for_each_program_statement(b, [&](const ir::FunctionDecl&,
                                    const ir::Statement& s) {
    if (std::holds_alternative<ir::AllocStmt>(s.node) &&
        leaked_sites.count(s.id) > 0) {
      scheme.alloc_monitors.insert(s.id);
    }
  });
  auto cb = potential_callbacks(b, active_specs);
  scheme.callback_params = std::move(cb.params);
  scheme.callback_reach = std::move(cb.reach);
  return scheme;
}

namespace {

template <typename T>
std::set<T> set_minus(const std::set<T>& a, const std::set<T>& b) {
  std::set<T> out;
  for (const auto& x : a) {
    if (b.count(x) == 0) out.insert(x);
  }
  return out;
}

}  // namespace

SchemeDiff scheme_diff(const MonitoringScheme& before,
                       const MonitoringScheme& after) {
  SchemeDiff d;
  d.added.alloc_monitors = set_minus(after.alloc_monitors, before.alloc_monitors);
  d.added.call_monitors = set_minus(after.call_monitors, before.call_monitors);
  d.added.value_monitors = set_minus(after.value_monitors, before.value_monitors);
  d.added.callback_params = set_minus(after.callback_params, before.callback_params);
  d.added.callback_reach = set_minus(after.callback_reach, before.callback_reach);
  d.removed.alloc_monitors = set_minus(before.alloc_monitors, after.alloc_monitors);
  d.removed.call_monitors = set_minus(before.call_monitors, after.call_monitors);
  d.removed.value_monitors = set_minus(before.value_monitors, after.value_monitors);
  d.removed.callback_params = set_minus(before.callback_params, after.callback_params);
  d.removed.callback_reach = set_minus(before.callback_reach, after.callback_reach);
  return d;
}

}  // namespace espta::monitor
