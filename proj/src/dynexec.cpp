#include "espta/dynexec.hpp"

#include <sstream>

namespace espta::dynexec {

Schedule Schedule::parse(const std::string& text) {
  Schedule s;
  if (text == "-") return s;
  for (char c : text) {
    if (c == '0') {
      s.bits.push_back(false);
    } else if (c == '1') {
      s.bits.push_back(true);
    } else {
      throw std::runtime_error("bad schedule character: " + std::string(1, c));
    }
  }
  return s;
}

std::string Schedule::to_string() const {
  if (bits.empty()) return "-";
  std::string out;
  for (bool b : bits) out.push_back(b ? '1' : '0');
  return out;
}

namespace {

struct Interp {
  const ir::ProgramBundle& bundle;
  const monitor::MonitoringScheme& scheme;
  const Schedule& sched;

  ExecResult result;
  size_t bit_index = 0;
  std::set<std::string> reach_fired;

  struct Frame {
    const ir::FunctionDecl* fn;
    std::map<std::string, Oid> vars;
    Oid ret = kNull;
    bool returned = false;
  };

  Oid lookup(const Frame& frame, const std::string& var) const {
    auto it = frame.vars.find(var);
    return it == frame.vars.end() ? kNull : it->second;
  }

  bool consume_bit() {
    if (bit_index >= sched.bits.size()) {
      throw ScheduleExhausted(sched.bits.size());
    }
    return sched.bits[bit_index++];
  }

  void record_bind(Frame& frame, const std::string& var, Oid value,
                   const std::string& stmt, BindVia via) {
    frame.vars[var] = value;
    if (value == kNull) return;
    if (frame.fn->kind != ir::FunctionKind::Program) return;
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::Bind;
    ev.oid = value;
    ev.var = {frame.fn->name, var};
    ev.stmt = stmt;
    ev.via = via;
    result.trace.push_back(std::move(ev));
  }

  void maybe_report(const std::string& stmt_id, Oid value) {
    if (value == kNull) return;
    if (!scheme.monitors_statement(stmt_id)) return;
    result.reports.push_back({Report::Kind::Value, stmt_id, value,
                              result.heap[static_cast<size_t>(value)].class_name});
  }

  Oid call_function(const std::string& callee, const std::vector<Oid>& args,
                    bool caller_is_library) {
    const ir::FunctionDecl* decl = bundle.callee_decl(callee);
    if (decl == nullptr) throw ExecError("call to undeclared function " + callee);
    if (decl->kind == ir::FunctionKind::LibrarySpec) {
      throw ExecError("spec bodies never execute: " + callee);
    }
    Frame frame{decl, {}, kNull, false};
    bool entering_program_from_library =
        caller_is_library && decl->kind == ir::FunctionKind::Program;
    if (decl->kind == ir::FunctionKind::Program &&
        scheme.callback_reach.count(decl->name) > 0 &&
        reach_fired.insert(decl->name).second) {
      result.reports.push_back(
          {Report::Kind::CallbackReached, "cbreach:" + decl->name, kNull, ""});
    }
    for (size_t i = 0; i < decl->params.size(); ++i) {
      Oid v = i < args.size() ? args[i] : kNull;
      if (entering_program_from_library) {
        record_bind(frame, decl->params[i], v,
                    "cb:" + decl->name + "#" + std::to_string(i),
                    {BindVia::Kind::LibraryParam, decl->name,
                     static_cast<int>(i)});
        if (v != kNull &&
            scheme.callback_params.count(
                {decl->name, static_cast<int>(i)}) > 0) {
          result.reports.push_back(
              {Report::Kind::CallbackParam,
               "cb:" + decl->name + "#" + std::to_string(i), v,
               result.heap[static_cast<size_t>(v)].class_name});
        }
      } else {
        // Parameter passing through a visible call is a pure copy; the
        // argument's own bind is already in the trace.
        frame.vars[decl->params[i]] = v;
      }
    }
    exec_block(decl->body, frame);
    return frame.ret;
  }

  void exec_block(const ir::Block& block, Frame& frame) {
    for (const ir::Statement& s : block) {
      if (frame.returned) return;
      exec_statement(s, frame);
    }
  }

  void exec_statement(const ir::Statement& s, Frame& frame) {
    bool in_library = frame.fn->kind == ir::FunctionKind::LibraryGroundTruth;
    if (const auto* a = std::get_if<ir::AllocStmt>(&s.node)) {
      Oid oid = static_cast<Oid>(result.heap.size());
      result.heap.push_back({oid, a->class_name, s.id, {}});
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::Alloc;
      ev.oid = oid;
      ev.origin = s.id;
      ev.class_name = a->class_name;
      result.trace.push_back(std::move(ev));
      record_bind(frame, a->target, oid, s.id, {});
      maybe_report(s.id, oid);
    } else if (const auto* as = std::get_if<ir::AssignStmt>(&s.node)) {
      Oid v = lookup(frame, as->source);
      record_bind(frame, as->target, v, s.id, {});
      maybe_report(s.id, v);
    } else if (const auto* ld = std::get_if<ir::LoadStmt>(&s.node)) {
      Oid base = lookup(frame, ld->base);
      Oid v = kNull;
      if (base != kNull) {
        const auto& fields = result.heap[static_cast<size_t>(base)].fields;
        auto it = fields.find(ld->field);
        if (it != fields.end()) v = it->second;
      }
      record_bind(frame, ld->target, v, s.id, {});
      maybe_report(s.id, v);
    } else if (const auto* st = std::get_if<ir::StoreStmt>(&s.node)) {
      Oid base = lookup(frame, st->base);
      if (base != kNull) {
        result.heap[static_cast<size_t>(base)].fields[st->field] =
            lookup(frame, st->source);
      }
    } else if (const auto* call = std::get_if<ir::CallStmt>(&s.node)) {
      std::vector<Oid> args;
      args.reserve(call->args.size());
      for (const auto& a : call->args) args.push_back(lookup(frame, a));
      Oid ret = call_function(call->callee, args, in_library);
      if (!call->target.empty()) {
        record_bind(frame, call->target, ret, s.id,
                    {BindVia::Kind::CallReturn, call->callee, 0});
        maybe_report(s.id, ret);
      }
    } else if (const auto* ret = std::get_if<ir::ReturnStmt>(&s.node)) {
      frame.ret = lookup(frame, ret->var);
      frame.returned = true;
    } else if (const auto* br = std::get_if<ir::BranchStmt>(&s.node)) {
      if (consume_bit()) {
        exec_block(br->then_block, frame);
      } else {
        exec_block(br->else_block, frame);
      }
    }
  }
};

}  // namespace

ExecResult execute(const ir::ProgramBundle& b,
                   const monitor::MonitoringScheme& scheme,
                   const Schedule& sched) {
  Interp interp{b, scheme, sched, {}, 0, {}};
  const ir::FunctionDecl* entry = b.find(b.entry, ir::FunctionKind::Program);
  if (entry == nullptr) throw ExecError("no entry function");
  interp.call_function(entry->name, {}, /*caller_is_library=*/false);
  interp.result.bits_consumed = interp.bit_index;
  return std::move(interp.result);
}

std::string serialize_reports(const std::vector<Report>& reports) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << "R " << r.key << " ";
    if (r.oid == kNull) {
      out << "-";
    } else {
      out << r.oid;
    }
    out << " " << (r.class_name.empty() ? "-" : r.class_name) << "\n";
  }
  return out.str();
}

std::string serialize_trace(const std::vector<TraceEvent>& trace) {
  std::ostringstream out;
  for (const auto& ev : trace) {
    if (ev.kind == TraceEvent::Kind::Alloc) {
      out << "A " << ev.oid << " " << ev.origin << "\n";
    } else {
      out << "B " << pta::to_string(ev.var) << " " << ev.oid << "\n";
    }
  }
  return out.str();
}

}  // namespace espta::dynexec
