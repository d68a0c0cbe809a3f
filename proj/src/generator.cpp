#include "espta/generator.hpp"

#include <random>
#include <sstream>
#include <vector>

namespace espta::generator {

namespace {

// mt19937_64 output is pinned by the standard; modulo keeps the stream
// platform-independent, which std::uniform_int_distribution would not.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(unsigned long long seed) : engine(seed) {}
  int below(int n) { return static_cast<int>(engine() % static_cast<unsigned long long>(n)); }
  bool chance(int num, int den) { return below(den) < num; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<size_t>(below(static_cast<int>(v.size())))];
  }
};

struct LibraryFn {
  std::string name;
  std::vector<std::string> params;
  int body_kind = 0;  // 0 no-op, 1 return-param, 2 return-fresh,
                      // 3 store-param-into-receiver-field, 4 load-receiver-field
};

struct Gen {
  Rng rng;
  const GenOptions& options;
  std::ostringstream out;

  std::vector<std::string> classes;
  std::vector<std::string> program_fields;
  std::vector<std::string> library_fields;
  std::vector<LibraryFn> libs;
  bool has_helper = false;
  bool has_callback = false;
  int branches_left;
  int site_counter = 0;

  Gen(unsigned long long seed, const GenOptions& opts)
      : rng(seed), options(opts), branches_left(opts.max_branches) {}

  std::vector<std::string> statement_fields() {
    // Fields program statements may touch.
    std::vector<std::string> fields = program_fields;
    if (options.allow_shared_fields) {
      fields.insert(fields.end(), library_fields.begin(), library_fields.end());
    }
    return fields;
  }

  void declare_types() {
    static const char* kClassNames[] = {"A", "B", "C"};
    int n_classes = 1 + rng.below(3);
    for (int i = 0; i < n_classes; ++i) {
      classes.push_back(kClassNames[i]);
      out << "class " << kClassNames[i] << "\n";
    }
    int n_fields = 1 + rng.below(3);
    for (int i = 0; i < n_fields; ++i) {
      std::string name = "f" + std::to_string(i);
      // Library behaviors need a library field to exist.
      bool library = i == 0 || rng.chance(1, 2);
      out << "field " << name << " " << (library ? "library" : "program")
          << "\n";
      (library ? library_fields : program_fields).push_back(name);
    }
  }

  void declare_libraries() {
    int n_libs = rng.below(5);  // 0..4
    for (int i = 0; i < n_libs; ++i) {
      LibraryFn fn;
      fn.name = "lib" + std::to_string(i);
      fn.params.push_back("this");
      if (rng.chance(2, 3)) fn.params.push_back("ob");
      fn.body_kind = rng.below(5);
      if (fn.body_kind == 3 && fn.params.size() < 2) fn.body_kind = 1;
      libs.push_back(fn);
    }
    for (size_t i = 0; i < libs.size(); ++i) {
      const LibraryFn& fn = libs[i];
      out << "\nfunc " << fn.name << "(";
      for (size_t p = 0; p < fn.params.size(); ++p) {
        if (p > 0) out << ", ";
        out << fn.params[p];
      }
      out << ") library {\n";
      switch (fn.body_kind) {
        case 0:
          break;
        case 1:
          out << "  return " << rng.pick(fn.params) << "\n";
          break;
        case 2:
          out << "  t = new " << rng.pick(classes) << " @" << fn.name
              << "_o\n";
          out << "  return t\n";
          break;
        case 3:
          out << "  this." << rng.pick(library_fields) << " = ob\n";
          break;
        case 4:
          out << "  r = this." << rng.pick(library_fields) << "\n";
          out << "  return r\n";
          break;
      }
      if (options.with_callbacks && i == 0) {
        // The library hands an object to a callback it knows about.
        has_callback = true;
        if (rng.chance(1, 2) && fn.params.size() > 1) {
          out << "  call cb0(ob)\n";
        } else {
          out << "  cbarg = new " << rng.pick(classes) << " @" << fn.name
              << "_cb\n";
          out << "  call cb0(cbarg)\n";
        }
      }
      out << "}\n";
    }
  }

  std::string fresh_site() { return "o" + std::to_string(site_counter++); }

  void emit_statement(const std::string& indent,
                      std::vector<std::string>& vars, int depth) {
    int kind = rng.below(12);
    std::string target = rng.pick(vars);
    std::vector<std::string> fields = statement_fields();
    switch (kind) {
      case 0:
      case 1:
      case 2:
        out << indent << target << " = new " << rng.pick(classes) << " @"
            << fresh_site() << "\n";
        return;
      case 3:
      case 4:
        out << indent << target << " = " << rng.pick(vars) << "\n";
        return;
      case 5:
        if (!fields.empty()) {
          out << indent << rng.pick(vars) << "." << rng.pick(fields) << " = "
              << rng.pick(vars) << "\n";
          return;
        }
        [[fallthrough]];
      case 6:
        if (!fields.empty()) {
          out << indent << target << " = " << rng.pick(vars) << "."
              << rng.pick(fields) << "\n";
          return;
        }
        [[fallthrough]];
      case 7:
      case 8:
      case 9:
        if (!libs.empty()) {
          const LibraryFn& fn = rng.pick(libs);
          bool with_target = rng.chance(2, 3);
          out << indent;
          if (with_target) out << target << " = ";
          out << "call " << fn.name << "(";
          for (size_t p = 0; p < fn.params.size(); ++p) {
            if (p > 0) out << ", ";
            out << rng.pick(vars);
          }
          out << ")\n";
          return;
        }
        [[fallthrough]];
      case 10:
        if (branches_left > 0 && depth < 2) {
          --branches_left;
          out << indent << "branch {\n";
          int then_n = 1 + rng.below(3);
          for (int i = 0; i < then_n; ++i) {
            emit_statement(indent + "  ", vars, depth + 1);
          }
          out << indent << "} else {\n";
          int else_n = rng.below(3);
          for (int i = 0; i < else_n; ++i) {
            emit_statement(indent + "  ", vars, depth + 1);
          }
          out << indent << "}\n";
          return;
        }
        [[fallthrough]];
      default:
        out << indent << target << " = " << rng.pick(vars) << "\n";
        return;
    }
  }

  void emit_program_function(const std::string& name, bool may_call_helper,
                             bool with_return) {
    std::vector<std::string> vars{"x0", "x1", "x2", "x3"};
    out << "\nfunc " << name << "() program {\n";
    // Anchor every function with an allocation so each program has sites
    // and bound variables.
    out << "  " << vars[0] << " = new " << rng.pick(classes) << " @"
        << fresh_site() << "\n";
    int n = 2 + rng.below(18);
    for (int i = 0; i < n; ++i) {
      if (may_call_helper && has_helper && rng.chance(1, 10)) {
        if (rng.chance(1, 2)) {
          out << "  " << rng.pick(vars) << " = call helper()\n";
        } else {
          out << "  call helper()\n";
        }
        continue;
      }
      emit_statement("  ", vars, 0);
    }
    if (with_return) out << "  return " << rng.pick(vars) << "\n";
    out << "}\n";
  }

  void emit_callback() {
    out << "\nfunc cb0(p0) program overrides " << libs[0].name << " {\n";
    out << "  y0 = p0\n";
    if (!program_fields.empty() && rng.chance(1, 2)) {
      out << "  y0." << program_fields[0] << " = p0\n";
    }
    out << "}\n";
  }

  std::string run() {
    declare_types();
    declare_libraries();
    has_helper = rng.chance(1, 3);
    if (has_helper) emit_program_function("helper", false, true);
    emit_program_function("main", true, false);
    if (has_callback) emit_callback();
    return out.str();
  }
};

}  // namespace

std::string generate_program_text(unsigned long long seed,
                                  const GenOptions& options) {
  Gen gen(seed, options);
  return gen.run();
}

ir::ProgramBundle generate_program(unsigned long long seed,
                                   const GenOptions& options) {
  ir::ProgramBundle b = ir::parse_program(generate_program_text(seed, options));
  if (options.allow_shared_fields) b = ir::rewrite_shared_fields(b);
  return b;
}

}  // namespace espta::generator
