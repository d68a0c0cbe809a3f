#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "espta/ir.hpp"
#include "espta/pta.hpp"

// Infers minimal candidate specifications explaining a points-to edge:
// every missing function is replaced by a pessimistic body, and a
// priority-queue search finds a cheapest set of pessimistic statements
// whose activation derives the target. Proxy-object specifications are
// inferred separately from observed singleton footprints.
namespace espta::specinfer {

enum class InferMode { Restricted, General };

// One statement of a pessimistic body. Restricted bodies use the single
// receiver field `g` and a return local `r`; the return statement costs
// nothing (it is the template's fixed plumbing). General bodies merge every
// parameter into `ob`, access the single field `f`, and cost every
// statement, the return included.
struct PessStatement {
  std::string function;
  int index = 0;  // position within the function's template
  int cost = 1;
  ir::Statement stmt;
};

std::vector<PessStatement> pessimistic_statements(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    InferMode mode);

// The bundle with every missing function's spec set to the given subset of
// pessimistic statements (missing functions without chosen statements get
// empty specs, so call wiring stays active). The second element names the
// then-active specs.
std::pair<ir::ProgramBundle, std::set<std::string>> with_pessimistic_subset(
    const ir::ProgramBundle& b, const std::set<std::string>& active_specs,
    const std::vector<PessStatement>& universe, const std::set<int>& chosen);

struct InferredSpec {
  std::string function;
  ir::FunctionDecl spec_decl;  // ready-to-merge LibrarySpec body
  auto operator<=>(const InferredSpec&) const = default;
};

struct InferenceResult {
  bool ok = false;
  std::string error;
  int cost = 0;
  std::set<int> chosen;  // indices into pessimistic_statements(...)
  std::vector<InferredSpec> specs;
};

InferenceResult infer_min_spec(const ir::ProgramBundle& b,
                               const std::set<std::string>& active_specs,
                               const pta::Edge& target, InferMode mode);

struct ProxySpec {
  std::string class_name;
  std::string function;
  auto operator<=>(const ProxySpec&) const = default;
};

// One proxy spec per observed proxy whose footprint is a single library
// function; callback slots and larger footprints yield nothing.
std::set<ProxySpec> infer_proxy_specs(const ir::ProgramBundle& b,
                                      const std::set<pta::ProxyObj>& observed);

// True iff the analysis derives the target with the candidate specs active
// and no missing edges.
bool validate_spec(const ir::ProgramBundle& b,
                   const std::set<std::string>& active_specs,
                   const std::vector<InferredSpec>& candidate,
                   const pta::Edge& target);

// Re-parseable spec file for one function (field declarations included).
std::string spec_file_text(const InferredSpec& spec);
std::string proxy_spec_line(const ProxySpec& spec);

}  // namespace espta::specinfer
